#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wta {

using Rank = std::int32_t;

/// Raised when an argument is outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, bracketing failure).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// What happens when a charge unit picks its own vertex as target.
///
///  - remove: the unit leaves the system; the leak is recorded as a diagonal entry.
///  - freeze: the unit stops and its charge stays; same law and same edges as remove.
///  - stay:   no-op above vertex 1, termination at vertex 1; nothing is recorded.
enum class LeakSemantics { remove, stay, freeze };

/// True when self-picks terminate the unit and are recorded on the diagonal.
constexpr bool records_leaks(LeakSemantics s) noexcept { return s != LeakSemantics::stay; }

std::string_view to_string(LeakSemantics s) noexcept;
LeakSemantics parse_semantics(std::string_view text);

} // namespace wta
