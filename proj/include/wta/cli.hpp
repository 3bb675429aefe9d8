#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wta::cli {

enum ExitCode : int { pass = 0, gate_failure = 1, usage_error = 2, numeric_error = 3 };

/// Tolerance gates read from a plain-text `key = value` file. `#` and `;` start
/// comments and `[section]` lines are ignored.
struct Gates {
    std::optional<double> rel_err_finite_max;  ///< max |rel_err_finite| over all reported rows
    std::optional<double> rel_err_limit_max;   ///< compare: all ranks; sweep: rows at the largest n
    std::optional<int> min_decreasing_steps;   ///< sweep only: steps where |rel_err_limit| at rank 1 shrinks
};

/// Throws DomainError on unknown keys or malformed values.
Gates parse_gates(std::string_view text);

/// Runs one command line (without the program name). Output files go to `--out`
/// unless the WTA_OUT_DIR environment variable is set, which takes precedence.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

inline constexpr std::string_view version = "0.1.0";

} // namespace wta::cli
