#pragma once

#include <cstdint>
#include <limits>

namespace wta {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-keyed random stream.
///
/// A stream is identified by (seed, stream, substream), e.g. (master seed,
/// replicate index, unit index). Two streams with the same key produce the
/// same sequence no matter which thread draws from them, which is what makes
/// parallel simulation bit-identical to serial simulation.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    /// Substream reserved for engines that consume a single sequential stream.
    static constexpr std::uint64_t sequential = std::numeric_limits<std::uint64_t>::max();

    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                         std::uint64_t substream = 0) noexcept
        : state_(mix64(mix64(mix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL)) ^
                       (substream * 0x8CB92BA72F3D8DD7ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on {0, ..., bound - 1}; bound > 0. Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 product = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// Uniform on {1, ..., upper}.
    std::int64_t rank(std::int64_t upper) noexcept {
        return static_cast<std::int64_t>(below(static_cast<std::uint64_t>(upper))) + 1;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Rademacher sign, +1 or -1.
    double sign() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

private:
    std::uint64_t state_;
};

} // namespace wta
