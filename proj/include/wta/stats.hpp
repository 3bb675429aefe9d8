#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace wta {

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;

    bool rejects(double level) const noexcept { return p_value < level; }
};

/// Two-sample chi-square homogeneity test on categorical counts. Categories whose
/// expected count falls below `min_expected` in either sample are pooled.
template <typename Key>
ChiSquareResult chi_square_homogeneity(const std::map<Key, std::int64_t>& first,
                                       const std::map<Key, std::int64_t>& second,
                                       double min_expected = 5.0);

/// Core routine on aligned count vectors.
ChiSquareResult chi_square_homogeneity(std::span<const std::int64_t> first,
                                       std::span<const std::int64_t> second, double min_expected = 5.0);

/// z-score of an observed binomial frequency against probability p over `trials`.
double binomial_z(double frequency, double p, std::int64_t trials);

/// Two-sided normal quantile, e.g. 0.99 -> 2.5758.
double normal_quantile(double probability);

template <typename Key>
ChiSquareResult chi_square_homogeneity(const std::map<Key, std::int64_t>& first,
                                       const std::map<Key, std::int64_t>& second, double min_expected) {
    std::map<Key, std::pair<std::int64_t, std::int64_t>> merged;
    for (const auto& [key, count] : first) merged[key].first += count;
    for (const auto& [key, count] : second) merged[key].second += count;
    std::vector<std::int64_t> a, b;
    a.reserve(merged.size());
    b.reserve(merged.size());
    for (const auto& [key, counts] : merged) {
        a.push_back(counts.first);
        b.push_back(counts.second);
    }
    return chi_square_homogeneity(std::span<const std::int64_t>(a), std::span<const std::int64_t>(b),
                                  min_expected);
}

} // namespace wta
