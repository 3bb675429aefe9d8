#include "wta/stats.hpp"

#include "wta/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>

namespace wta {

ChiSquareResult chi_square_homogeneity(std::span<const std::int64_t> first, std::span<const std::int64_t> second,
                                       double min_expected) {
    if (first.size() != second.size()) throw DomainError("chi_square_homogeneity: count vectors differ in length");
    double total_a = 0, total_b = 0;
    for (std::size_t c = 0; c < first.size(); ++c) {
        total_a += static_cast<double>(first[c]);
        total_b += static_cast<double>(second[c]);
    }
    if (total_a <= 0 || total_b <= 0) throw DomainError("chi_square_homogeneity: empty sample");
    const double total = total_a + total_b;

    // Pool sparse categories into one bin.
    std::vector<std::pair<double, double>> bins;
    std::pair<double, double> pooled{0, 0};
    for (std::size_t c = 0; c < first.size(); ++c) {
        const double row = static_cast<double>(first[c] + second[c]);
        if (row == 0) continue;
        const double expected_min = row * std::min(total_a, total_b) / total;
        if (expected_min < min_expected) {
            pooled.first += static_cast<double>(first[c]);
            pooled.second += static_cast<double>(second[c]);
        } else {
            bins.emplace_back(static_cast<double>(first[c]), static_cast<double>(second[c]));
        }
    }
    if (pooled.first + pooled.second > 0) bins.push_back(pooled);

    ChiSquareResult out;
    out.dof = static_cast<int>(bins.size()) - 1;
    if (out.dof < 1) return out;
    for (const auto& [a, b] : bins) {
        const double row = a + b;
        const double ea = row * total_a / total;
        const double eb = row * total_b / total;
        out.statistic += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
    }
    const boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

double binomial_z(double frequency, double p, std::int64_t trials) {
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    if (se == 0) {
        if (frequency == p) return 0.0;
        return frequency > p ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return (frequency - p) / se;
}

double normal_quantile(double probability) {
    return boost::math::quantile(boost::math::normal(), 0.5 + probability / 2);
}

} // namespace wta
