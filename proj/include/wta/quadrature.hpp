#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace wta {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    explicit GaussLegendre(int order) : nodes(order), weights(order) {
        for (int i = 0; i < order; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
            double dp = 0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = x;
                for (int k = 2; k <= order; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order * (x * p1 - p0) / (x * x - 1);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes(i) = x;
            weights(i) = 2 / ((1 - x * x) * dp * dp);
        }
    }

    /// Composite rule over `panels` equal sub-intervals of [a, b].
    template <typename Fn>
    double integrate(Fn&& f, double a, double b, int panels = 1) const {
        const double width = (b - a) / panels;
        double total = 0;
        for (int p = 0; p < panels; ++p) {
            const double mid = a + (p + 0.5) * width;
            double panel = 0;
            for (Eigen::Index i = 0; i < nodes.size(); ++i) panel += weights(i) * f(mid + 0.5 * width * nodes(i));
            total += 0.5 * width * panel;
        }
        return total;
    }
};

} // namespace wta
