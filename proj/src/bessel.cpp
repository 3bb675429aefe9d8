#include "wta/bessel.hpp"

#include <cmath>
#include <numbers>

namespace wta {

BesselZero j1_zero(int k) {
    if (k < 1) throw DomainError("j1_zero: index must be >= 1");
    const double center = mcmahon_estimate(k);
    double lo = center - std::numbers::pi / 2;
    double hi = center + std::numbers::pi / 2;
    double f_lo = bessel_j1(lo);
    const double f_hi = bessel_j1(hi);
    if (f_lo * f_hi > 0)
        throw NumericError("j1_zero: no sign change in McMahon bracket for k=" + std::to_string(k));

    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = bessel_j1(mid);
        if ((f_mid > 0) == (f_lo > 0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
        const double j1 = bessel_j1(x);
        const double slope = bessel_j0(x) - j1 / x;
        const double step = j1 / slope;
        x -= step;
        if (std::abs(step) <= 1e-15 * x) break;
    }
    return {k, x, std::abs(bessel_j1(x))};
}

} // namespace wta
