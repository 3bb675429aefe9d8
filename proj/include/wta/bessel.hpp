#pragma once

#include "wta/types.hpp"

#include <cmath>
#include <concepts>
#include <numbers>
#include <string>

namespace wta {

namespace detail {

using Wide = long double;

// Ascending series sum_k (-1)^k (x/2)^{2k+order} / (k! (k+order)!), summed in
// extended precision; the largest term at x = 12 is ~4e3, so long double keeps
// the absolute error well under 1e-13.
inline Wide bessel_series(int order, Wide x) {
    const Wide half = x / 2;
    const Wide q = half * half;
    Wide term = order == 0 ? Wide{1} : half;
    Wide sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<Wide>(k) * static_cast<Wide>(k + order));
        sum += term;
        if (std::fabs(term) < Wide{1e-24}) break;
    }
    return sum;
}

// Miller's backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
// J_0 + 2 sum_{k>=1} J_{2k} = 1. Stable for any x > 0.
inline Wide bessel_miller(int order, Wide x) {
    int start = static_cast<int>(x) + 60;
    start += start % 2;
    Wide next = 0;   // J_{k+1}
    Wide cur = 1e-30L;  // J_k, arbitrary scale
    Wide j0 = 0, j1 = 0, norm = 0;
    for (int k = start; k >= 1; --k) {
        const Wide prev = (2 * k / x) * cur - next;  // J_{k-1}
        next = cur;
        cur = prev;
        if (std::fabs(cur) > Wide{1e250L}) {
            cur *= Wide{1e-250L};
            next *= Wide{1e-250L};
            j1 *= Wide{1e-250L};
            norm *= Wide{1e-250L};
        }
        if (k - 1 == 1) j1 = cur;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2 * cur;
    }
    j0 = cur;
    norm += j0;
    return (order == 0 ? j0 : j1) / norm;
}

// Hankel asymptotic expansion J_v(x) = sqrt(2/(pi x)) (P cos w - Q sin w),
// w = x - v pi/2 - pi/4, summed up to the smallest term.
inline Wide bessel_hankel(int order, Wide x) {
    const Wide mu = 4 * static_cast<Wide>(order) * order;
    Wide p = 0, q = 0;
    Wide a = 1;  // a_k(v) / x^k
    Wide last = INFINITY;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) a *= (mu - static_cast<Wide>(2 * k - 1) * (2 * k - 1)) / (static_cast<Wide>(k) * 8 * x);
        const Wide mag = std::fabs(a);
        if (mag > last) break;
        last = mag;
        const Wide signed_a = ((k / 2) % 2 == 0) ? a : -a;
        if (k % 2 == 0)
            p += signed_a;
        else
            q += signed_a;
        if (mag < Wide{1e-24}) break;
    }
    const Wide w = x - (static_cast<Wide>(order) / 2 + Wide{0.25}) * std::numbers::pi_v<Wide>;
    return std::sqrt(2 / (std::numbers::pi_v<Wide> * x)) * (p * std::cos(w) - q * std::sin(w));
}

} // namespace detail

/// Bessel function of the first kind, order 0 or 1, for x >= 0.
/// Absolute error below 1e-13 on [0, 100] in double.
template <std::floating_point Scalar>
Scalar bessel_j(int order, Scalar x) {
    if (order != 0 && order != 1) throw DomainError("bessel_j: order must be 0 or 1");
    if (!(x >= 0)) throw DomainError("bessel_j: argument must be nonnegative, got " + std::to_string(x));
    const auto wx = static_cast<detail::Wide>(x);
    if (wx <= 12) return static_cast<Scalar>(detail::bessel_series(order, wx));
    if (wx <= 25) return static_cast<Scalar>(detail::bessel_miller(order, wx));
    return static_cast<Scalar>(detail::bessel_hankel(order, wx));
}

template <std::floating_point Scalar>
Scalar bessel_j0(Scalar x) { return bessel_j(0, x); }

template <std::floating_point Scalar>
Scalar bessel_j1(Scalar x) { return bessel_j(1, x); }

/// k-th positive zero of J_1 with the achieved residual |J_1(x_k)|.
struct BesselZero {
    int index = 0;
    double location = 0.0;
    double residual = 0.0;
};

/// Brackets the zero in (k + 1/4) pi -+ pi/2 (McMahon), bisects, then polishes
/// with Newton steps using J_1'(x) = J_0(x) - J_1(x) / x.
BesselZero j1_zero(int k);

/// McMahon leading-order estimate (k + 1/4) pi.
inline double mcmahon_estimate(int k) { return (k + 0.25) * std::numbers::pi; }

} // namespace wta
