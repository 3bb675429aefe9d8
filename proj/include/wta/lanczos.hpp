#pragma once

#include "wta/rng.hpp"
#include "wta/types.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace wta {

struct LanczosOptions {
    double tol = 1e-8;              ///< relative residual bound for accepted Ritz values
    Eigen::Index max_basis = 800;  ///< Krylov dimension cap (clamped to the operator size)
    std::uint64_t seed = 0x1a2c205;
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> random_unit(Eigen::Index dim, CounterRng& rng) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = static_cast<Scalar>(rng.uniform() - 0.5);
    v.normalize();
    return v;
}

} // namespace detail

/// k largest eigenvalues (descending) of the symmetric operator `apply`, where
/// apply(x, y) writes y = A x for vectors of length `dim`.
///
/// Lanczos with full reorthogonalization (two Gram-Schmidt passes). On an
/// invariant-subspace breakdown the recurrence restarts from a fresh random
/// vector orthogonal to the basis, so k == dim recovers the full spectrum.
/// Throws NumericError if the Ritz residuals do not reach `tol` within max_basis steps.
template <typename Scalar = double, typename Apply>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lanczos_top(Apply&& apply, Eigen::Index dim, Eigen::Index k,
                                                      const LanczosOptions& options = {}) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Index = Eigen::Index;

    if (k < 1 || k > dim)
        throw DomainError("lanczos_top: need 1 <= k <= dim, got k=" + std::to_string(k) +
                          " dim=" + std::to_string(dim));
    const Index basis_cap = std::min(dim, std::max(options.max_basis, k));

    CounterRng rng(options.seed, static_cast<std::uint64_t>(dim));
    Matrix basis(dim, basis_cap);
    Vector alpha(basis_cap), beta(basis_cap);
    basis.col(0) = detail::random_unit<Scalar>(dim, rng);

    Vector w(dim);
    Vector ritz;
    Scalar norm_estimate = 0;
    for (Index j = 0; j < basis_cap; ++j) {
        apply(basis.col(j).eval(), w);
        alpha(j) = basis.col(j).dot(w);
        for (int pass = 0; pass < 2; ++pass) {
            const Vector coeffs = basis.leftCols(j + 1).transpose() * w;
            w.noalias() -= basis.leftCols(j + 1) * coeffs;
        }
        beta(j) = w.norm();
        norm_estimate = std::max(norm_estimate, std::abs(alpha(j)) + beta(j));

        const Index size = j + 1;
        const bool exhausted = size == basis_cap;
        const bool breakdown = beta(j) <= Scalar(1e-13) * std::max(norm_estimate, Scalar(1e-300));
        if (size >= k && (exhausted || breakdown || size % 5 == 0 || size == k)) {
            Eigen::SelfAdjointEigenSolver<Matrix> tri;
            Vector sub = beta.head(size - 1);
            Vector diag = alpha.head(size);
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (tri.info() != Eigen::Success) throw NumericError("lanczos_top: tridiagonal eigensolve failed");
            const Vector& theta = tri.eigenvalues();  // ascending
            const Scalar scale = std::max(std::abs(theta(size - 1)), std::abs(theta(0)));
            bool converged = true;
            for (Index r = 0; r < k; ++r) {
                const Index col = size - 1 - r;
                const Scalar resid = std::abs(beta(j) * tri.eigenvectors()(size - 1, col));
                if (resid > Scalar(options.tol) * std::max(std::abs(theta(col)), scale * Scalar(1e-3))) {
                    converged = false;
                    break;
                }
            }
            ritz = theta.reverse().head(k);
            if (exhausted && size == dim) return ritz;
            // After a breakdown keep going: a repeated eigenvalue appears once per block.
            if (converged && !breakdown) return ritz;
            if (exhausted)
                throw NumericError("lanczos_top: no convergence after " + std::to_string(size) +
                                   " Lanczos steps (k=" + std::to_string(k) + ")");
        }
        if (j + 1 == basis_cap) break;
        if (breakdown) {
            // Restart in the orthogonal complement; beta(j) = 0 decouples the blocks.
            beta(j) = 0;
            Vector fresh = detail::random_unit<Scalar>(dim, rng);
            for (int pass = 0; pass < 2; ++pass) {
                const Vector coeffs = basis.leftCols(j + 1).transpose() * fresh;
                fresh.noalias() -= basis.leftCols(j + 1) * coeffs;
            }
            basis.col(j + 1) = fresh.normalized();
        } else {
            basis.col(j + 1) = w / beta(j);
        }
    }
    throw NumericError("lanczos_top: Krylov basis exhausted without convergence");
}

} // namespace wta
