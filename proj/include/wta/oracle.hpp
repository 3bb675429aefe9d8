#pragma once

#include "wta/bessel.hpp"
#include "wta/max_kernel.hpp"
#include "wta/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace wta {

enum class Provenance { bessel_closed_form, nystrom, m_truncated, exact_kernel_matrix };

std::string_view to_string(Provenance p) noexcept;

/// Theory-side eigenvalues, descending.
struct OracleSpectrum {
    Eigen::VectorXd eigenvalues;
    Provenance provenance = Provenance::bessel_closed_form;
    std::optional<std::int64_t> grid;        ///< Nystrom point count
    std::optional<double> cutoff;            ///< Nystrom domain [1, T]
    std::optional<std::int64_t> truncation;  ///< M truncation N
    std::optional<std::int64_t> n;           ///< finite-n kernels
    std::optional<LeakSemantics> semantics;
    double tail_bound = 0.0;                 ///< truncation-error indicator, where defined
};

/// Same spectrum with every eigenvalue multiplied by `factor`.
OracleSpectrum scaled(OracleSpectrum spectrum, double factor);

/// First `count` positive zeros of J_1.
std::vector<BesselZero> j1_zeros(int count);

/// Eigenvalues of K: lambda_k = 8 / x_k^2 with x_k the k-th zero of J_1.
OracleSpectrum k_spectrum(int count);

/// Eigenfunction of K on [1, inf) for an eigenvalue lambda:
///   Psi(t) = C sqrt(t) J_1(z),  phi(t) = Psi'(t) = C (J_1(z)/sqrt(t) - sqrt(2)/(t sqrt(lambda)) J_0(z)),
/// with z = 2 sqrt(2) / sqrt(lambda t) and C > 0 giving unit L2 norm on [1, T].
class EigenfunctionK {
public:
    /// Throws DomainError unless |J_1(2 sqrt(2/lambda))| <= 1e-8.
    static EigenfunctionK make(double lambda, double cutoff = 200.0);
    /// No eigenvalue check; used to probe residuals away from the spectrum.
    static EigenfunctionK make_unchecked(double lambda, double cutoff = 200.0);

    double lambda() const noexcept { return lambda_; }
    double normalization() const noexcept { return c1_; }
    double cutoff() const noexcept { return cutoff_; }

    double operator()(double t) const;  ///< phi(t), t >= 1
    double psi(double t) const;         ///< Psi(t), the antiderivative with the J_1 branch only

private:
    EigenfunctionK(double lambda, double cutoff);
    double lambda_ = 0.0;
    double c1_ = 1.0;
    double cutoff_ = 200.0;
};

struct ResidualGrid {
    int points = 200;       ///< log-spaced evaluation points on [1, cutoff]
    double cutoff = 200.0;
};

/// sup over the grid of |lambda phi(t) - t^-2 int_1^t phi - int_t^inf s^-2 phi(s) ds|,
/// divided by sup |lambda phi|. Integrals by composite Gauss-Legendre; the infinite
/// tail via s = 1/u.
double eigen_residual(double lambda, const ResidualGrid& grid = {});

/// Top `count` eigenvalues of the N x N matrix 1/(i v j)^2; tail_bound = 1/N > sum_{i>N} i^-2.
OracleSpectrum m_spectrum_truncated(std::int64_t truncation, Eigen::Index count);

/// Midpoint-rule Nystrom matrix of K on [1, T], symmetrized as sqrt(w_i) K(t_i,t_j) sqrt(w_j).
MaxKernel<double> nystrom_kernel(double cutoff, std::int64_t grid);

/// Top `count` eigenvalues of the Nystrom matrix.
OracleSpectrum k_spectrum_nystrom(double cutoff, std::int64_t grid, Eigen::Index count = 10);

/// Exact finite-n law of a single unit with uniform start.
struct EdgeProbabilities {
    std::int64_t n = 0;
    LeakSemantics semantics = LeakSemantics::remove;
    Eigen::VectorXd visit;    ///< visit(U-1) = P(unit visits U)
    MaxKernel<double> edge;   ///< P(unit traverses i<->j), diagonal = P(recorded leak at i)

    double edge_probability(Rank i, Rank j) const { return edge(i - 1, j - 1); }
};

/// Dynamic program over ranks: h(v,U) = w_v [1 + sum_{u=U+1}^{v-1} h(u,U)] is the
/// probability of visiting U from v > U, with w_v = 1/v (remove, freeze) or
/// 1/(v-1) (stay). Combined with the uniform start this gives P(visit U); an edge
/// i -> j (j <= i) is taken from a visit at i with the target probability w_i.
EdgeProbabilities exact_edge_probability(std::int64_t n, LeakSemantics semantics);

enum class LimitOperator { M, K };

struct LimitMoment {
    double value = 0.0;          ///< alpha^k tr(op^k) at the given truncation
    double tail_estimate = 0.0;  ///< estimate of the neglected part (alpha^k scaled)
};

/// alpha^k tr(M_N^k) (k = 1, 2 in O(N); k >= 3 by dense eigenvalues, N <= 4000), or
/// alpha^k sum_{j <= truncation} lambda_j(K)^k from the Bessel closed form.
LimitMoment limit_moment(LimitOperator op, int k, std::int64_t truncation, double alpha = 1.0);

/// tr(S^k) of the Nystrom matrix S (independent route to tr K^k).
double nystrom_trace_power(double cutoff, std::int64_t grid, int k);

} // namespace wta
