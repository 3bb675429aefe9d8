#include "wta/oracle.hpp"

#include "wta/quadrature.hpp"
#include "wta/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wta {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
    case Provenance::bessel_closed_form: return "bessel_closed_form";
    case Provenance::nystrom: return "nystrom";
    case Provenance::m_truncated: return "m_truncated";
    case Provenance::exact_kernel_matrix: return "exact_kernel_matrix";
    }
    return "bessel_closed_form";
}

OracleSpectrum scaled(OracleSpectrum spectrum, double factor) {
    spectrum.eigenvalues *= factor;
    spectrum.tail_bound *= std::abs(factor);
    return spectrum;
}

std::vector<BesselZero> j1_zeros(int count) {
    std::vector<BesselZero> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 1; k <= count; ++k) out.push_back(j1_zero(k));
    return out;
}

OracleSpectrum k_spectrum(int count) {
    if (count < 1) throw DomainError("k_spectrum: count must be >= 1");
    OracleSpectrum out;
    out.provenance = Provenance::bessel_closed_form;
    out.eigenvalues.resize(count);
    for (int k = 1; k <= count; ++k) {
        const double x = j1_zero(k).location;
        out.eigenvalues(k - 1) = 8.0 / (x * x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Eigenfunctions of K

namespace {

double phi_shape(double lambda, double t) {
    const double z = 2.0 * std::numbers::sqrt2 / std::sqrt(lambda * t);
    return bessel_j1(z) / std::sqrt(t) - std::numbers::sqrt2 / (t * std::sqrt(lambda)) * bessel_j0(z);
}

// Panels per unit of log(t); phi oscillates at most k times on [1, inf).
constexpr int kPanelsPerLogUnit = 24;
const GaussLegendre& rule() {
    static const GaussLegendre gl(12);
    return gl;
}

// int_a^b f(t) dt with panels uniform in log t.
template <typename Fn>
double integrate_log(Fn&& f, double a, double b) {
    if (b <= a) return 0.0;
    const double la = std::log(a), lb = std::log(b);
    const int panels = std::max(1, static_cast<int>(std::ceil((lb - la) * kPanelsPerLogUnit)));
    return rule().integrate([&](double s) { const double t = std::exp(s); return f(t) * t; }, la, lb, panels);
}

} // namespace

EigenfunctionK::EigenfunctionK(double lambda, double cutoff) : lambda_(lambda), cutoff_(cutoff) {
    if (!(lambda > 0)) throw DomainError("EigenfunctionK: lambda must be positive");
    if (!(cutoff > 1)) throw DomainError("EigenfunctionK: cutoff must exceed 1");
    const double norm2 = integrate_log([&](double t) { const double v = phi_shape(lambda_, t); return v * v; }, 1.0, cutoff_);
    c1_ = 1.0 / std::sqrt(norm2);
}

EigenfunctionK EigenfunctionK::make(double lambda, double cutoff) {
    if (!(lambda > 0)) throw DomainError("k_eigenfunction: lambda must be positive");
    const double boundary = bessel_j1(2.0 * std::numbers::sqrt2 / std::sqrt(lambda));
    if (std::abs(boundary) > 1e-8)
        throw DomainError("k_eigenfunction: lambda is not an eigenvalue of K (|J1(2 sqrt(2/lambda))| = " +
                          std::to_string(std::abs(boundary)) + ")");
    return EigenfunctionK(lambda, cutoff);
}

EigenfunctionK EigenfunctionK::make_unchecked(double lambda, double cutoff) { return EigenfunctionK(lambda, cutoff); }

double EigenfunctionK::operator()(double t) const {
    if (!(t >= 1)) throw DomainError("k_eigenfunction: t must be >= 1");
    return c1_ * phi_shape(lambda_, t);
}

double EigenfunctionK::psi(double t) const {
    if (!(t >= 1)) throw DomainError("k_eigenfunction: t must be >= 1");
    return c1_ * std::sqrt(t) * bessel_j1(2.0 * std::numbers::sqrt2 / std::sqrt(lambda_ * t));
}

double eigen_residual(double lambda, const ResidualGrid& grid) {
    if (grid.points < 2 || !(grid.cutoff > 1)) throw DomainError("eigen_residual: need >= 2 points and cutoff > 1");
    const auto phi = EigenfunctionK::make_unchecked(lambda, grid.cutoff);
    double sup_residual = 0.0;
    double sup_lhs = 0.0;
    const double log_cut = std::log(grid.cutoff);
    for (int p = 0; p < grid.points; ++p) {
        const double t = std::exp(log_cut * p / (grid.points - 1));
        const double head = integrate_log(phi, 1.0, t);
        // int_t^inf s^-2 phi(s) ds = int_0^{1/t} phi(1/u) du.
        const double upper = 1.0 / t;
        const int panels = 16 + static_cast<int>(std::ceil(4 * std::log(t + 1)));
        const double tail = rule().integrate([&](double u) { return u <= 0 ? 0.0 : phi(1.0 / u); }, 0.0, upper, panels);
        const double lhs = lambda * phi(t);
        sup_residual = std::max(sup_residual, std::abs(lhs - head / (t * t) - tail));
        sup_lhs = std::max(sup_lhs, std::abs(lhs));
    }
    return sup_residual / sup_lhs;
}

// ---------------------------------------------------------------------------
// Operator M and the Nystrom discretization of K

OracleSpectrum m_spectrum_truncated(std::int64_t truncation, Eigen::Index count) {
    if (truncation < 1 || count < 1 || count > truncation)
        throw DomainError("m_spectrum_truncated: need 1 <= count <= N");
    Eigen::VectorXd g(truncation);
    for (std::int64_t i = 1; i <= truncation; ++i) g(i - 1) = 1.0 / (static_cast<double>(i) * static_cast<double>(i));
    const auto kernel = MaxKernel<double>::from_max_law(g);

    OracleSpectrum out;
    out.provenance = Provenance::m_truncated;
    out.truncation = truncation;
    out.tail_bound = 1.0 / static_cast<double>(truncation);
    const DenseOptions dense;
    if (truncation <= dense.cap)
        out.eigenvalues = eigenvalues_dense(kernel.dense(), dense).head(count);
    else
        out.eigenvalues = top_eigenvalues_iterative(kernel, count, {.tol = 1e-12});
    return out;
}

MaxKernel<double> nystrom_kernel(double cutoff, std::int64_t grid) {
    if (!(cutoff > 1) || grid < 1) throw DomainError("nystrom_kernel: need cutoff > 1 and grid >= 1");
    const double h = (cutoff - 1.0) / static_cast<double>(grid);
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(grid, std::sqrt(h));
    Eigen::VectorXd off(grid), diag(grid);
    for (std::int64_t i = 0; i < grid; ++i) {
        const double t = 1.0 + (static_cast<double>(i) + 0.5) * h;
        off(i) = 1.0 / (t * t);
        diag(i) = h / (t * t);
    }
    return MaxKernel<double>(std::move(scale), std::move(off), std::move(diag));
}

OracleSpectrum k_spectrum_nystrom(double cutoff, std::int64_t grid, Eigen::Index count) {
    if (cutoff < 50 || grid < 100) throw DomainError("k_spectrum_nystrom: need T >= 50 and grid >= 100");
    OracleSpectrum out;
    out.provenance = Provenance::nystrom;
    out.grid = grid;
    out.cutoff = cutoff;
    out.tail_bound = 1.0 / cutoff;  // trace mass of K beyond T
    out.eigenvalues = top_eigenvalues_iterative(nystrom_kernel(cutoff, grid), count, {.tol = 1e-12});
    return out;
}

double nystrom_trace_power(double cutoff, std::int64_t grid, int k) {
    if (k < 1) throw DomainError("nystrom_trace_power: k must be >= 1");
    const auto kernel = nystrom_kernel(cutoff, grid);
    if (k == 1) return kernel.trace();
    if (k == 2) return kernel.frobenius_squared();
    const Eigen::VectorXd values = eigenvalues_dense(kernel.dense());
    return values.array().pow(k).sum();
}

// ---------------------------------------------------------------------------
// Exact finite-n law of one unit

EdgeProbabilities exact_edge_probability(std::int64_t n, LeakSemantics semantics) {
    if (n < 1) throw DomainError("exact_edge_probability: n must be >= 1");
    const bool stay = semantics == LeakSemantics::stay;
    const auto dn = static_cast<double>(n);
    // Probability that the next effective pick from v is a given lower rank (or v itself).
    auto step = [&](std::int64_t v) { return stay ? 1.0 / static_cast<double>(v - 1) : 1.0 / static_cast<double>(v); };

    Eigen::VectorXd visit(n);
    for (std::int64_t target = 1; target <= n; ++target) {
        // sum over v > target of h(v, target); h(v, .) depends on h(u, .) for target < u < v.
        double running = 0.0;
        for (std::int64_t v = target + 1; v <= n; ++v) running += step(v) * (1.0 + running);
        visit(target - 1) = (1.0 + running) / dn;
    }

    Eigen::VectorXd off(n), diag(n);
    for (std::int64_t i = 1; i <= n; ++i) {
        if (stay) {
            off(i - 1) = i > 1 ? visit(i - 1) * step(i) : 0.0;
            diag(i - 1) = 0.0;
        } else {
            off(i - 1) = visit(i - 1) * step(i);
            diag(i - 1) = off(i - 1);
        }
    }
    return {n, semantics, std::move(visit), MaxKernel<double>(Eigen::VectorXd::Ones(n), std::move(off), std::move(diag))};
}

// ---------------------------------------------------------------------------
// Limit moments

LimitMoment limit_moment(LimitOperator op, int k, std::int64_t truncation, double alpha) {
    if (k < 1) throw DomainError("limit_moment: order must be >= 1");
    if (truncation < 1) throw DomainError("limit_moment: truncation must be >= 1");
    const double scale = std::pow(alpha, k);
    const auto N = static_cast<double>(truncation);
    LimitMoment out;
    if (op == LimitOperator::K) {
        const auto spectrum = k_spectrum(static_cast<int>(truncation));
        out.value = scale * spectrum.eigenvalues.array().pow(k).sum();
        // sum_{j > N} (8 / ((j + 1/4) pi)^2)^k ~ (8/pi^2)^k (N + 3/4)^{1-2k} / (2k - 1).
        out.tail_estimate = scale * std::pow(8.0 / (std::numbers::pi * std::numbers::pi), k) *
                            std::pow(N + 0.75, 1.0 - 2.0 * k) / (2.0 * k - 1.0);
        return out;
    }
    Eigen::VectorXd g(truncation);
    for (std::int64_t i = 1; i <= truncation; ++i) g(i - 1) = 1.0 / (static_cast<double>(i) * static_cast<double>(i));
    const auto kernel = MaxKernel<double>::from_max_law(g);
    if (k == 1) {
        // Sum from the small end up to keep the partial Basel sum accurate.
        double total = 0.0;
        for (std::int64_t i = truncation; i >= 1; --i) total += g(i - 1);
        out.value = scale * total;
        out.tail_estimate = scale / N;
    } else if (k == 2) {
        out.value = scale * kernel.frobenius_squared();
        out.tail_estimate = scale / (N * N);  // sum_{U>N} (2U-1)/U^4 ~ 1/N^2
    } else {
        if (truncation > DenseOptions{}.cap)
            throw DomainError("limit_moment: orders >= 3 of M need truncation <= dense cap");
        const Eigen::VectorXd values = eigenvalues_dense(kernel.dense());
        out.value = scale * values.array().pow(k).sum();
        out.tail_estimate = scale * k * std::pow(values(0), k - 1) / N;
    }
    return out;
}

} // namespace wta
