#include "doctest.h"

#include "wta/bessel.hpp"
#include "wta/lanczos.hpp"
#include "wta/oracle.hpp"
#include "wta/quadrature.hpp"
#include "wta/spectra.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace wta;

namespace {

constexpr double pi = std::numbers::pi;

// Forward propagation of the visit mass of one unit, rank n down to 1. Independent
// of the backward recursion in exact_edge_probability.
struct ForwardLaw {
    std::vector<double> visit;      // index U
    std::vector<double> edge;       // edge[i * (n + 1) + j], i > j
    std::vector<double> leak;       // recorded leak at i
};

ForwardLaw forward_law(int n, LeakSemantics semantics) {
    ForwardLaw law{std::vector<double>(n + 1, 0.0), std::vector<double>((n + 1) * (n + 1), 0.0),
                   std::vector<double>(n + 1, 0.0)};
    std::vector<double> mass(n + 1, 1.0 / n);
    for (int v = n; v >= 1; --v) {
        law.visit[v] = mass[v];
        if (v == 1) {
            if (records_leaks(semantics)) law.leak[1] = mass[1];
            break;
        }
        // Targets below v are equally likely; a self-pick either ends the path or is redrawn.
        const double per_target = semantics == LeakSemantics::stay ? 1.0 / (v - 1) : 1.0 / v;
        if (records_leaks(semantics)) law.leak[v] = mass[v] / v;
        for (int u = 1; u < v; ++u) {
            law.edge[v * (n + 1) + u] = mass[v] * per_target;
            mass[u] += mass[v] * per_target;
        }
    }
    return law;
}

// Coefficients of det(xI - A) by Faddeev-LeVerrier, highest degree first.
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[k - 1] * Eigen::MatrixXd::Identity(n, n);
        c[k] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

double horner(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (double coef : c) v = v * x + coef;
    return v;
}

} // namespace

TEST_CASE("bessel functions match an independent implementation") {
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(bessel_j1(0.0) == 0.0);
    for (double x = 0.05; x < 300.0; x *= 1.07) {
        INFO("x = " << x);
        CHECK(std::abs(bessel_j0(x) - boost::math::cyl_bessel_j(0, x)) <= 1e-12);
        CHECK(std::abs(bessel_j1(x) - boost::math::cyl_bessel_j(1, x)) <= 1e-12);
    }
    CHECK_THROWS_AS(bessel_j(2, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_j0(-1.0), DomainError);
}

TEST_CASE("J0 derivative is -J1 by central differences") {
    const double h = 1e-5;
    for (double x : {0.5, 2.0, 10.0}) {
        const double fd = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h);
        CHECK(std::abs(fd + bessel_j1(x)) <= 1e-6);
    }
}

TEST_CASE("zeros of J1") {
    const auto first = j1_zero(1);
    CHECK(std::abs(first.location - 3.8317059702) <= 1e-9);
    CHECK(std::abs(bessel_j1(3.8317059702)) <= 1e-9);
    CHECK(std::abs(j1_zero(20).location - 20.25 * pi) <= 0.01);
    for (int k = 1; k <= 60; ++k) {
        const auto z = j1_zero(k);
        INFO("k = " << k);
        CHECK(z.residual <= 1e-12);
        CHECK(std::abs(z.location - boost::math::cyl_bessel_j_zero(1.0, k)) <= 1e-10);
    }
    for (int k = 50; k < 60; ++k) CHECK(std::abs(j1_zero(k + 1).location - j1_zero(k).location - pi) <= 0.002);
    CHECK_THROWS_AS(j1_zero(0), DomainError);
}

TEST_CASE("spectrum of K from the zeros of J1") {
    const auto spectrum = k_spectrum(1000);
    CHECK(spectrum.eigenvalues(0) == doctest::Approx(0.54489).epsilon(1e-5));
    CHECK(std::abs(spectrum.eigenvalues.sum() - 1.0) <= 1e-3);
    CHECK(std::abs(spectrum.eigenvalues.squaredNorm() - 1.0 / 3.0) <= 1e-6);
    CHECK(spectrum.eigenvalues(19) * 400 * pi * pi / 8 == doctest::Approx(400 / (20.25 * 20.25)).epsilon(1e-3));

    double previous = 0.0;
    for (int k = 20; k <= 100; ++k) {
        const double ratio = spectrum.eigenvalues(k - 1) * k * k * pi * pi / 8;
        CHECK(ratio < 1.0);
        CHECK(ratio > previous);
        previous = ratio;
    }
    CHECK_THROWS_AS(k_spectrum(0), DomainError);
}

TEST_CASE("eigenfunctions of K") {
    const auto spectrum = k_spectrum(5);
    const double l1 = spectrum.eigenvalues(0);
    const auto phi = EigenfunctionK::make(l1);

    SUBCASE("boundary condition and ODE") {
        CHECK(std::abs(phi.psi(1.0)) <= 1e-12);
        const double h = 1e-3;
        for (double t : {1.5, 3.0, 10.0}) {
            const double second = (phi.psi(t + h) - 2 * phi.psi(t) + phi.psi(t - h)) / (h * h);
            CHECK(std::abs(l1 * second + 2 / (t * t * t) * phi.psi(t)) <= 1e-6);
            // phi is the derivative of psi.
            CHECK(std::abs((phi.psi(t + h) - phi.psi(t - h)) / (2 * h) - phi(t)) <= 1e-6);
        }
    }

    SUBCASE("decay faster than 1/t") {
        double previous = std::abs(phi(50.0)) * 50.0;
        for (double t = 60.0; t <= 2000.0; t *= 1.2) {
            const double current = std::abs(phi(t)) * t;
            CHECK(current <= previous);
            previous = current;
        }
    }

    SUBCASE("orthonormal on [1, T]") {
        const auto phi2 = EigenfunctionK::make(spectrum.eigenvalues(1));
        const GaussLegendre gl(12);
        auto inner = [&](const EigenfunctionK& a, const EigenfunctionK& b) {
            return gl.integrate([&](double s) { const double t = std::exp(s); return a(t) * b(t) * t; }, 0.0,
                                std::log(200.0), 200);
        };
        CHECK(inner(phi, phi) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(inner(phi, phi2)) <= 1e-5);
    }

    SUBCASE("residual of the integral equation") {
        for (int k = 1; k <= 5; ++k) CHECK(eigen_residual(spectrum.eigenvalues(k - 1)) <= 1e-5);
        CHECK(eigen_residual(l1) <= 1e-6);
        CHECK(eigen_residual(1.1 * l1) >= 1e-2);
    }

    CHECK_THROWS_AS(EigenfunctionK::make(1.1 * l1), DomainError);
    CHECK_THROWS_AS(phi(0.5), DomainError);
}

TEST_CASE("truncated spectrum of M") {
    const auto one = m_spectrum_truncated(1, 1);
    REQUIRE(one.eigenvalues.size() == 1);
    CHECK(one.eigenvalues(0) == doctest::Approx(1.0));

    double previous = 0.0;
    for (std::int64_t n : {2, 5, 10, 50, 200, 1000}) {
        const double top = m_spectrum_truncated(n, 1).eigenvalues(0);
        CHECK(top >= previous);
        previous = top;
    }

    Eigen::MatrixXd m(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = 1.0 / std::pow(std::max(i, j) + 1.0, 2);
    const auto poly = characteristic_polynomial(m);
    const double top = m_spectrum_truncated(4, 1).eigenvalues(0);
    CHECK(std::abs(horner(poly, top)) <= 1e-12);
    // Bisection on the characteristic polynomial bracketing the largest root.
    double lo = top - 0.05, hi = m.rowwise().sum().maxCoeff();
    REQUIRE(horner(poly, lo) * horner(poly, hi) < 0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (horner(poly, mid) * horner(poly, lo) > 0 ? lo : hi) = mid;
    }
    CHECK(std::abs(top - 0.5 * (lo + hi)) <= 1e-10);

    const auto dense = m_spectrum_truncated(1500, 3);
    const auto law = Eigen::VectorXd::LinSpaced(1500, 1, 1500).cwiseAbs2().cwiseInverse().eval();
    const auto iterative = top_eigenvalues_iterative(MaxKernel<double>::from_max_law(law), 3, {.tol = 1e-12});
    for (int k = 0; k < 3; ++k) CHECK(iterative(k) == doctest::Approx(dense.eigenvalues(k)).epsilon(1e-10));
    CHECK(m_spectrum_truncated(5000, 1).eigenvalues(0) > dense.eigenvalues(0));  // Lanczos path above the dense cap
    CHECK_THROWS_AS(m_spectrum_truncated(3, 4), DomainError);
}

TEST_CASE("Nystrom discretization of K") {
    const auto kernel = nystrom_kernel(200.0, 4000);
    // Midpoint rule for int_1^T t^-2 dt; the error is about h^2 / 12 = 2.1e-4.
    CHECK(kernel.trace() == doctest::Approx(1.0 - 1.0 / 200.0).epsilon(5e-4));

    const auto exact = k_spectrum(5);
    const auto coarse = k_spectrum_nystrom(200.0, 4000, 5);
    const auto fine = k_spectrum_nystrom(200.0, 8000, 5);
    for (int k = 0; k < 5; ++k) {
        const double e_coarse = std::abs(coarse.eigenvalues(k) / exact.eigenvalues(k) - 1);
        const double e_fine = std::abs(fine.eigenvalues(k) / exact.eigenvalues(k) - 1);
        INFO("k = " << k + 1 << " coarse " << e_coarse << " fine " << e_fine);
        CHECK(e_coarse <= 5e-3);
        CHECK(e_fine < e_coarse);
    }
    CHECK(nystrom_trace_power(200.0, 4000, 2) == doctest::Approx(1.0 / 3.0).epsilon(2e-2));
    CHECK_THROWS_AS(k_spectrum_nystrom(10.0, 4000), DomainError);
}

TEST_CASE("exact single-unit law") {
    for (LeakSemantics s : {LeakSemantics::remove, LeakSemantics::stay, LeakSemantics::freeze}) {
        for (int n : {1, 2, 3, 7, 40}) {
            const auto law = exact_edge_probability(n, s);
            const auto reference = forward_law(n, s);
            for (int u = 1; u <= n; ++u) {
                CHECK(law.visit(u - 1) == doctest::Approx(reference.visit[u]).epsilon(1e-13));
                CHECK(law.edge_probability(u, u) == doctest::Approx(reference.leak[u]).epsilon(1e-13));
                for (int j = 1; j < u; ++j)
                    CHECK(law.edge_probability(u, j) == doctest::Approx(reference.edge[u * (n + 1) + j]).epsilon(1e-13));
            }
        }
    }

    const int n = 1000;
    const auto remove = exact_edge_probability(n, LeakSemantics::remove);
    const auto stay = exact_edge_probability(n, LeakSemantics::stay);
    for (int u : {1, 2, 3, 4, 10, 999, 1000}) {
        CHECK(remove.visit(u - 1) == doctest::Approx((n + 1.0) / (n * (u + 1.0))).epsilon(1e-12));
        CHECK(stay.visit(u - 1) == doctest::Approx(1.0 / u).epsilon(1e-12));
    }
    CHECK(remove.visit(3) == doctest::Approx(0.2002).epsilon(1e-4));
    CHECK(remove.edge_probability(10, 3) * 1000 == doctest::Approx(1000.0 * 1001 / (1000.0 * 10 * 11)));
    CHECK(stay.edge_probability(5, 5) == 0.0);
    CHECK(stay.edge_probability(5, 2) == doctest::Approx(1.0 / 20));
    // Large-n edge law against the limit kernel 1/U^2: the ratio is U/(U+1).
    for (int u : {2, 5, 20}) CHECK(remove.edge_probability(u, 1) * u * u == doctest::Approx(u / (u + 1.0)).epsilon(2e-3));
    CHECK_THROWS_AS(exact_edge_probability(0, LeakSemantics::remove), DomainError);
}

TEST_CASE("limit moments") {
    const auto k1 = limit_moment(LimitOperator::K, 1, 2000, 2.0);
    CHECK(std::abs(k1.value - 2.0) <= k1.tail_estimate * 1.1 + 1e-9);
    CHECK(k1.value < 2.0);
    CHECK(limit_moment(LimitOperator::K, 2, 200).value == doctest::Approx(1.0 / 3).epsilon(1e-6));

    const auto basel = limit_moment(LimitOperator::M, 1, 1'000'000);
    CHECK(basel.value < pi * pi / 6);
    CHECK(pi * pi / 6 - basel.value == doctest::Approx(1e-6).epsilon(1e-3));

    const auto m2 = limit_moment(LimitOperator::M, 2, 300);
    const auto values = eigenvalues_dense(MaxKernel<double>::from_max_law(
                                              Eigen::VectorXd::LinSpaced(300, 1, 300).cwiseAbs2().cwiseInverse())
                                              .dense());
    CHECK(m2.value == doctest::Approx(values.squaredNorm()).epsilon(1e-12));
    CHECK(limit_moment(LimitOperator::M, 3, 300).value == doctest::Approx(values.array().cube().sum()).epsilon(1e-12));
    CHECK_THROWS_AS(limit_moment(LimitOperator::M, 3, 5000), DomainError);
}

TEST_CASE("Lanczos top eigenvalues") {
    auto dense_apply = [](const Eigen::MatrixXd& a) {
        return [&a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; };
    };

    const Eigen::MatrixXd diag = Eigen::Vector3d(3, 2, 1).asDiagonal();
    const auto top2 = lanczos_top<double>(dense_apply(diag), 3, 2);
    CHECK(top2(0) == doctest::Approx(3.0));
    CHECK(top2(1) == doctest::Approx(2.0));

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(10, 10);
    const auto ones = lanczos_top<double>(dense_apply(identity), 10, 3);
    for (int k = 0; k < 3; ++k) CHECK(ones(k) == doctest::Approx(1.0));

    Eigen::MatrixXd random = Eigen::MatrixXd::Random(60, 60);
    random = (random + random.transpose()).eval();
    const auto full = lanczos_top<double>(dense_apply(random), 60, 60);
    const auto reference = eigenvalues_dense(random);
    for (int k = 0; k < 60; ++k) CHECK(full(k) == doctest::Approx(reference(k)).epsilon(1e-8));

    CHECK_THROWS_AS(lanczos_top<double>(dense_apply(diag), 3, 4), DomainError);
}

TEST_CASE("dense eigensolver") {
    CHECK(eigenvalues_dense(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::Vector3d::Ones()));
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK(eigenvalues_dense(swap).isApprox(Eigen::Vector2d(1, -1)));
    Eigen::MatrixXd skew(2, 2);
    skew << 0, 1, 2, 0;
    CHECK_THROWS_AS(eigenvalues_dense(skew), DomainError);
    CHECK_THROWS_AS(eigenvalues_dense(Eigen::MatrixXd::Zero(3, 3), {.cap = 2}), DomainError);

    const auto pairs = eigenpairs_dense(MaxKernel<double>::from_max_law(Eigen::VectorXd::LinSpaced(50, 1, 50).cwiseInverse()).dense());
    CHECK(max_residual(MaxKernel<double>::from_max_law(Eigen::VectorXd::LinSpaced(50, 1, 50).cwiseInverse()).dense(),
                       pairs, 50) <= 1e-12);
}

TEST_CASE("max kernel operations agree with the dense matrix") {
    Eigen::VectorXd scale = Eigen::VectorXd::LinSpaced(30, 0.5, 2.0);
    Eigen::VectorXd off = Eigen::VectorXd::LinSpaced(30, 1.0, 30.0).cwiseInverse();
    Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(30, 0.1, 3.0);
    const MaxKernel<double> kernel(scale, off, diag);
    const Eigen::MatrixXd dense = kernel.dense();
    CHECK((dense - dense.transpose()).norm() == 0.0);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, -1.0, 1.0);
    CHECK((kernel * x - dense * x).norm() <= 1e-13);
    CHECK(kernel.trace() == doctest::Approx(dense.trace()));
    CHECK(kernel.frobenius_squared() == doctest::Approx(dense.squaredNorm()));
    const auto cut = kernel.truncated(5).dense();
    CHECK(cut.topRows(5).norm() == 0.0);
    CHECK(cut.leftCols(5).norm() == 0.0);
    CHECK((cut.bottomRightCorner(25, 25) - dense.bottomRightCorner(25, 25)).norm() == 0.0);
    CHECK(((2.0 * kernel).dense() - 2.0 * dense).norm() <= 1e-14);
}

TEST_CASE("Gauss-Legendre rule") {
    const GaussLegendre gl(12);
    CHECK(gl.integrate([](double x) { return std::pow(x, 23); }, 0.0, 1.0) == doctest::Approx(1.0 / 24).epsilon(1e-14));
    CHECK(gl.integrate([](double x) { return std::exp(x); }, 0.0, 2.0, 4) == doctest::Approx(std::exp(2.0) - 1).epsilon(1e-14));
}
