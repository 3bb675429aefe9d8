#pragma once

#include <Eigen/Core>

#include <cassert>

namespace wta {

/// Symmetric matrix whose off-diagonal entries depend only on the larger index:
///
///     S(i, j) = s_i * s_j * g(max(i, j))    for i != j
///     S(i, i) = d_i
///
/// The expected charge-flow kernels, the truncated operator M and the Nystrom
/// discretization of K all have this form. A product costs O(n) through one
/// prefix and one suffix sum, so Lanczos on n in the 10^4..10^5 range is cheap.
template <typename Scalar>
class MaxKernel {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Index = Eigen::Index;

    MaxKernel() = default;

    MaxKernel(Vector scale, Vector offdiag, Vector diag)
        : scale_(std::move(scale)), offdiag_(std::move(offdiag)), diag_(std::move(diag)) {
        assert(scale_.size() == offdiag_.size() && scale_.size() == diag_.size());
    }

    /// Unit scaling with the diagonal following the off-diagonal law, i.e. S(i,j) = g(max(i,j)).
    static MaxKernel from_max_law(const Vector& g) { return MaxKernel(Vector::Ones(g.size()), g, g); }

    Index size() const noexcept { return scale_.size(); }
    Index rows() const noexcept { return size(); }
    Index cols() const noexcept { return size(); }

    const Vector& scale() const noexcept { return scale_; }
    const Vector& offdiag() const noexcept { return offdiag_; }
    const Vector& diag() const noexcept { return diag_; }

    Scalar operator()(Index i, Index j) const {
        if (i == j) return diag_(i);
        return scale_(i) * scale_(j) * offdiag_(std::max(i, j));
    }

    template <typename In, typename Out>
    void apply(const Eigen::MatrixBase<In>& x, Eigen::MatrixBase<Out> const& y_) const {
        auto& y = const_cast<Eigen::MatrixBase<Out>&>(y_);
        const Index n = size();
        assert(x.size() == n);
        y.derived().resize(n);
        Scalar suffix = 0;
        for (Index i = n - 1; i >= 0; --i) {
            y(i) = suffix;  // sum_{j > i} g_j s_j x_j
            suffix += offdiag_(i) * scale_(i) * x(i);
        }
        Scalar prefix = 0;
        for (Index i = 0; i < n; ++i) {
            const Scalar sx = scale_(i) * x(i);
            y(i) = scale_(i) * (offdiag_(i) * prefix + y(i)) + diag_(i) * x(i);
            prefix += sx;
        }
    }

    Vector operator*(const Vector& x) const {
        Vector y(size());
        apply(x, y);
        return y;
    }

    Matrix dense() const {
        const Index n = size();
        Matrix out(n, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i) out(i, j) = (*this)(i, j);
        return out;
    }

    Scalar trace() const { return diag_.sum(); }

    /// Sum of squared entries, i.e. tr(S^2). O(n).
    Scalar frobenius_squared() const {
        Scalar total = diag_.squaredNorm();
        Scalar prefix = 0;  // sum_{j < i} s_j^2
        for (Index i = 0; i < size(); ++i) {
            total += 2 * scale_(i) * scale_(i) * offdiag_(i) * offdiag_(i) * prefix;
            prefix += scale_(i) * scale_(i);
        }
        return total;
    }

    /// Zero the first `count` rows and columns (dimension unchanged).
    MaxKernel truncated(Index count) const {
        MaxKernel out = *this;
        const Index r = std::min(count, size());
        out.scale_.head(r).setZero();
        out.diag_.head(r).setZero();
        return out;
    }

    MaxKernel& operator*=(Scalar factor) {
        offdiag_ *= factor;
        diag_ *= factor;
        return *this;
    }

private:
    Vector scale_;
    Vector offdiag_;
    Vector diag_;
};

template <typename Scalar>
MaxKernel<Scalar> operator*(Scalar factor, MaxKernel<Scalar> kernel) {
    kernel *= factor;
    return kernel;
}

} // namespace wta
