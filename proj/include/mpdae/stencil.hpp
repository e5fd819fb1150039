#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mpdae/error.hpp"
#include "mpdae/types.hpp"

namespace mpdae {

/// Periodic difference formula D_i(x) = (1/h) sum_{j=-q}^{p} alpha_j x_{i+j}.
/// coeffs[j + q] holds alpha_j.
template <typename Scalar>
struct DifferenceStencil
{
    std::vector<Scalar> coeffs;
    int q = 0;
    int p = 0;
    int order = 1;
    std::string name;

    Scalar alpha(int j) const { return coeffs[static_cast<std::size_t>(j + q)]; }
    int width() const { return p + q + 1; }

    Scalar coefficient_sum() const
    {
        Scalar s(0);
        for (const auto& c : coeffs)
            s += c;
        return s;
    }
};

template <typename Scalar = double>
DifferenceStencil<Scalar> bdf1()
{
    return {{Scalar(-1), Scalar(1)}, 1, 0, 1, "bdf1"};
}

template <typename Scalar = double>
DifferenceStencil<Scalar> bdf2()
{
    return {{Scalar(1) / Scalar(2), Scalar(-2), Scalar(3) / Scalar(2)}, 2, 0, 2, "bdf2"};
}

inline DifferenceStencil<double> stencil_by_name(const std::string& name)
{
    if (name == "bdf1")
        return bdf1();
    if (name == "bdf2")
        return bdf2();
    throw InvalidArgument("unknown stencil '" + name + "' (expected bdf1 or bdf2)");
}

/// Wrap a line index into {0, ..., m-1}.
inline int wrap_line(int i, int m)
{
    const int r = i % m;
    return r < 0 ? r + m : r;
}

/// Difference formula at line i (0-based) applied to all columns of a
/// line-major grid with m = lines.rows() and h = 1/m.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> apply(const DifferenceStencil<Scalar>& stencil,
                                               const Eigen::MatrixBase<Derived>& lines, int i)
{
    const int m = static_cast<int>(lines.rows());
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(lines.cols());
    for (int j = -stencil.q; j <= stencil.p; ++j)
        out += stencil.alpha(j) * lines.row(wrap_line(i + j, m));
    return out * Scalar(m);
}

/// Circulant matrix form S of a stencil on m lines, S(i, wrap(i+j)) = alpha_j / h.
template <typename Scalar>
class CirculantOperator
{
public:
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using LinesType = LineMatrix<Scalar>;

    CirculantOperator() = default;

    CirculantOperator(DifferenceStencil<Scalar> stencil, int m)
        : stencil_(std::move(stencil)), m_(m)
    {
        if (m <= stencil_.p + stencil_.q)
            throw InvalidArgument("circulant operator needs m > p + q, got m = " + std::to_string(m));
        inv_h_ = Scalar(m);
        S_ = MatrixType::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = -stencil_.q; j <= stencil_.p; ++j)
                S_(i, wrap_line(i + j, m)) += stencil_.alpha(j) * inv_h_;
    }

    int lines() const { return m_; }
    Scalar h() const { return Scalar(1) / inv_h_; }
    const DifferenceStencil<Scalar>& stencil() const { return stencil_; }
    const MatrixType& matrix() const { return S_; }

    /// All D_i at once: row i of the result is D_i(lines).
    template <typename Derived>
    LinesType apply(const Eigen::MatrixBase<Derived>& lines) const
    {
        LinesType out = LinesType::Zero(m_, lines.cols());
        for (int i = 0; i < m_; ++i)
            for (int j = -stencil_.q; j <= stencil_.p; ++j)
                out.row(i) += (stencil_.alpha(j) * inv_h_) * lines.row(wrap_line(i + j, m_));
        return out;
    }

    /// S^T applied line-wise.
    template <typename Derived>
    LinesType apply_transpose(const Eigen::MatrixBase<Derived>& lines) const
    {
        LinesType out = LinesType::Zero(m_, lines.cols());
        for (int i = 0; i < m_; ++i)
            for (int j = -stencil_.q; j <= stencil_.p; ++j)
                out.row(wrap_line(i + j, m_)) += (stencil_.alpha(j) * inv_h_) * lines.row(i);
        return out;
    }

    /// S (x) I_n for the line-major, component-minor layout. Materialised on demand.
    MatrixType lifted(int n) const
    {
        MatrixType L = MatrixType::Zero(m_ * n, m_ * n);
        for (int i = 0; i < m_; ++i)
            for (int k = 0; k < m_; ++k)
                if (S_(i, k) != Scalar(0))
                    L.block(i * n, k * n, n, n).diagonal().setConstant(S_(i, k));
        return L;
    }

private:
    DifferenceStencil<Scalar> stencil_;
    int m_ = 0;
    Scalar inv_h_ = Scalar(0);
    MatrixType S_;
};

template <typename Scalar>
CirculantOperator<Scalar> build_matrix(const DifferenceStencil<Scalar>& stencil, int m)
{
    return CirculantOperator<Scalar>(stencil, m);
}

} // namespace mpdae
