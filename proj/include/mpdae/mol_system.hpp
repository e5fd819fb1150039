#pragma once

#include <functional>
#include <string>

#include "mpdae/model.hpp"
#include "mpdae/stencil.hpp"
#include "mpdae/types.hpp"

namespace mpdae {

/// Unknown of the semi-discretised system: x1 stacks the differential lines,
/// x2 the algebraic lines (both line-major, component-minor), nu is the local
/// frequency. The same type carries velocities.
struct GridState
{
    int m = 0;
    int n_y = 0;
    int n_z = 0;
    Vector x1;
    Vector x2;
    double nu = 0.0;

    static GridState zeros(int m, int n_y, int n_z);

    int n1() const { return m * n_y; }
    int n2() const { return m * n_z; }
    int n_bar() const { return n1() + n2() + 1; }

    Eigen::Map<Lines> y_lines() { return {x1.data(), m, n_y}; }
    Eigen::Map<const Lines> y_lines() const { return {x1.data(), m, n_y}; }
    Eigen::Map<Lines> z_lines() { return {x2.data(), m, n_z}; }
    Eigen::Map<const Lines> z_lines() const { return {x2.data(), m, n_z}; }

    auto y_line(int i) { return x1.segment(i * n_y, n_y); }
    auto y_line(int i) const { return x1.segment(i * n_y, n_y); }
    auto z_line(int i) { return x2.segment(i * n_z, n_z); }
    auto z_line(int i) const { return x2.segment(i * n_z, n_z); }

    /// (x1, x2, nu) as one vector of length n_bar.
    Vector stacked() const;
    static GridState from_stacked(const Vector& v, int m, int n_y, int n_z);

    bool same_shape(const GridState& other) const
    {
        return m == other.m && n_y == other.n_y && n_z == other.n_z;
    }
};

/// Slowly varying scalar function with its first two derivatives.
struct SlowFunction
{
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;

    static SlowFunction constant(double v);
};

enum class CouplingKind
{
    PhaseDifferential,
    PhaseAlgebraic,
    Optimality,
};

std::string to_string(CouplingKind kind);

/// Equation closing the system for nu: a phase condition pinning one
/// component on the t2 = 0 line, or the discretised optimality condition.
class CouplingCondition
{
public:
    static CouplingCondition phase_differential(int component, SlowFunction eta = SlowFunction::constant(0.0));
    static CouplingCondition phase_algebraic(int component, SlowFunction eta = SlowFunction::constant(0.0));
    /// Weights must be non-negative with at least one positive entry.
    static CouplingCondition optimality(Vector w_y, Vector w_z);

    CouplingKind kind() const { return kind_; }
    bool is_phase() const { return kind_ != CouplingKind::Optimality; }
    /// 0-based component within y (PhaseDifferential) or z (PhaseAlgebraic).
    int component() const { return component_; }
    const SlowFunction& eta() const { return eta_; }
    const Vector& w_y() const { return w_y_; }
    const Vector& w_z() const { return w_z_; }

    std::string describe() const;

private:
    CouplingKind kind_ = CouplingKind::Optimality;
    int component_ = 0;
    SlowFunction eta_;
    Vector w_y_;
    Vector w_z_;
};

/// Method-of-lines system
///     x1' = f(t, y_i, z_i) - nu D_i(y)      (per line)
///       0 = g(t, y_i, z_i)                  (per line)
///       0 = f3                               (coupling)
class MolSystem
{
public:
    MolSystem(SemiExplicitModel model, DifferenceStencil<double> stencil, int m, CouplingCondition coupling);

    const SemiExplicitModel& model() const { return model_; }
    const CirculantOperator<double>& op() const { return op_; }
    const CouplingCondition& coupling() const { return coupling_; }
    int m() const { return op_.lines(); }
    int n_y() const { return model_.n_y; }
    int n_z() const { return model_.n_z; }
    int n1() const { return m() * n_y(); }
    int n2() const { return m() * n_z(); }
    int n_bar() const { return n1() + n2() + 1; }
    double h() const { return op_.h(); }

    GridState zero_state() const { return GridState::zeros(m(), n_y(), n_z()); }
    void check_shape(const GridState& s, const char* what) const;

private:
    SemiExplicitModel model_;
    CirculantOperator<double> op_;
    CouplingCondition coupling_;
};

/// First-order blocks at one (t, x, x') point. f1 denotes the right-hand side
/// of the differential rows, so the residual rows read x1' - f1.
struct JacobianBlocks
{
    CouplingKind kind = CouplingKind::Optimality;
    int n1 = 0;
    int n2 = 0;

    Matrix df1_dx1;  // blockdiag(df/dy) - nu S1
    Matrix df1_dx2;  // blockdiag(df/dz)
    Vector F13;      // df1/dnu = -S1 x1
    Matrix df2_dx1;  // blockdiag(dg/dy)
    Matrix df2_dx2;  // blockdiag(dg/dz)
    RowVector F31;   // phase: selector of the pinned y; optimality: (W1 S1 x1)^T
    RowVector F32;   // phase: selector of the pinned z; optimality: (W2 S2 x2)^T
    RowVector df3_dx1;
    RowVector df3_dx2;

    /// d/dt F13 = -S1 x1'. Enters the derivative array only through the
    /// nu column of the differentiated differential rows.
    Vector F13_rate;
    /// Partial derivatives of d/dt f3 with respect to x1', x2'.
    RowVector df3hat_dxdot1;
    RowVector df3hat_dxdot2;

    /// df3/dx1' and df3/dx2' (zero rows for phase conditions).
    RowVector df3_dxdot1() const;
    RowVector df3_dxdot2() const;
};

Vector residual(const MolSystem& sys, double t, const GridState& state, const GridState& xdot);

JacobianBlocks jacobian_blocks(const MolSystem& sys, double t, const GridState& state, const GridState& xdot);

/// dF/dx and dF/dx' of the residual as dense n_bar x n_bar matrices.
Matrix residual_dx(const JacobianBlocks& blocks);
Matrix residual_dxdot(const JacobianBlocks& blocks);

/// Mass matrix of the quasi-linear form M(x) x' = rhs: identity on the
/// differential rows, zero algebraic rows, coupling row (F31, F32, 0) for the
/// optimality condition and zero for phase conditions. Last column is zero.
Matrix mass_matrix(const MolSystem& sys, const GridState& state);

/// Residual blocks measured relative to the magnitude of their terms.
struct ResidualCheck
{
    double differential = 0.0;
    double algebraic = 0.0;
    double coupling = 0.0;
    double worst() const;
};

ResidualCheck check_residual(const MolSystem& sys, double t, const GridState& state, const GridState& xdot);

/// Line-wise f and g evaluations, stacked.
Vector stacked_f(const MolSystem& sys, double t, const GridState& state);
Vector stacked_g(const MolSystem& sys, double t, const GridState& state);

} // namespace mpdae
