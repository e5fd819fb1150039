#include "mpdae/mol_system.hpp"

#include <algorithm>
#include <cmath>

#include "mpdae/error.hpp"

namespace mpdae {

GridState GridState::zeros(int m, int n_y, int n_z)
{
    GridState s;
    s.m = m;
    s.n_y = n_y;
    s.n_z = n_z;
    s.x1 = Vector::Zero(m * n_y);
    s.x2 = Vector::Zero(m * n_z);
    s.nu = 0.0;
    return s;
}

Vector GridState::stacked() const
{
    Vector v(n_bar());
    v << x1, x2, nu;
    return v;
}

GridState GridState::from_stacked(const Vector& v, int m, int n_y, int n_z)
{
    GridState s = zeros(m, n_y, n_z);
    if (v.size() != s.n_bar())
        throw InvalidArgument("stacked vector has length " + std::to_string(v.size()) + ", expected " +
                              std::to_string(s.n_bar()));
    s.x1 = v.head(s.n1());
    s.x2 = v.segment(s.n1(), s.n2());
    s.nu = v(s.n_bar() - 1);
    return s;
}

SlowFunction SlowFunction::constant(double v)
{
    return {[v](double) { return v; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

std::string to_string(CouplingKind kind)
{
    switch (kind) {
    case CouplingKind::PhaseDifferential:
        return "phase_differential";
    case CouplingKind::PhaseAlgebraic:
        return "phase_algebraic";
    case CouplingKind::Optimality:
        return "optimality";
    }
    return "unknown";
}

CouplingCondition CouplingCondition::phase_differential(int component, SlowFunction eta)
{
    if (component < 0)
        throw InvalidArgument("phase component must be non-negative");
    CouplingCondition c;
    c.kind_ = CouplingKind::PhaseDifferential;
    c.component_ = component;
    c.eta_ = std::move(eta);
    return c;
}

CouplingCondition CouplingCondition::phase_algebraic(int component, SlowFunction eta)
{
    if (component < 0)
        throw InvalidArgument("phase component must be non-negative");
    CouplingCondition c;
    c.kind_ = CouplingKind::PhaseAlgebraic;
    c.component_ = component;
    c.eta_ = std::move(eta);
    return c;
}

CouplingCondition CouplingCondition::optimality(Vector w_y, Vector w_z)
{
    if ((w_y.array() < 0.0).any() || (w_z.array() < 0.0).any())
        throw InvalidArgument("optimality weights must be non-negative");
    if (!((w_y.array() > 0.0).any() || (w_z.array() > 0.0).any()))
        throw InvalidArgument("optimality condition needs at least one positive weight");
    CouplingCondition c;
    c.kind_ = CouplingKind::Optimality;
    c.w_y_ = std::move(w_y);
    c.w_z_ = std::move(w_z);
    return c;
}

std::string CouplingCondition::describe() const
{
    auto join = [](const Vector& v) {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (i)
                s += ',';
            s += std::to_string(v(i));
        }
        return s;
    };
    switch (kind_) {
    case CouplingKind::PhaseDifferential:
        return "phase on y[" + std::to_string(component_ + 1) + "]";
    case CouplingKind::PhaseAlgebraic:
        return "phase on z[" + std::to_string(component_ + 1) + "]";
    case CouplingKind::Optimality:
        return "optimality w_y=(" + join(w_y_) + ") w_z=(" + join(w_z_) + ")";
    }
    return {};
}

MolSystem::MolSystem(SemiExplicitModel model, DifferenceStencil<double> stencil, int m,
                     CouplingCondition coupling)
    : model_(std::move(model)), op_(std::move(stencil), m), coupling_(std::move(coupling))
{
    model_.validate();
    switch (coupling_.kind()) {
    case CouplingKind::PhaseDifferential:
        if (coupling_.component() >= model_.n_y)
            throw InvalidArgument("phase component exceeds n_y");
        break;
    case CouplingKind::PhaseAlgebraic:
        if (coupling_.component() >= model_.n_z)
            throw InvalidArgument("phase component exceeds n_z");
        break;
    case CouplingKind::Optimality:
        if (coupling_.w_y().size() != model_.n_y || coupling_.w_z().size() != model_.n_z)
            throw InvalidArgument("optimality weight vectors must have lengths n_y and n_z");
        break;
    }
}

void MolSystem::check_shape(const GridState& s, const char* what) const
{
    if (s.m != m() || s.n_y != n_y() || s.n_z != n_z() || s.x1.size() != n1() || s.x2.size() != n2())
        throw InvalidArgument(std::string(what) + ": grid state does not match the system dimensions");
}

Vector stacked_f(const MolSystem& sys, double t, const GridState& state)
{
    Vector out(sys.n1());
    for (int i = 0; i < sys.m(); ++i)
        out.segment(i * sys.n_y(), sys.n_y()) = sys.model().f(t, state.y_line(i), state.z_line(i));
    return out;
}

Vector stacked_g(const MolSystem& sys, double t, const GridState& state)
{
    Vector out(sys.n2());
    for (int i = 0; i < sys.m(); ++i)
        out.segment(i * sys.n_z(), sys.n_z()) = sys.model().g(t, state.y_line(i), state.z_line(i));
    return out;
}

namespace {

/// sum_i sum_l w_l a_{i,l} b_{i,l}, accumulated in fixed line order.
double weighted_sum(const Eigen::Map<const Lines>& a, const Lines& b, const Vector& w)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index l = 0; l < a.cols(); ++l)
            s += w(l) * a(i, l) * b(i, l);
    return s;
}

Vector flatten(const Lines& lines)
{
    return Eigen::Map<const Vector>(lines.data(), lines.size());
}

Vector line_weights(const Vector& w, int m)
{
    return w.replicate(m, 1);
}

} // namespace

Vector residual(const MolSystem& sys, double t, const GridState& state, const GridState& xdot)
{
    sys.check_shape(state, "residual");
    sys.check_shape(xdot, "residual (velocity)");
    const int n1 = sys.n1(), n2 = sys.n2();
    Vector r(sys.n_bar());

    const Lines Dy = sys.op().apply(state.y_lines());
    r.head(n1) = xdot.x1 - (stacked_f(sys, t, state) - state.nu * flatten(Dy));
    r.segment(n1, n2) = stacked_g(sys, t, state);

    const auto& c = sys.coupling();
    switch (c.kind()) {
    case CouplingKind::PhaseDifferential:
        r(n1 + n2) = state.y_line(0)(c.component()) - c.eta().value(t);
        break;
    case CouplingKind::PhaseAlgebraic:
        r(n1 + n2) = state.z_line(0)(c.component()) - c.eta().value(t);
        break;
    case CouplingKind::Optimality: {
        const Lines Dz = sys.op().apply(state.z_lines());
        r(n1 + n2) = weighted_sum(xdot.y_lines(), Dy, c.w_y()) + weighted_sum(xdot.z_lines(), Dz, c.w_z());
        break;
    }
    }
    return r;
}

RowVector JacobianBlocks::df3_dxdot1() const
{
    if (kind == CouplingKind::Optimality)
        return F31;
    return RowVector::Zero(n1);
}

RowVector JacobianBlocks::df3_dxdot2() const
{
    if (kind == CouplingKind::Optimality)
        return F32;
    return RowVector::Zero(n2);
}

JacobianBlocks jacobian_blocks(const MolSystem& sys, double t, const GridState& state, const GridState& xdot)
{
    sys.check_shape(state, "jacobian_blocks");
    sys.check_shape(xdot, "jacobian_blocks (velocity)");
    const int m = sys.m(), ny = sys.n_y(), nz = sys.n_z();
    const int n1 = sys.n1(), n2 = sys.n2();
    const auto& model = sys.model();
    const auto& op = sys.op();

    JacobianBlocks b;
    b.kind = sys.coupling().kind();
    b.n1 = n1;
    b.n2 = n2;
    b.df1_dx1 = Matrix::Zero(n1, n1);
    b.df1_dx2 = Matrix::Zero(n1, n2);
    b.df2_dx1 = Matrix::Zero(n2, n1);
    b.df2_dx2 = Matrix::Zero(n2, n2);

    for (int i = 0; i < m; ++i) {
        const Vector y = state.y_line(i);
        const Vector z = state.z_line(i);
        b.df1_dx1.block(i * ny, i * ny, ny, ny) = model.df_dy(t, y, z);
        b.df1_dx2.block(i * ny, i * nz, ny, nz) = model.df_dz(t, y, z);
        b.df2_dx1.block(i * nz, i * ny, nz, ny) = model.dg_dy(t, y, z);
        b.df2_dx2.block(i * nz, i * nz, nz, nz) = model.dg_dz(t, y, z);
    }
    // - nu S1: S1(i*ny + l, k*ny + l) = S(i, k)
    const auto& S = op.matrix();
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            if (S(i, k) != 0.0)
                for (int l = 0; l < ny; ++l)
                    b.df1_dx1(i * ny + l, k * ny + l) -= state.nu * S(i, k);

    const Lines Dy = op.apply(state.y_lines());
    b.F13 = -flatten(Dy);
    b.F13_rate = -flatten(op.apply(xdot.y_lines()));

    b.F31 = RowVector::Zero(n1);
    b.F32 = RowVector::Zero(n2);
    b.df3hat_dxdot1 = RowVector::Zero(n1);
    b.df3hat_dxdot2 = RowVector::Zero(n2);

    const auto& c = sys.coupling();
    switch (c.kind()) {
    case CouplingKind::PhaseDifferential:
        b.F31(c.component()) = 1.0;
        b.df3_dx1 = b.F31;
        b.df3_dx2 = b.F32;
        b.df3hat_dxdot1 = b.F31;
        break;
    case CouplingKind::PhaseAlgebraic:
        b.F32(c.component()) = 1.0;
        b.df3_dx1 = b.F31;
        b.df3_dx2 = b.F32;
        b.df3hat_dxdot2 = b.F32;
        break;
    case CouplingKind::Optimality: {
        const Vector w1 = line_weights(c.w_y(), m);
        const Vector w2 = line_weights(c.w_z(), m);
        const Lines Dz = op.apply(state.z_lines());
        b.F31 = (w1.array() * flatten(Dy).array()).matrix().transpose();
        b.F32 = (w2.array() * flatten(Dz).array()).matrix().transpose();

        // f3 = x1'^T W1 S1 x1 + x2'^T W2 S2 x2
        const Lines w1_ydot = (xdot.y_lines().array().rowwise() * c.w_y().transpose().array()).matrix();
        const Lines w2_zdot = (xdot.z_lines().array().rowwise() * c.w_z().transpose().array()).matrix();
        const Vector gy = flatten(op.apply_transpose(w1_ydot));  // S1^T W1 x1'
        const Vector gz = flatten(op.apply_transpose(w2_zdot));
        b.df3_dx1 = gy.transpose();
        b.df3_dx2 = gz.transpose();

        // d/dt f3 contains x1'^T W1 S1 x1', whose gradient is (W1 S1 + S1^T W1) x1'
        const Vector w1_S_ydot = w1.array() * flatten(op.apply(xdot.y_lines())).array();
        const Vector w2_S_zdot = w2.array() * flatten(op.apply(xdot.z_lines())).array();
        b.df3hat_dxdot1 = (gy + w1_S_ydot).transpose();
        b.df3hat_dxdot2 = (gz + w2_S_zdot).transpose();
        break;
    }
    }
    return b;
}

Matrix residual_dx(const JacobianBlocks& b)
{
    const int n1 = b.n1, n2 = b.n2, nb = n1 + n2 + 1;
    Matrix J = Matrix::Zero(nb, nb);
    J.block(0, 0, n1, n1) = -b.df1_dx1;
    J.block(0, n1, n1, n2) = -b.df1_dx2;
    J.block(0, n1 + n2, n1, 1) = -b.F13;
    J.block(n1, 0, n2, n1) = b.df2_dx1;
    J.block(n1, n1, n2, n2) = b.df2_dx2;
    J.block(n1 + n2, 0, 1, n1) = b.df3_dx1;
    J.block(n1 + n2, n1, 1, n2) = b.df3_dx2;
    return J;
}

Matrix residual_dxdot(const JacobianBlocks& b)
{
    const int n1 = b.n1, n2 = b.n2, nb = n1 + n2 + 1;
    Matrix A = Matrix::Zero(nb, nb);
    A.block(0, 0, n1, n1).setIdentity();
    A.block(n1 + n2, 0, 1, n1) = b.df3_dxdot1();
    A.block(n1 + n2, n1, 1, n2) = b.df3_dxdot2();
    return A;
}

Matrix mass_matrix(const MolSystem& sys, const GridState& state)
{
    sys.check_shape(state, "mass_matrix");
    const int n1 = sys.n1(), n2 = sys.n2(), nb = sys.n_bar();
    Matrix M = Matrix::Zero(nb, nb);
    M.block(0, 0, n1, n1).setIdentity();
    const auto& c = sys.coupling();
    if (c.kind() == CouplingKind::Optimality) {
        const Vector w1 = line_weights(c.w_y(), sys.m());
        const Vector w2 = line_weights(c.w_z(), sys.m());
        M.block(nb - 1, 0, 1, n1) =
            (w1.array() * flatten(sys.op().apply(state.y_lines())).array()).matrix().transpose();
        M.block(nb - 1, n1, 1, n2) =
            (w2.array() * flatten(sys.op().apply(state.z_lines())).array()).matrix().transpose();
    }
    return M;
}

double ResidualCheck::worst() const
{
    return std::max({differential, algebraic, coupling});
}

ResidualCheck check_residual(const MolSystem& sys, double t, const GridState& state, const GridState& xdot)
{
    const Vector r = residual(sys, t, state, xdot);
    const int n1 = sys.n1(), n2 = sys.n2();
    ResidualCheck out;

    const Vector f = stacked_f(sys, t, state);
    const Vector nuD = state.nu * flatten(sys.op().apply(state.y_lines()));
    const double dscale =
        1.0 + std::max({xdot.x1.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff(), nuD.cwiseAbs().maxCoeff()});
    out.differential = r.head(n1).cwiseAbs().maxCoeff() / dscale;
    out.algebraic = r.segment(n1, n2).cwiseAbs().maxCoeff();

    const auto& c = sys.coupling();
    if (c.kind() == CouplingKind::Optimality) {
        const Lines Dy = sys.op().apply(state.y_lines());
        const Lines Dz = sys.op().apply(state.z_lines());
        double terms = 0.0;
        for (int i = 0; i < sys.m(); ++i) {
            for (int l = 0; l < sys.n_y(); ++l)
                terms += c.w_y()(l) * std::abs(xdot.y_lines()(i, l) * Dy(i, l));
            for (int l = 0; l < sys.n_z(); ++l)
                terms += c.w_z()(l) * std::abs(xdot.z_lines()(i, l) * Dz(i, l));
        }
        out.coupling = std::abs(r(n1 + n2)) / (1.0 + terms);
    } else {
        out.coupling = std::abs(r(n1 + n2));
    }
    return out;
}

} // namespace mpdae
