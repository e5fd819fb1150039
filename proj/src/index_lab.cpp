#include "mpdae/index_lab.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mpdae/csv.hpp"
#include "mpdae/error.hpp"

namespace mpdae {

namespace {

/// Orthogonal projector onto range(F32^T); zero when F32 vanishes.
Matrix range_projector(const RowVector& F)
{
    const double nn = F.squaredNorm();
    if (nn == 0.0)
        return Matrix::Zero(F.size(), F.size());
    return F.transpose() * F / nn;
}

int numerical_rank(const Vector& sv, double threshold)
{
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > threshold)
            ++r;
    return r;
}

bool in_fragile_band(const Vector& sv, double smax)
{
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= 1e-12 * smax && sv(i) <= 1e-8 * smax)
            return true;
    return false;
}

bool criterion_nonzero(double c, double scale, double tol)
{
    return std::abs(c) > 100.0 * tol * scale;
}

} // namespace

Matrix equilibrate(const Matrix& B, int sweeps, Vector* col_scale)
{
    Matrix A = B;
    Vector cs = Vector::Ones(B.cols());
    for (int s = 0; s < sweeps; ++s) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double r = A.row(i).cwiseAbs().maxCoeff();
            if (r > 0.0)
                A.row(i) /= std::sqrt(r);
        }
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            const double c = A.col(j).cwiseAbs().maxCoeff();
            if (c > 0.0) {
                A.col(j) /= std::sqrt(c);
                cs(j) /= std::sqrt(c);
            }
        }
    }
    if (col_scale)
        *col_scale = cs;
    return A;
}

double IndexReport::active_criterion() const
{
    switch (kind) {
    case CouplingKind::PhaseDifferential:
        return c1;
    case CouplingKind::PhaseAlgebraic:
        return phase_algebraic_criterion;
    case CouplingKind::Optimality:
        return b1.is_one_full || scalar_index == 1 ? c1 : c2;
    }
    return c1;
}

Matrix build_B1(const JacobianBlocks& b)
{
    const int n1 = b.n1, n2 = b.n2, nb = n1 + n2 + 1;
    Matrix B = Matrix::Zero(2 * nb, 2 * nb);
    B.block(0, 0, n1, n1).setIdentity();
    if (b.kind == CouplingKind::Optimality)
        B.block(n1, n1, n2, n2) = range_projector(b.F32);
    B.block(nb, 0, nb, nb) = residual_dx(b);
    B.block(nb, nb, nb, nb) = residual_dxdot(b);
    return B;
}

Matrix build_B2_reduced(const JacobianBlocks& b)
{
    const int n1 = b.n1, n2 = b.n2, nb = n1 + n2 + 1;
    const bool opt = b.kind == CouplingKind::Optimality;
    const int rows = n1 + n2 + n1 + (opt ? 1 : 0) + n1 + n2 + 1;
    Matrix B = Matrix::Zero(rows, 3 * nb);
    const int nu = n1 + n2;
    int r = 0;

    // x1' = 0 and x2' = 0 on the kernel
    B.block(r, 0, n1, n1).setIdentity();
    r += n1;
    B.block(r, n1, n2, n2).setIdentity();
    r += n2;

    // differentiated differential rows: x1'' - F13 nu'
    B.block(r, nu, n1, 1) = -b.F13;
    B.block(r, nb, n1, n1).setIdentity();
    r += n1;

    if (opt) {
        B.block(r, nb, 1, n1) = b.F31;
        B.block(r, nb + n1, 1, n2) = b.F32;
        ++r;
    }

    // twice differentiated differential rows
    B.block(r, nu, n1, 1) = -b.F13_rate;
    B.block(r, nb, n1, n1) = -b.df1_dx1;
    B.block(r, nb + n1, n1, n2) = -b.df1_dx2;
    B.block(r, nb + nu, n1, 1) = -b.F13;
    B.block(r, 2 * nb, n1, n1).setIdentity();
    r += n1;

    // twice differentiated constraints
    B.block(r, nb, n2, n1) = b.df2_dx1;
    B.block(r, nb + n1, n2, n2) = b.df2_dx2;
    r += n2;

    // differentiated coupling row
    if (opt) {
        B.block(r, nb, 1, n1) = b.df3hat_dxdot1;
        B.block(r, nb + n1, 1, n2) = b.df3hat_dxdot2;
        B.block(r, 2 * nb, 1, n1) = b.F31;
        B.block(r, 2 * nb + n1, 1, n2) = b.F32;
    } else {
        B.block(r, nb, 1, n1) = b.F31;
        B.block(r, nb + n1, 1, n2) = b.F32;
    }
    return B;
}

OneFullnessResult check_one_full(const Matrix& B_in, int n_bar, double tol, bool scale)
{
    if (n_bar < 1 || B_in.cols() < n_bar)
        throw InvalidArgument("1-fullness test needs at least n_bar columns");
    OneFullnessResult out;
    out.n_bar = n_bar;
    out.tol = tol;

    const Matrix B = scale ? equilibrate(B_in) : B_in;
    Eigen::BDCSVD<Matrix> svd(B);
    out.singular_values = svd.singularValues();
    const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
    const double threshold = tol * smax;
    out.rank_full = numerical_rank(out.singular_values, threshold);

    const Matrix tail = B.rightCols(B.cols() - n_bar);
    if (tail.cols() > 0) {
        Eigen::BDCSVD<Matrix> svd_tail(tail);
        out.singular_values_tail = svd_tail.singularValues();
        out.rank_tail = numerical_rank(out.singular_values_tail, threshold);
    }
    out.is_one_full = out.rank_full == out.rank_tail + n_bar;
    out.fragile = smax > 0.0 && (in_fragile_band(out.singular_values, smax) ||
                                 in_fragile_band(out.singular_values_tail, smax));
    return out;
}

void scalar_criteria(const JacobianBlocks& b, double tol, IndexReport& rep)
{
    rep.kind = b.kind;
    rep.c1 = b.F31.dot(b.F13);
    const Eigen::PartialPivLU<Matrix> lu(b.df2_dx2);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
        throw SingularConstraintJacobian("index analysis: df2/dx2 is singular");
    const Vector w = lu.solve(b.df2_dx1 * b.F13);
    const double tail = b.F32.dot(w);
    rep.c2 = rep.c1 - tail;
    rep.phase_algebraic_criterion = tail;

    const double s1 = b.F31.norm() * b.F13.norm();
    const double s2 = b.F32.norm() * w.norm();
    switch (b.kind) {
    case CouplingKind::PhaseDifferential:
        rep.criterion_scale = s1;
        rep.scalar_index = criterion_nonzero(rep.c1, s1, tol) ? 2 : 3;
        break;
    case CouplingKind::PhaseAlgebraic:
        rep.criterion_scale = s2;
        rep.scalar_index = criterion_nonzero(tail, s2, tol) ? 2 : 3;
        break;
    case CouplingKind::Optimality: {
        const bool f32_zero = b.F32.cwiseAbs().maxCoeff() <= tol * b.F31.cwiseAbs().maxCoeff();
        if (f32_zero) {
            rep.criterion_scale = s1;
            rep.scalar_index = criterion_nonzero(rep.c1, s1, tol) ? 1 : 3;
        } else {
            rep.criterion_scale = s1 + s2;
            rep.scalar_index = criterion_nonzero(rep.c2, s1 + s2, tol) ? 2 : 3;
        }
        break;
    }
    }
}

IndexReport analyse_blocks(const JacobianBlocks& b, double tol, bool with_projector)
{
    IndexReport rep;
    rep.rank_tol = tol;
    rep.n_bar = b.n1 + b.n2 + 1;
    const int nb = rep.n_bar;
    scalar_criteria(b, tol, rep);

    const Matrix B1 = build_B1(b);
    rep.b1 = check_one_full(B1, nb, tol);
    if (rep.b1.is_one_full) {
        rep.index = 1;
    } else {
        rep.b2 = check_one_full(build_B2_reduced(b), nb, tol);
        rep.b2_evaluated = true;
        rep.index = rep.b2.is_one_full ? 2 : 3;
    }
    rep.fragile = rep.b1.fragile || (rep.b2_evaluated && rep.b2.fragile);
    rep.consistent = rep.index == rep.scalar_index;

    rep.T = Matrix::Zero(nb, nb);
    if (with_projector && !rep.b1.is_one_full) {
        // ker B1 = diag(cs) ker(equilibrated B1)
        Vector cs;
        const Matrix B1e = equilibrate(B1, 8, &cs);
        Eigen::BDCSVD<Matrix> svd(B1e, Eigen::ComputeFullV);
        const Vector& sv = svd.singularValues();
        const double threshold = tol * (sv.size() ? sv(0) : 0.0);
        const int rank = numerical_rank(sv, threshold);
        const Matrix K = cs.head(nb).asDiagonal() * svd.matrixV().rightCols(B1.cols() - rank).topRows(nb);
        if (K.cols() > 0) {
            Eigen::BDCSVD<Matrix> ksvd(K, Eigen::ComputeThinU);
            const Vector& ks = ksvd.singularValues();
            const int kr = ks.size() ? numerical_rank(ks, 1e-8 * std::max(ks(0), 1e-300)) : 0;
            const Matrix U = ksvd.matrixU().leftCols(kr);
            rep.T = U * U.transpose();
            rep.T_rank = kr;
        }
    }
    return rep;
}

IndexReport determine_index(const MolSystem& sys, double t, const GridState& state, const GridState& velocity,
                            double tol)
{
    const ResidualCheck rc = check_residual(sys, t, state, velocity);
    if (!(rc.worst() <= 1e-8))
        throw InconsistentPoint("index analysis needs a consistent point (residual " + std::to_string(rc.worst()) +
                                ")");
    return analyse_blocks(jacobian_blocks(sys, t, state, velocity), tol);
}

QuadraticIdentity verify_quadratic_identity(const CirculantOperator<double>& op, const LinearConstraints& lc,
                                            const Lines& y, const Lines& z, const Vector& w_y, const Vector& w_z)
{
    const int m = op.lines();
    const int ny = static_cast<int>(lc.G_y.cols()), nz = static_cast<int>(lc.G_z.cols());
    if (y.rows() != m || z.rows() != m || y.cols() != ny || z.cols() != nz || w_y.size() != ny || w_z.size() != nz)
        throw InvalidArgument("quadratic identity: inconsistent dimensions");

    const Lines Dy = op.apply(y);
    const Lines Dz = op.apply(z);
    const Eigen::PartialPivLU<Matrix> lu(lc.G_z);

    // c2 = F31 F13 - F32 (df2/dx2)^{-1} (df2/dx1) F13, line by line
    double c2 = 0.0, q = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vector d1 = Dy.row(i).transpose();
        const Vector d2 = Dz.row(i).transpose();
        const Vector F31 = w_y.cwiseProduct(d1);
        const Vector F32 = w_z.cwiseProduct(d2);
        c2 += F31.dot(-d1) - F32.dot(lu.solve(lc.G_y * (-d1)));
        q -= d1.dot(w_y.cwiseProduct(d1)) + d2.dot(w_z.cwiseProduct(d2));
    }
    QuadraticIdentity out;
    out.c2 = c2;
    out.quadratic_form = q;
    const double scale = std::max(std::abs(c2), std::abs(q));
    out.deviation = scale > 0.0 ? std::abs(c2 - q) / scale : 0.0;
    return out;
}

QuadraticIdentity verify_quadratic_identity(const MolSystem& sys, const GridState& state)
{
    const auto& model = sys.model();
    if (!model.linear_constraints)
        throw InvalidArgument("quadratic identity needs a model with linear constraints");
    if (sys.coupling().kind() != CouplingKind::Optimality)
        throw InvalidArgument("quadratic identity is stated for the optimality condition");
    sys.check_shape(state, "verify_quadratic_identity");
    const Vector g = stacked_g(sys, 0.0, state);
    const double scale = 1.0 + state.x1.cwiseAbs().maxCoeff() + state.x2.cwiseAbs().maxCoeff();
    if (!(g.cwiseAbs().maxCoeff() <= 1e-10 * scale))
        throw InconsistentPoint("quadratic identity: grid does not satisfy the linear constraint");
    return verify_quadratic_identity(sys.op(), *model.linear_constraints, state.y_lines(), state.z_lines(),
                                     sys.coupling().w_y(), sys.coupling().w_z());
}

double rank_tolerance_from_env()
{
    const char* env = std::getenv("MPDAE_RANK_TOL");
    if (!env || !*env)
        return default_rank_tol;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || !(v < 1.0))
        throw InvalidArgument(std::string("MPDAE_RANK_TOL must be a number in (0, 1), got '") + env + "'");
    return v;
}

std::string format_report(const IndexReport& r)
{
    std::ostringstream os;
    os << "index: " << (r.index == 3 ? std::string(">2 or undefined") : std::to_string(r.index)) << '\n';
    os << "coupling: " << to_string(r.kind) << '\n';
    os << "n_bar: " << r.n_bar << '\n';
    os << "rank_tol: " << format_double(r.rank_tol) << '\n';
    os << "c1: " << format_double(r.c1) << '\n';
    os << "c2: " << format_double(r.c2) << '\n';
    os << "phase_algebraic_criterion: " << format_double(r.phase_algebraic_criterion) << '\n';
    os << "criterion_scale: " << format_double(r.criterion_scale) << '\n';
    os << "scalar_index: " << r.scalar_index << '\n';
    os << "B1_rank: " << r.b1.rank_full << '\n';
    os << "B1_rank_tail: " << r.b1.rank_tail << '\n';
    os << "B1_one_full: " << (r.b1.is_one_full ? "true" : "false") << '\n';
    if (r.b2_evaluated) {
        os << "B2_rank: " << r.b2.rank_full << '\n';
        os << "B2_rank_tail: " << r.b2.rank_tail << '\n';
        os << "B2_one_full: " << (r.b2.is_one_full ? "true" : "false") << '\n';
    }
    os << "T_rank: " << r.T_rank << '\n';
    if (r.T.size())
        os << "T_nu_entry: " << format_double(r.T(r.n_bar - 1, r.n_bar - 1)) << '\n';
    os << "rank_fragile: " << (r.fragile ? "true" : "false") << '\n';
    os << "consistent: " << (r.consistent ? "true" : "false") << '\n';
    return os.str();
}

std::string report_csv_header()
{
    return "coupling,index,scalar_index,consistent,fragile,c1,c2,phase_algebraic_criterion,B1_rank,B1_rank_tail,"
           "B2_rank,B2_rank_tail,T_rank,rank_tol,n_bar";
}

std::string report_csv_row(const IndexReport& r)
{
    std::ostringstream os;
    os << to_string(r.kind) << ',' << r.index << ',' << r.scalar_index << ',' << (r.consistent ? 1 : 0) << ','
       << (r.fragile ? 1 : 0) << ',' << format_double(r.c1) << ',' << format_double(r.c2) << ','
       << format_double(r.phase_algebraic_criterion) << ',' << r.b1.rank_full << ',' << r.b1.rank_tail << ','
       << (r.b2_evaluated ? r.b2.rank_full : -1) << ',' << (r.b2_evaluated ? r.b2.rank_tail : -1) << ','
       << r.T_rank << ',' << format_double(r.rank_tol) << ',' << r.n_bar;
    return os.str();
}

} // namespace mpdae
