#include "mpdae/initializer.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "mpdae/error.hpp"

namespace mpdae {

namespace {

Eigen::PartialPivLU<Matrix> factor_dgdz(const Matrix& gz)
{
    Eigen::PartialPivLU<Matrix> lu(gz);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
        throw SingularConstraintJacobian("dg/dz is singular (rcond = " + std::to_string(lu.rcond()) + ")");
    return lu;
}

} // namespace

Vector solve_constraint(const SemiExplicitModel& model, double t, const Vector& y, Vector z, int max_iter,
                        double tol)
{
    double res = model.g(t, y, z).cwiseAbs().maxCoeff();
    for (int it = 0; it < max_iter; ++it) {
        const Vector g = model.g(t, y, z);
        res = g.cwiseAbs().maxCoeff();
        const auto lu = factor_dgdz(model.dg_dz(t, y, z));
        const Vector dz = lu.solve(g);
        z -= dz;
        if (dz.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + z.cwiseAbs().maxCoeff()))
            break;
    }
    res = model.g(t, y, z).cwiseAbs().maxCoeff();
    if (!(res <= tol))
        throw NewtonFailure("constraint Newton did not converge (|g| = " + std::to_string(res) + ")", res, max_iter);
    return z;
}

Vector constraint_velocity(const SemiExplicitModel& model, double t, const Vector& y, const Vector& z,
                           const Vector& ydot)
{
    const auto lu = factor_dgdz(model.dg_dz(t, y, z));
    return -lu.solve(model.dg_dt(t, y, z) + model.dg_dy(t, y, z) * ydot);
}

namespace {

/// Line 1 for a phase condition in z[l]: z[l] is pinned, so the constraint is
/// solved for the remaining z components plus the y component whose column
/// best completes the square system.
void solve_pinned_algebraic_line(const SemiExplicitModel& model, double t, Vector& y, Vector& z, int pinned,
                                 const InitOptions& opts)
{
    const int ny = model.n_y, nz = model.n_z;
    const Matrix gy = model.dg_dy(t, y, z);
    const Matrix gz = model.dg_dz(t, y, z);

    std::vector<int> z_free;
    for (int l = 0; l < nz; ++l)
        if (l != pinned)
            z_free.push_back(l);

    auto assemble = [&](const Matrix& Gy, const Matrix& Gz, int j) {
        Matrix M(nz, nz);
        for (std::size_t c = 0; c < z_free.size(); ++c)
            M.col(static_cast<Eigen::Index>(c)) = Gz.col(z_free[c]);
        M.col(nz - 1) = Gy.col(j);
        return M;
    };

    int best = -1;
    double best_det = 0.0;
    for (int j = 0; j < ny; ++j) {
        const double d = std::abs(assemble(gy, gz, j).determinant());
        if (d > best_det) {
            best_det = d;
            best = j;
        }
    }
    if (best < 0)
        throw SingularConstraintJacobian("phase condition on z: no y component can be released on line 1");

    for (int it = 0; it < opts.max_newton; ++it) {
        const Vector g = model.g(t, y, z);
        if (g.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + z.cwiseAbs().maxCoeff() + y.cwiseAbs().maxCoeff()))
            break;
        const Matrix M = assemble(model.dg_dy(t, y, z), model.dg_dz(t, y, z), best);
        const Vector du = M.partialPivLu().solve(g);
        for (std::size_t c = 0; c < z_free.size(); ++c)
            z(z_free[c]) -= du(static_cast<Eigen::Index>(c));
        y(best) -= du(nz - 1);
    }
    const double res = model.g(t, y, z).cwiseAbs().maxCoeff();
    if (!(res <= opts.newton_tol))
        throw NewtonFailure("pinned line-1 constraint solve did not converge", res, opts.max_newton);
}

} // namespace

ConsistentPoint consistent_init(const MolSystem& sys, const InitGuess& guess, InitMode mode, const InitOptions& opts)
{
    const int m = sys.m(), ny = sys.n_y(), nz = sys.n_z();
    const auto& model = sys.model();
    const auto& c = sys.coupling();
    const double t0 = guess.t0;

    if (guess.y.rows() != m || guess.y.cols() != ny)
        throw InvalidArgument("initial guess: y grid must be m x n_y");
    if (guess.z && (guess.z->rows() != m || guess.z->cols() != nz))
        throw InvalidArgument("initial guess: z grid must be m x n_z");
    if (mode == InitMode::NearlyConsistent && !guess.nu)
        throw InvalidArgument("nearly consistent initialisation needs a frequency guess");

    GridState x = sys.zero_state();
    x.y_lines() = guess.y;
    if (guess.z)
        x.z_lines() = *guess.z;
    x.nu = guess.nu.value_or(0.0);

    if (c.kind() == CouplingKind::PhaseDifferential)
        x.y_line(0)(c.component()) = c.eta().value(t0);
    if (c.kind() == CouplingKind::PhaseAlgebraic)
        x.z_line(0)(c.component()) = c.eta().value(t0);

    for (int i = 0; i < m; ++i) {
        if (i == 0 && c.kind() == CouplingKind::PhaseAlgebraic) {
            Vector y = x.y_line(0), z = x.z_line(0);
            solve_pinned_algebraic_line(model, t0, y, z, c.component(), opts);
            x.y_line(0) = y;
            x.z_line(0) = z;
            continue;
        }
        x.z_line(i) = solve_constraint(model, t0, x.y_line(i), x.z_line(i), opts.max_newton, opts.newton_tol);
    }

    // Velocities are affine in nu:  y' = a - nu d,  z' = c - nu e.
    const Lines Dy = sys.op().apply(x.y_lines());
    const Lines Dz = sys.op().apply(x.z_lines());
    Lines a(m, ny), cz(m, nz), ez(m, nz);
    for (int i = 0; i < m; ++i) {
        const Vector y = x.y_line(i), z = x.z_line(i);
        a.row(i) = model.f(t0, y, z).transpose();
        const auto lu = factor_dgdz(model.dg_dz(t0, y, z));
        const Matrix gy = model.dg_dy(t0, y, z);
        cz.row(i) = (-lu.solve(model.dg_dt(t0, y, z) + gy * a.row(i).transpose())).transpose();
        ez.row(i) = (-lu.solve(gy * Dy.row(i).transpose())).transpose();
    }

    const double tol = opts.degeneracy_tol;
    if (mode == InitMode::Consistent) {
        switch (c.kind()) {
        case CouplingKind::PhaseDifferential: {
            const int l = c.component();
            const double d = Dy(0, l);
            const double scale = x.y_lines().col(l).cwiseAbs().maxCoeff() * m;
            if (!(std::abs(d) > tol * scale))
                throw ConditionViolation(1, "phase component is flat at t2 = 0 (D_1,l(y) = " + std::to_string(d) +
                                                "): Condition 1 violated on the grid");
            x.nu = (a(0, l) - c.eta().d1(t0)) / d;
            break;
        }
        case CouplingKind::PhaseAlgebraic: {
            const int l = c.component();
            const double e = ez(0, l);
            const double scale = cz.row(0).cwiseAbs().maxCoeff() + (Dy.row(0).cwiseAbs().maxCoeff() *
                                                                   ez.row(0).cwiseAbs().maxCoeff());
            if (!(std::abs(e) > tol * scale) || e == 0.0)
                throw ConditionViolation(1, "phase component z is insensitive to nu at t2 = 0: "
                                            "hidden constraint cannot be closed");
            x.nu = (cz(0, l) - c.eta().d1(t0)) / e;
            break;
        }
        case CouplingKind::Optimality: {
            const Vector& wy = c.w_y();
            const Vector& wz = c.w_z();
            double functional = 0.0, magnitude = 0.0;
            double constant = 0.0, coefficient = 0.0, coefficient_terms = 0.0;
            for (int i = 0; i < m; ++i) {
                for (int l = 0; l < ny; ++l) {
                    functional += wy(l) * Dy(i, l) * Dy(i, l);
                    magnitude += wy(l) * x.y_lines()(i, l) * x.y_lines()(i, l);
                    constant += wy(l) * a(i, l) * Dy(i, l);
                    coefficient += wy(l) * Dy(i, l) * Dy(i, l);
                    coefficient_terms += wy(l) * Dy(i, l) * Dy(i, l);
                }
                for (int l = 0; l < nz; ++l) {
                    functional += wz(l) * Dz(i, l) * Dz(i, l);
                    magnitude += wz(l) * x.z_lines()(i, l) * x.z_lines()(i, l);
                    constant += wz(l) * cz(i, l) * Dz(i, l);
                    coefficient += wz(l) * ez(i, l) * Dz(i, l);
                    coefficient_terms += wz(l) * std::abs(ez(i, l) * Dz(i, l));
                }
            }
            // ||W^1/2 D x||^2 against (m ||W^1/2 x||)^2: zero on grids constant in t2.
            if (!(functional > tol * tol * magnitude * m * m) || functional == 0.0)
                throw ConditionViolation(2, "every weighted variable is constant in fast time: "
                                            "Condition 2 violated on the grid");
            if (!(std::abs(coefficient) > tol * coefficient_terms))
                throw ConditionViolation(2, "optimality condition is insensitive to nu (coefficient " +
                                                std::to_string(coefficient) + ")");
            x.nu = constant / coefficient;
            break;
        }
        }
    }

    GridState v = sys.zero_state();
    for (int i = 0; i < m; ++i) {
        v.y_line(i) = (a.row(i) - x.nu * Dy.row(i)).transpose();
        v.z_line(i) = (cz.row(i) - x.nu * ez.row(i)).transpose();
    }
    v.nu = 0.0;
    return {t0, x, v};
}

Vector reduced_rk4_step(const SemiExplicitModel& model, double t, const Vector& y, Vector& z, double dt)
{
    auto rhs = [&](double tt, const Vector& yy, Vector& zz) {
        zz = solve_constraint(model, tt, yy, zz);
        return model.f(tt, yy, zz);
    };
    Vector zs = z;
    const Vector k1 = rhs(t, y, zs);
    Vector z2 = zs;
    const Vector k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1, z2);
    Vector z3 = z2;
    const Vector k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2, z3);
    Vector z4 = z3;
    const Vector k4 = rhs(t + dt, y + dt * k3, z4);
    const Vector y_new = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    z = solve_constraint(model, t + dt, y_new, z4);
    return y_new;
}

PeriodicSeed periodic_seed(const SemiExplicitModel& model, int m, const SeedOptions& opts)
{
    if (m < 1)
        throw InvalidArgument("periodic seed needs m >= 1 lines");
    if (opts.component < 0 || opts.component >= model.n_y)
        throw InvalidArgument("seed crossing component out of range");
    const auto frozen = freeze_time(model, opts.t_frozen);
    const int comp = opts.component;
    const double level = opts.level;

    Vector y = opts.y0;
    if (y.size() == 0) {
        y = Vector::Zero(model.n_y);
        y(0) = 0.5;
    }
    if (y.size() != model.n_y)
        throw InvalidArgument("seed start point has wrong dimension");
    Vector z = solve_constraint(frozen, 0.0, y, Vector::Zero(model.n_z));

    double dt = opts.dt;
    if (dt <= 0.0) {
        const auto lu = factor_dgdz(frozen.dg_dz(0.0, y, z));
        const Matrix J = frozen.df_dy(0.0, y, z) - frozen.df_dz(0.0, y, z) * lu.solve(frozen.dg_dy(0.0, y, z));
        const double norm = J.cwiseAbs().rowwise().sum().maxCoeff();
        if (!(norm > 0.0))
            throw NoPeriodicRegime("reduced Jacobian vanishes at the seed start point");
        dt = 0.05 / norm;
    }

    std::vector<double> crossings;
    std::deque<double> periods;
    // peak of the crossing component per cycle; a decaying spiral also has a steady period
    double peak = -std::numeric_limits<double>::infinity();
    double last_peak = std::numeric_limits<double>::quiet_NaN();
    bool amplitude_steady = false;
    double previous_average = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    double t = 0.0;
    Vector y_before, z_before;
    double t_before = 0.0;
    long steps = 0;

    const double speed0 = frozen.f(0.0, y, z).cwiseAbs().maxCoeff();
    while (steps < opts.max_steps) {
        if (steps % 256 == 0 && frozen.f(t, y, z).cwiseAbs().maxCoeff() <= 1e-10 * speed0)
            throw NoPeriodicRegime("transient settled at a fixed point after " + std::to_string(steps) + " steps");
        Vector z_new = z;
        const Vector y_new = reduced_rk4_step(frozen, t, y, z_new, dt);
        ++steps;
        const double s0 = y(comp) - level;
        const double s1 = y_new(comp) - level;
        peak = std::max(peak, s1);
        if (s0 < 0.0 && s1 >= 0.0) {
            crossings.push_back(t + dt * (-s0) / (s1 - s0));
            if (crossings.size() >= 2) {
                amplitude_steady = std::isfinite(last_peak) && peak > 0.0 &&
                                   std::abs(peak - last_peak) <= std::max(1e-3, 10.0 * opts.rel_tol) * peak;
                last_peak = peak;
            }
            peak = s1;
            y_before = y;
            z_before = z;
            t_before = t;
            if (crossings.size() >= 2) {
                periods.push_back(crossings[crossings.size() - 1] - crossings[crossings.size() - 2]);
                if (static_cast<int>(periods.size()) > opts.average_periods)
                    periods.pop_front();
            }
            if (static_cast<int>(periods.size()) == opts.average_periods) {
                double avg = 0.0;
                for (double p : periods)
                    avg += p;
                avg /= static_cast<double>(periods.size());
                if (std::isfinite(previous_average) && amplitude_steady &&
                    std::abs(avg - previous_average) <= opts.rel_tol * avg) {
                    converged = true;
                    previous_average = avg;
                    y = y_new;
                    z = z_new;
                    t += dt;
                    break;
                }
                previous_average = avg;
            }
            if (static_cast<int>(crossings.size()) > opts.max_periods)
                break;
        }
        y = y_new;
        z = z_new;
        t += dt;
    }
    if (!converged)
        throw NoPeriodicRegime("no periodic regime detected after " + std::to_string(crossings.size()) +
                               " crossings and " + std::to_string(steps) + " steps");

    const double period = previous_average;

    // Land exactly on the last crossing by bisection on the partial step.
    double lo = 0.0, hi = dt;
    for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        Vector zz = z_before;
        const Vector yy = reduced_rk4_step(frozen, t_before, y_before, zz, mid);
        if (yy(comp) - level < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    Vector zs = z_before;
    Vector ys = reduced_rk4_step(frozen, t_before, y_before, zs, hi);

    const int sub = std::max(4, static_cast<int>(std::ceil(period / (m * dt))));
    const double dd = period / (static_cast<double>(m) * sub);
    PeriodicSeed out;
    out.y.resize(m, model.n_y);
    out.z.resize(m, model.n_z);
    double ts = 0.0;
    for (int i = 0; i < m; ++i) {
        out.y.row(i) = ys.transpose();
        out.z.row(i) = solve_constraint(frozen, 0.0, ys, zs).transpose();
        for (int s = 0; s < sub; ++s) {
            ys = reduced_rk4_step(frozen, ts, ys, zs, dd);
            ts += dd;
        }
    }
    out.period = period;
    out.nu = 1.0 / period;
    out.periods_observed = static_cast<int>(crossings.size());
    out.transient_time = t;
    out.dt = dt;
    return out;
}

} // namespace mpdae
