#include "mpdae/integrator.hpp"

#include <cmath>

#include "mpdae/error.hpp"

namespace mpdae {

void IntegratorConfig::validate() const
{
    if (steps < 1)
        throw InvalidArgument("integrator needs at least one step");
    if (!(newton_tol > 0.0) || !(drift_tol > 0.0))
        throw InvalidArgument("integrator tolerances must be positive");
    if (max_newton < 1)
        throw InvalidArgument("max_newton must be at least 1");
    if (!(min_damping > 0.0 && min_damping <= 1.0))
        throw InvalidArgument("min_damping must lie in (0, 1]");
}

struct StepWorkspace::Impl
{
    Eigen::PartialPivLU<Matrix> lu;
    bool valid = false;
    double dt = 0.0;
};

StepWorkspace::StepWorkspace() : impl(std::make_shared<Impl>()) {}

void StepWorkspace::invalidate()
{
    impl->valid = false;
}

Vector residual_scaling(const MolSystem& sys, double dt)
{
    Vector s(sys.n_bar());
    s.head(sys.n1()).setConstant(dt);
    s.segment(sys.n1(), sys.n2()).setConstant(1.0);
    s(sys.n_bar() - 1) = sys.coupling().is_phase() ? 1.0 : dt * sys.h();
    return s;
}

namespace {

GridState difference_quotient(const GridState& x, const GridState& x_prev, double dt)
{
    GridState v = x;
    v.x1 = (x.x1 - x_prev.x1) / dt;
    v.x2 = (x.x2 - x_prev.x2) / dt;
    v.nu = (x.nu - x_prev.nu) / dt;
    return v;
}

Vector scaled_residual(const MolSystem& sys, double t, const GridState& x, const GridState& x_prev, double dt,
                       const Vector& scale)
{
    return scale.cwiseProduct(residual(sys, t, x, difference_quotient(x, x_prev, dt)));
}

void refactor(const MolSystem& sys, double t, const GridState& x, const GridState& x_prev, double dt,
              const Vector& scale, const IntegratorConfig& cfg, StepWorkspace& ws)
{
    const JacobianBlocks blocks = jacobian_blocks(sys, t, x, difference_quotient(x, x_prev, dt));
    Matrix J = residual_dx(blocks) + residual_dxdot(blocks) / dt;
    J = scale.asDiagonal() * J;
    ws.impl->lu.compute(J);
    ws.impl->valid = true;
    ws.impl->dt = dt;
    ++ws.factorizations;
    const double rc = ws.impl->lu.rcond();
    if (!(rc >= cfg.min_rcond)) {
        ws.impl->valid = false;
        throw SingularIterationMatrix("iteration matrix is singular (rcond = " + std::to_string(rc) + ")", rc);
    }
}

} // namespace

double scaled_residual_norm(const MolSystem& sys, double t, const GridState& x, const GridState& x_prev, double dt)
{
    return scaled_residual(sys, t, x, x_prev, dt, residual_scaling(sys, dt)).cwiseAbs().maxCoeff();
}

StepResult step(const MolSystem& sys, double t_n, const GridState& state_n, double dt, const IntegratorConfig& cfg,
                StepWorkspace* workspace)
{
    if (!(dt > 0.0))
        throw InvalidArgument("step size must be positive");
    sys.check_shape(state_n, "step");
    cfg.validate();

    StepWorkspace local;
    StepWorkspace& ws = workspace ? *workspace : local;
    if (ws.impl->valid && ws.impl->dt != dt)
        ws.invalidate();

    const double t = t_n + dt;
    const Vector scale = residual_scaling(sys, dt);
    const int n1 = sys.n1(), n2 = sys.n2();

    GridState x = state_n;
    Vector r = scaled_residual(sys, t, x, state_n, dt, scale);
    double norm = r.cwiseAbs().maxCoeff();
    int it = 0;
    while (norm >= cfg.newton_tol) {
        if (it >= cfg.max_newton)
            throw NewtonFailure("Newton did not converge in " + std::to_string(cfg.max_newton) +
                                    " iterations (scaled residual " + std::to_string(norm) + ")",
                                norm, it);
        ++it;
        bool fresh = false;
        if (!ws.impl->valid) {
            refactor(sys, t, x, state_n, dt, scale, cfg, ws);
            fresh = true;
        }
        const Vector dx = ws.impl->lu.solve(-r);

        double lambda = 1.0;
        bool accepted = false;
        GridState trial = x;
        Vector r_trial;
        double norm_trial = 0.0;
        while (lambda >= cfg.min_damping) {
            trial.x1 = x.x1 + lambda * dx.head(n1);
            trial.x2 = x.x2 + lambda * dx.segment(n1, n2);
            trial.nu = x.nu + lambda * dx(n1 + n2);
            r_trial = scaled_residual(sys, t, trial, state_n, dt, scale);
            norm_trial = r_trial.cwiseAbs().maxCoeff();
            if (std::isfinite(norm_trial) && (norm_trial < norm || norm_trial < cfg.newton_tol)) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                ws.invalidate();
                continue;
            }
            throw NewtonFailure("damped Newton stalled (scaled residual " + std::to_string(norm) + ")", norm, it);
        }
        if (norm_trial > cfg.refresh_ratio * norm)
            ws.invalidate();
        x = trial;
        r = r_trial;
        norm = norm_trial;
    }
    return {x, it, norm};
}

Trajectory integrate(const MolSystem& sys, const ConsistentPoint& init, const IntegratorConfig& cfg)
{
    cfg.validate();
    sys.check_shape(init.state, "integrate");
    if (!(cfg.t_end > init.t0))
        throw InvalidArgument("t_end must exceed the initial time");

    Trajectory traj;
    const int N = cfg.steps;
    const double span = cfg.t_end - init.t0;
    const double dt = span / N;

    auto record = [&](double t, const GridState& s, int iterations) {
        const double drift = stacked_g(sys, t, s).cwiseAbs().maxCoeff();
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.nu.push_back(s.nu);
        traj.iterations.push_back(iterations);
        traj.constraint_residual.push_back(drift);
        traj.max_drift = std::max(traj.max_drift, drift);
    };
    traj.times.reserve(N + 1);
    traj.states.reserve(N + 1);
    record(init.t0, init.state, 0);

    StepWorkspace ws;
    GridState x = init.state;
    for (int n = 0; n < N; ++n) {
        const double t_n = init.t0 + span * n / N;
        try {
            StepResult res = step(sys, t_n, x, dt, cfg, &ws);
            x = std::move(res.state);
            record(init.t0 + span * (n + 1) / N, x, res.iterations);
        } catch (const NewtonFailure& e) {
            throw NewtonFailure("step " + std::to_string(n + 1) + ": " + e.what(), e.residual(), e.iterations());
        } catch (const SingularIterationMatrix& e) {
            throw SingularIterationMatrix("step " + std::to_string(n + 1) + ": " + e.what(), e.rcond());
        }
    }
    traj.drift_exceeded = traj.max_drift > cfg.drift_tol;
    return traj;
}

} // namespace mpdae
