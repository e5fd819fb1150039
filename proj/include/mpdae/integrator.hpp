#pragma once

#include <memory>
#include <vector>

#include "mpdae/initializer.hpp"
#include "mpdae/mol_system.hpp"

namespace mpdae {

struct IntegratorConfig
{
    int steps = 200;
    double t_end = 1.0;
    /// Applied to the scaled residual, see scaled_residual_norm.
    double newton_tol = 1e-10;
    int max_newton = 25;
    double min_damping = 1.0 / 256.0;
    /// Contraction ratio above which the iteration matrix is refreshed.
    double refresh_ratio = 0.3;
    /// Reciprocal condition estimate below which the iteration matrix counts as singular.
    double min_rcond = 1e-15;
    double drift_tol = 1e-9;

    void validate() const;
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<GridState> states;
    std::vector<double> nu;
    /// Newton iterations of step n (entry 0 belongs to the initial point and is 0).
    std::vector<int> iterations;
    /// max |g| on the grid at each stored time.
    std::vector<double> constraint_residual;
    double max_drift = 0.0;
    bool drift_exceeded = false;

    std::size_t size() const { return times.size(); }
};

/// Cached factorisation of the iteration matrix, reused across Newton
/// iterations and steps while the contraction stays fast.
struct StepWorkspace
{
    struct Impl;
    std::shared_ptr<Impl> impl;
    int factorizations = 0;

    StepWorkspace();
    void invalidate();
};

struct StepResult
{
    GridState state;
    int iterations = 0;
    double residual = 0.0;
};

/// Row weights (dt, 1, dt h) for optimality and (dt, 1, 1) for phase conditions.
Vector residual_scaling(const MolSystem& sys, double dt);

/// max-norm of the row-scaled implicit Euler residual at t.
double scaled_residual_norm(const MolSystem& sys, double t, const GridState& x, const GridState& x_prev,
                            double dt);

/// One implicit Euler step from (t_n, state_n) to t_n + dt.
StepResult step(const MolSystem& sys, double t_n, const GridState& state_n, double dt,
                const IntegratorConfig& cfg = {}, StepWorkspace* workspace = nullptr);

/// cfg.steps uniform steps from init.t0 to cfg.t_end.
Trajectory integrate(const MolSystem& sys, const ConsistentPoint& init, const IntegratorConfig& cfg = {});

} // namespace mpdae
