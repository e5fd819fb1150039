#pragma once

#include <optional>

#include "mpdae/mol_system.hpp"

namespace mpdae {

/// User guess for the grid at t0. Missing z lines are started at zero.
struct InitGuess
{
    Lines y;
    std::optional<Lines> z;
    std::optional<double> nu;
    double t0 = 0.0;
};

enum class InitMode
{
    /// Close nu with the coupling's (hidden) constraint.
    Consistent,
    /// Keep the guessed nu; only the algebraic lines and the pinned component are projected.
    NearlyConsistent,
};

struct InitOptions
{
    int max_newton = 50;
    double newton_tol = 1e-10;
    /// Relative threshold below which Condition 1 / Condition 2 quantities count as zero.
    double degeneracy_tol = 1e-10;
};

struct ConsistentPoint
{
    double t0 = 0.0;
    GridState state;
    GridState velocity;
};

ConsistentPoint consistent_init(const MolSystem& sys, const InitGuess& guess, InitMode mode = InitMode::Consistent,
                                const InitOptions& opts = {});

/// Solve g(t, y, z) = 0 for z by Newton with y fixed.
Vector solve_constraint(const SemiExplicitModel& model, double t, const Vector& y, Vector z, int max_iter = 50,
                        double tol = 1e-10);

/// z' = -(dg/dz)^{-1} (dg/dt + dg/dy y') on one line.
Vector constraint_velocity(const SemiExplicitModel& model, double t, const Vector& y, const Vector& z,
                           const Vector& ydot);

struct SeedOptions
{
    double t_frozen = 0.0;
    /// Crossing component of y and level for the period detection.
    int component = 0;
    double level = 0.0;
    /// RK4 step; 0 picks 0.05 / ||reduced Jacobian||_inf at the start point.
    double dt = 0.0;
    double rel_tol = 1e-6;
    int average_periods = 5;
    int max_periods = 2000;
    long max_steps = 20'000'000;
    /// Start point of the transient; empty selects y = (0.5, 0, ..., 0).
    Vector y0;
};

struct PeriodicSeed
{
    Lines y;
    Lines z;
    double nu = 0.0;
    double period = 0.0;
    int periods_observed = 0;
    double transient_time = 0.0;
    double dt = 0.0;

    InitGuess as_guess(double t0 = 0.0) const { return {y, z, nu, t0}; }
};

/// Integrates the original DAE with time frozen until the period of the
/// component crossing settles, then samples one period onto m lines starting
/// at an up-crossing (so line 1 sits on the crossing level).
PeriodicSeed periodic_seed(const SemiExplicitModel& model, int m, const SeedOptions& opts = {});

/// Classical RK4 step of y' = f(t, y, z(y)) on the constraint manifold.
/// z is used as the Newton start and overwritten with z at the new point.
Vector reduced_rk4_step(const SemiExplicitModel& model, double t, const Vector& y, Vector& z, double dt);

} // namespace mpdae
