#pragma once

#include <vector>

#include "mpdae/integrator.hpp"

namespace mpdae {

struct FunctionalSeries
{
    std::vector<double> times;
    std::vector<double> values;
    Vector w_y;
    Vector w_z;
};

/// J(t_n) = h sum_i ( ||W_y^1/2 D_i(y)||^2 + ||W_z^1/2 D_i(z)||^2 ) at every stored step.
FunctionalSeries functional_pointwise(const Trajectory& traj, const CirculantOperator<double>& op,
                                      const Vector& w_y, const Vector& w_z);

double functional_value(const GridState& state, const CirculantOperator<double>& op, const Vector& w_y,
                        const Vector& w_z);

/// Phase Psi(t) = integral of nu, kept as integer turns plus a fraction in [0, 1).
struct Phase
{
    double turns = 0.0;
    double fraction = 0.0;

    double value() const { return turns + fraction; }
    void add(double delta);
};

/// Trapezoidal phase at the stored times.
std::vector<Phase> phase_at_steps(const Trajectory& traj);

struct ReconstructOptions
{
    /// Samples per stored step interval (the final time is always included).
    int samples_per_step = 10;
    /// Optional explicit sample times; overrides samples_per_step when non-empty.
    std::vector<double> times;
};

struct ReconstructedSignal
{
    std::vector<double> times;
    /// One row per sample: y components then z components.
    Matrix values;
    std::vector<double> psi;
    std::vector<double> psi_fraction;
    int n_y = 0;
    int n_z = 0;
};

/// x(t) = xhat(t, Psi(t) mod 1): linear in t between stored steps and
/// periodic-linear in t2 between lines.
ReconstructedSignal reconstruct(const Trajectory& traj, const ReconstructOptions& options = {});

struct FrequencyDiff
{
    std::vector<double> times;
    std::vector<double> absolute;
    /// |nu_a - nu_b| / |nu_b|
    std::vector<double> relative;
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double max_rel = 0.0;
    double mean_rel = 0.0;
};

/// Throws InvalidArgument when the time grids differ.
FrequencyDiff frequency_diff(const Trajectory& a, const Trajectory& b);

} // namespace mpdae
