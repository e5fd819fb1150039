#include "mpdae/postproc.hpp"

#include <algorithm>
#include <cmath>

#include "mpdae/error.hpp"

namespace mpdae {

double functional_value(const GridState& s, const CirculantOperator<double>& op, const Vector& w_y,
                        const Vector& w_z)
{
    if (w_y.size() != s.n_y || w_z.size() != s.n_z)
        throw InvalidArgument("functional weights do not match the grid");
    if (op.lines() != s.m)
        throw InvalidArgument("functional: operator and grid disagree on m");
    const Lines Dy = op.apply(s.y_lines());
    const Lines Dz = op.apply(s.z_lines());
    double sum = 0.0;
    for (int i = 0; i < s.m; ++i) {
        for (int l = 0; l < s.n_y; ++l)
            sum += w_y(l) * Dy(i, l) * Dy(i, l);
        for (int l = 0; l < s.n_z; ++l)
            sum += w_z(l) * Dz(i, l) * Dz(i, l);
    }
    return op.h() * sum;
}

FunctionalSeries functional_pointwise(const Trajectory& traj, const CirculantOperator<double>& op,
                                      const Vector& w_y, const Vector& w_z)
{
    if (traj.states.empty())
        throw InvalidArgument("functional of an empty trajectory");
    if ((w_y.array() < 0.0).any() || (w_z.array() < 0.0).any())
        throw InvalidArgument("functional weights must be non-negative");
    FunctionalSeries out;
    out.times = traj.times;
    out.w_y = w_y;
    out.w_z = w_z;
    out.values.reserve(traj.size());
    for (const auto& s : traj.states)
        out.values.push_back(functional_value(s, op, w_y, w_z));
    return out;
}

void Phase::add(double delta)
{
    fraction += delta;
    const double whole = std::floor(fraction);
    turns += whole;
    fraction -= whole;
    if (fraction >= 1.0) {
        fraction -= 1.0;
        turns += 1.0;
    }
}

std::vector<Phase> phase_at_steps(const Trajectory& traj)
{
    std::vector<Phase> out(traj.size());
    for (std::size_t n = 1; n < traj.size(); ++n) {
        out[n] = out[n - 1];
        out[n].add(0.5 * (traj.times[n] - traj.times[n - 1]) * (traj.nu[n - 1] + traj.nu[n]));
    }
    return out;
}

namespace {

/// Periodic-linear interpolation of the grid at fast time s in [0, 1).
Vector sample_grid(const GridState& g, double s)
{
    const double pos = s * g.m;
    int i = static_cast<int>(std::floor(pos));
    double frac = pos - i;
    i = wrap_line(i, g.m);
    const int j = wrap_line(i + 1, g.m);
    Vector out(g.n_y + g.n_z);
    out.head(g.n_y) = (1.0 - frac) * g.y_line(i) + frac * g.y_line(j);
    out.tail(g.n_z) = (1.0 - frac) * g.z_line(i) + frac * g.z_line(j);
    return out;
}

} // namespace

ReconstructedSignal reconstruct(const Trajectory& traj, const ReconstructOptions& options)
{
    if (traj.states.empty())
        throw InvalidArgument("cannot reconstruct an empty trajectory");
    const std::size_t N = traj.size();
    const GridState& s0 = traj.states.front();
    const std::vector<Phase> node_phase = phase_at_steps(traj);

    std::vector<double> times = options.times;
    if (times.empty()) {
        const int k = std::max(1, options.samples_per_step);
        for (std::size_t n = 0; n + 1 < N; ++n)
            for (int j = 0; j < k; ++j)
                times.push_back(traj.times[n] + (traj.times[n + 1] - traj.times[n]) * j / k);
        times.push_back(traj.times.back());
    }

    ReconstructedSignal out;
    out.n_y = s0.n_y;
    out.n_z = s0.n_z;
    out.times = times;
    out.values.resize(static_cast<Eigen::Index>(times.size()), s0.n_y + s0.n_z);
    out.psi.reserve(times.size());
    out.psi_fraction.reserve(times.size());

    std::size_t n = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t < traj.times.front() || t > traj.times.back())
            throw InvalidArgument("reconstruction time outside the trajectory span");
        while (n + 2 < N && t > traj.times[n + 1])
            ++n;
        if (N == 1) {
            out.values.row(static_cast<Eigen::Index>(k)) = sample_grid(s0, 0.0).transpose();
            out.psi.push_back(0.0);
            out.psi_fraction.push_back(0.0);
            continue;
        }
        const double ta = traj.times[n], tb = traj.times[n + 1];
        const double dt = tb - ta;
        const double tau = t - ta;
        const double theta = tau / dt;
        Phase p = node_phase[n];
        // exact integral of the linear interpolant of nu
        p.add(tau * traj.nu[n] + 0.5 * tau * tau * (traj.nu[n + 1] - traj.nu[n]) / dt);
        const Vector xa = sample_grid(traj.states[n], p.fraction);
        const Vector xb = sample_grid(traj.states[n + 1], p.fraction);
        out.values.row(static_cast<Eigen::Index>(k)) = ((1.0 - theta) * xa + theta * xb).transpose();
        out.psi.push_back(p.value());
        out.psi_fraction.push_back(p.fraction);
    }
    return out;
}

FrequencyDiff frequency_diff(const Trajectory& a, const Trajectory& b)
{
    if (a.size() != b.size() || a.size() == 0)
        throw InvalidArgument("frequency comparison needs trajectories of equal, nonzero length");
    FrequencyDiff out;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double scale = std::max({1.0, std::abs(a.times[n]), std::abs(b.times[n])});
        if (std::abs(a.times[n] - b.times[n]) > 1e-12 * scale)
            throw InvalidArgument("frequency comparison: time grids differ at step " + std::to_string(n));
        const double d = std::abs(a.nu[n] - b.nu[n]);
        const double rel = d == 0.0 ? 0.0 : d / std::abs(b.nu[n]);
        out.times.push_back(a.times[n]);
        out.absolute.push_back(d);
        out.relative.push_back(rel);
        out.max_abs = std::max(out.max_abs, d);
        out.max_rel = std::max(out.max_rel, rel);
        out.mean_abs += d;
        out.mean_rel += rel;
    }
    out.mean_abs /= static_cast<double>(a.size());
    out.mean_rel /= static_cast<double>(a.size());
    return out;
}

} // namespace mpdae
