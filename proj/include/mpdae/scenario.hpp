#pragma once

#include <optional>
#include <string>

#include "mpdae/index_lab.hpp"
#include "mpdae/initializer.hpp"
#include "mpdae/integrator.hpp"

namespace mpdae {

/// Failure of one pipeline stage (config, seed, init, integrate, index, output).
class StageFailure : public Error
{
public:
    StageFailure(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)), detail_(what)
    {}
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string stage_;
    std::string detail_;
};

struct ScenarioConfig
{
    // [model]
    std::string model = "ring_oscillator";  // ring_oscillator | linear
    int k = 3;
    double C = 1e-6;
    double R = 1e3;
    double G = -5.0;
    double omega = 2.0 * 3.14159265358979323846;
    double linear_coupling = 0.5;

    // [input]
    std::string input = "harmonic";  // harmonic | sinsq | constant
    double period = 1.0;
    double amplitude = 0.5;
    double input_value = 1.0;

    // [grid]
    int m = 100;
    std::string stencil = "bdf2";

    // [coupling]
    std::string coupling = "phase_differential";  // phase_differential | phase_algebraic | optimality
    int component = 1;                             // 1-based
    double eta = 0.0;
    std::string weights = "b";                     // a | b | c | explicit
    Vector w_y;
    Vector w_z;

    // [integrator]
    int steps = 200;
    std::optional<double> t_end;  // defaults to the input period
    double newton_tol = 1e-10;
    int max_newton = 25;

    // [init]
    std::string seed_mode = "consistent";  // consistent | nearly_consistent
    int seed_component = 1;
    double seed_level = 0.0;
    double seed_rel_tol = 1e-6;

    // [output]
    std::string out_dir = "out";

    /// Throws InvalidArgument before any computation.
    void validate() const;
    double resolved_t_end() const;
    IntegratorConfig integrator() const;
    SeedOptions seed_options() const;
    InitMode init_mode() const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& ini_text);

/// Resolved configuration as INI text; parse_scenario reads it back unchanged.
std::string scenario_to_ini(const ScenarioConfig& cfg);

/// Applies a weight case a, b or c (or keeps explicit vectors) for n_y, n_z.
void expand_weights(const std::string& weight_case, int n_y, int n_z, Vector& w_y, Vector& w_z);

SemiExplicitModel build_model(const ScenarioConfig& cfg);
CouplingCondition build_coupling(const ScenarioConfig& cfg, const SemiExplicitModel& model);
MolSystem build_system(const ScenarioConfig& cfg);

struct ScenarioRun
{
    ScenarioConfig config;
    MolSystem system;
    PeriodicSeed seed;
    ConsistentPoint init;
    std::optional<Trajectory> trajectory;
};

/// seed -> consistent initialisation; integrates when requested.
ScenarioRun run_scenario(const ScenarioConfig& cfg, bool integrate_trajectory = true);

/// meta.txt contents: resolved config plus seed, run and build information.
std::string scenario_meta(const ScenarioRun& run, double rank_tol);

} // namespace mpdae
