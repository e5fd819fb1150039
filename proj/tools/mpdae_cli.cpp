#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpdae/csv.hpp"
#include "mpdae/error.hpp"
#include "mpdae/index_lab.hpp"
#include "mpdae/postproc.hpp"
#include "mpdae/scenario.hpp"

namespace fs = std::filesystem;
using namespace mpdae;

namespace {

constexpr int exit_usage = 64;
constexpr int exit_data = 65;
constexpr int exit_runtime = 70;

struct Overrides
{
    std::optional<std::string> out;
    std::optional<int> m;
    std::optional<std::string> stencil;
    std::optional<std::string> coupling;
    std::optional<std::string> weights;
    std::optional<int> steps;
    std::optional<std::string> seed_mode;

    void attach(CLI::App* app)
    {
        app->add_option("--out", out, "Output directory");
        app->add_option("--m", m, "Number of lines in fast time");
        app->add_option("--stencil", stencil, "bdf1 | bdf2");
        app->add_option("--coupling", coupling, "phase | phase_differential | phase_algebraic | optimality");
        app->add_option("--weights", weights, "Optimality weight case a | b | c");
        app->add_option("--steps", steps, "Implicit Euler steps");
        app->add_option("--seed-mode", seed_mode, "consistent | nearly_consistent");
    }

    void apply(ScenarioConfig& c) const
    {
        if (out)
            c.out_dir = *out;
        if (m)
            c.m = *m;
        if (stencil)
            c.stencil = *stencil;
        if (coupling)
            c.coupling = *coupling == "phase" ? "phase_differential" : *coupling;
        if (weights) {
            c.weights = *weights;
            if (!coupling)
                c.coupling = "optimality";
        }
        if (steps)
            c.steps = *steps;
        if (seed_mode)
            c.seed_mode = *seed_mode;
    }
};

ScenarioConfig load_config(const std::string& path, const Overrides& ov)
{
    ScenarioConfig c;
    try {
        c = path.empty() ? ScenarioConfig{} : load_scenario(path);
        ov.apply(c);
        c.validate();
    } catch (const std::exception& e) {
        throw StageFailure("config", e.what());
    }
    return c;
}

fs::path prepare_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw StageFailure("output", "cannot create '" + dir + "': " + ec.message());
    return fs::path(dir);
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary);
    os << text;
    if (!os)
        throw StageFailure("output", "cannot write '" + p.string() + "'");
}

CsvTable frequency_table(const Trajectory& tr)
{
    CsvTable t;
    t.header = {"t", "t_normalized", "nu"};
    const double t0 = tr.times.front(), t1 = tr.times.back();
    for (std::size_t n = 0; n < tr.size(); ++n)
        t.rows.push_back({tr.times[n], t1 > t0 ? (tr.times[n] - t0) / (t1 - t0) : 0.0, tr.nu[n]});
    return t;
}

int cmd_simulate(const std::string& config, const Overrides& ov)
{
    const ScenarioConfig cfg = load_config(config, ov);
    double tol = 0.0;
    try {
        tol = rank_tolerance_from_env();
    } catch (const std::exception& e) {
        throw StageFailure("config", e.what());
    }
    const ScenarioRun run = run_scenario(cfg);
    const fs::path dir = prepare_dir(cfg.out_dir);
    try {
        write_trajectory((dir / "trajectory.csv").string(), *run.trajectory);
        write_csv((dir / "frequency.csv").string(), frequency_table(*run.trajectory));
        write_text(dir / "meta.txt", scenario_meta(run, tol));
        write_text(dir / "plot_frequency.gp", "set datafile separator ','\n"
                                              "set xlabel 't (normalised)'\nset ylabel 'nu'\n"
                                              "plot 'frequency.csv' using 2:3 every ::1 with lines title 'nu'\n");
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure("output", e.what());
    }
    const auto& tr = *run.trajectory;
    std::cout << "simulate: " << tr.size() - 1 << " steps, nu(0) = " << format_double(tr.nu.front())
              << ", nu(end) = " << format_double(tr.nu.back()) << ", max |g| = " << format_double(tr.max_drift)
              << "\n";
    if (tr.drift_exceeded)
        std::cerr << "warning: constraint drift " << format_double(tr.max_drift) << " above monitor tolerance\n";
    std::cout << "wrote " << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_index(const std::string& config, const Overrides& ov)
{
    const ScenarioConfig cfg = load_config(config, ov);
    double tol = 0.0;
    try {
        tol = rank_tolerance_from_env();
    } catch (const std::exception& e) {
        throw StageFailure("config", e.what());
    }
    const ScenarioRun run = run_scenario(cfg, false);
    IndexReport rep;
    try {
        rep = determine_index(run.system, run.init.t0, run.init.state, run.init.velocity, tol);
    } catch (const std::exception& e) {
        throw StageFailure("index", e.what());
    }
    const std::string text = format_report(rep);
    std::cout << text;
    const fs::path dir = prepare_dir(cfg.out_dir);
    write_text(dir / "index_report.txt", text);
    write_text(dir / "index_report.csv", report_csv_header() + "\r\n" + report_csv_row(rep) + "\r\n");
    write_text(dir / "meta.txt", scenario_meta(run, tol));
    if (rep.fragile)
        std::cerr << "warning: rank decision fragile (singular values within [1e-12, 1e-8] sigma_max)\n";
    if (!rep.consistent) {
        std::cerr << "warning: rank verdict " << rep.index << " disagrees with scalar verdict " << rep.scalar_index
                  << "\n";
        return 4;
    }
    return rep.index;
}

struct Variant
{
    std::string label;
    ScenarioConfig config;
};

Variant make_variant(const ScenarioConfig& base, const std::string& token)
{
    Variant v{token, base};
    if (token == "phase" || token == "phase_differential") {
        v.config.coupling = "phase_differential";
    } else if (token == "phase_algebraic") {
        v.config.coupling = "phase_algebraic";
    } else if (token == "a" || token == "b" || token == "c") {
        v.config.coupling = "optimality";
        v.config.weights = token;
        v.label = "opt_" + token;
    } else {
        throw StageFailure("config", "unknown variant '" + token + "'");
    }
    return v;
}

int cmd_compare(const std::vector<std::string>& configs, const std::string& variants, const Overrides& ov,
                const std::string& functional_weights)
{
    std::vector<Variant> list;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        ScenarioConfig c = load_config(configs[i], ov);
        list.push_back({fs::path(configs[i]).stem().string(), c});
    }
    if (!variants.empty()) {
        const ScenarioConfig base = list.empty() ? load_config("", ov) : list.front().config;
        if (list.size() == 1)
            list.clear();
        std::stringstream ss(variants);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                list.push_back(make_variant(base, tok));
    }
    if (list.size() < 2)
        throw StageFailure("config", "compare needs at least two scenarios");
    for (auto& v : list) {
        try {
            v.config.validate();
        } catch (const std::exception& e) {
            throw StageFailure("config", v.label + ": " + e.what());
        }
    }
    const auto& ref = list.front().config;
    for (const auto& v : list) {
        const auto& c = v.config;
        if (c.m != ref.m || c.steps != ref.steps || c.resolved_t_end() != ref.resolved_t_end() ||
            c.model != ref.model || c.k != ref.k)
            throw StageFailure("config", "scenario '" + v.label + "' has an incompatible grid");
    }

    std::vector<ScenarioRun> runs;
    for (const auto& v : list) {
        try {
            runs.push_back(run_scenario(v.config));
        } catch (const StageFailure& e) {
            throw StageFailure(e.stage(), v.label + ": " + e.detail());
        }
        std::cout << v.label << ": nu(0) = " << format_double(runs.back().trajectory->nu.front()) << "\n";
    }

    const Trajectory& tref = *runs.front().trajectory;
    CsvTable diff;
    diff.header = {"t", "t_normalized"};
    for (const auto& v : list)
        diff.header.push_back("nu_" + v.label);
    std::vector<FrequencyDiff> diffs;
    for (std::size_t i = 1; i < list.size(); ++i) {
        diff.header.push_back("absdiff_" + list[i].label);
        diff.header.push_back("reldiff_" + list[i].label);
        try {
            diffs.push_back(frequency_diff(*runs[i].trajectory, tref));
        } catch (const std::exception& e) {
            throw StageFailure("compare", e.what());
        }
    }
    const double t0 = tref.times.front(), t1 = tref.times.back();
    for (std::size_t n = 0; n < tref.size(); ++n) {
        std::vector<double> row{tref.times[n], (tref.times[n] - t0) / (t1 - t0)};
        for (const auto& r : runs)
            row.push_back(r.trajectory->nu[n]);
        for (const auto& d : diffs) {
            row.push_back(d.absolute[n]);
            row.push_back(d.relative[n]);
        }
        diff.rows.push_back(std::move(row));
    }

    Vector w_y, w_z;
    const auto& model = runs.front().system.model();
    expand_weights(functional_weights, model.n_y, model.n_z, w_y, w_z);
    CsvTable func;
    func.header = {"t", "t_normalized"};
    std::vector<FunctionalSeries> series;
    for (std::size_t i = 0; i < list.size(); ++i) {
        func.header.push_back("J_" + list[i].label);
        series.push_back(functional_pointwise(*runs[i].trajectory, runs[i].system.op(), w_y, w_z));
    }
    for (std::size_t n = 0; n < tref.size(); ++n) {
        std::vector<double> row{tref.times[n], (tref.times[n] - t0) / (t1 - t0)};
        for (const auto& s : series)
            row.push_back(s.values[n]);
        func.rows.push_back(std::move(row));
    }

    const fs::path dir = prepare_dir(ref.out_dir);
    write_csv((dir / "frequency_diff.csv").string(), diff);
    write_csv((dir / "functional.csv").string(), func);
    std::ostringstream summary;
    summary << "reference: " << list.front().label << "\nfunctional_weights: " << functional_weights << "\n";
    for (std::size_t i = 0; i < diffs.size(); ++i)
        summary << list[i + 1].label << ": max_abs = " << format_double(diffs[i].max_abs)
                << ", mean_abs = " << format_double(diffs[i].mean_abs)
                << ", max_rel = " << format_double(diffs[i].max_rel)
                << ", mean_rel = " << format_double(diffs[i].mean_rel) << "\n";
    write_text(dir / "compare_summary.txt", summary.str());
    std::cout << summary.str();
    return 0;
}

int cmd_reconstruct(const std::string& path, const std::string& out, int samples)
{
    Trajectory tr;
    try {
        tr = read_trajectory(path);
    } catch (const std::exception& e) {
        throw StageFailure("input", path + ": " + e.what());
    }
    ReconstructOptions opts;
    opts.samples_per_step = samples;
    const ReconstructedSignal sig = reconstruct(tr, opts);

    CsvTable rec;
    rec.header = {"t"};
    for (int c = 1; c <= sig.n_y; ++c)
        rec.header.push_back("y_" + std::to_string(c));
    for (int c = 1; c <= sig.n_z; ++c)
        rec.header.push_back("z_" + std::to_string(c));
    CsvTable psi;
    psi.header = {"t", "psi", "psi_mod1"};
    for (std::size_t k = 0; k < sig.times.size(); ++k) {
        std::vector<double> row{sig.times[k]};
        for (Eigen::Index c = 0; c < sig.values.cols(); ++c)
            row.push_back(sig.values(static_cast<Eigen::Index>(k), c));
        rec.rows.push_back(std::move(row));
        psi.rows.push_back({sig.times[k], sig.psi[k], sig.psi_fraction[k]});
    }
    const fs::path dir = prepare_dir(out.empty() ? fs::path(path).parent_path().string() : out);
    write_csv((dir / "reconstructed.csv").string(), rec);
    write_csv((dir / "psi.csv").string(), psi);
    std::cout << "reconstruct: " << sig.times.size() << " samples, psi(end) = " << format_double(sig.psi.back())
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mpdae: method-of-lines solver for warped multirate DAEs"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> configs;
    std::string variants;
    std::string functional_weights = "b";
    std::string trajectory_path, reconstruct_out;
    int samples = 10;
    Overrides sim_ov, idx_ov, cmp_ov;

    auto* sim = app.add_subcommand("simulate", "Seed, initialise and integrate a scenario");
    sim->add_option("--config", config, "Scenario INI file");
    sim_ov.attach(sim);

    auto* idx = app.add_subcommand("index", "Index of the MOL system at the consistent initial point");
    idx->add_option("--config", config, "Scenario INI file");
    idx_ov.attach(idx);

    auto* cmp = app.add_subcommand("compare", "Compare local frequencies and functionals of several scenarios");
    cmp->add_option("--config", configs, "Scenario INI file (repeatable)");
    cmp->add_option("--variants", variants, "Comma list of variants of the base config: phase, phase_algebraic, a, b, c");
    cmp->add_option("--functional-weights", functional_weights, "Weight case for the functional: a | b | c");
    cmp_ov.attach(cmp);

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct x(t) and the phase from a trajectory file");
    rec->add_option("--trajectory", trajectory_path, "trajectory.csv written by simulate")->required();
    rec->add_option("--out", reconstruct_out, "Output directory (default: next to the trajectory)");
    rec->add_option("--samples", samples, "Samples per slow-time step")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*sim)
            return cmd_simulate(config, sim_ov);
        if (*idx)
            return cmd_index(config, idx_ov);
        if (*cmp)
            return cmd_compare(configs, variants, cmp_ov, functional_weights);
        if (*rec)
            return cmd_reconstruct(trajectory_path, reconstruct_out, samples);
    } catch (const StageFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.stage() == "config" || e.stage() == "input" ? exit_data : exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}
