#include "mpdae/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mpdae/csv.hpp"
#include "mpdae/error.hpp"

namespace mpdae {

namespace pt = boost::property_tree;

namespace {

Vector parse_vector(const std::string& text, const std::string& key)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(parse_double(item, 0));
        } catch (const ParseError&) {
            throw InvalidArgument("coupling." + key + ": '" + item + "' is not a number");
        }
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join_vector(const Vector& v)
{
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + format_double(v(i));
    return s;
}

template <typename T>
T get_value(const pt::ptree& sec, const std::string& section, const std::string& key, T fallback)
{
    const auto node = sec.get_child_optional(key);
    if (!node)
        return fallback;
    const std::string text = node->data();
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else if constexpr (std::is_same_v<T, int>) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(text, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != text.size())
            throw InvalidArgument(section + "." + key + ": expected an integer, got '" + text + "'");
        return v;
    } else {
        try {
            return parse_double(text, 0);
        } catch (const ParseError&) {
            throw InvalidArgument(section + "." + key + ": expected a number, got '" + text + "'");
        }
    }
}

void reject_unknown(const pt::ptree& sec, const std::string& section, const std::set<std::string>& keys)
{
    for (const auto& kv : sec)
        if (!keys.count(kv.first))
            throw InvalidArgument("unknown key '" + kv.first + "' in [" + section + "]");
}

} // namespace

void ScenarioConfig::validate() const
{
    if (model == "ring_oscillator") {
        RingOscillatorParams p;
        p.k = k;
        p.C = C;
        p.R = R;
        p.G = G;
        p.validate();
    } else if (model != "linear") {
        throw InvalidArgument("model.type must be ring_oscillator or linear, got '" + model + "'");
    }
    if (input != "harmonic" && input != "sinsq" && input != "constant")
        throw InvalidArgument("input.kind must be harmonic, sinsq or constant");
    if (input != "constant" && !(period > 0.0))
        throw InvalidArgument("input.period must be positive");
    stencil_by_name(stencil);
    if (m < 3)
        throw InvalidArgument("grid.m must be at least 3");
    if (coupling != "phase_differential" && coupling != "phase_algebraic" && coupling != "optimality")
        throw InvalidArgument("coupling.kind must be phase_differential, phase_algebraic or optimality");
    const int n = model == "linear" ? 2 : k;
    if (coupling != "optimality" && (component < 1 || component > n))
        throw InvalidArgument("coupling.component out of range 1.." + std::to_string(n));
    if (coupling == "optimality" && weights != "a" && weights != "b" && weights != "c" && weights != "explicit")
        throw InvalidArgument("coupling.weights must be a, b, c or explicit");
    if (coupling == "optimality" && weights == "explicit" && (w_y.size() != n || w_z.size() != n))
        throw InvalidArgument("explicit weights need w_y and w_z of length " + std::to_string(n));
    if (seed_component < 1 || seed_component > n)
        throw InvalidArgument("init.seed_component out of range");
    if (seed_mode != "consistent" && seed_mode != "nearly_consistent")
        throw InvalidArgument("init.mode must be consistent or nearly_consistent");
    integrator().validate();
    if (!(resolved_t_end() > 0.0))
        throw InvalidArgument("integrator.t_end must be positive");
}

double ScenarioConfig::resolved_t_end() const
{
    if (t_end)
        return *t_end;
    return input == "constant" ? 1.0 : period;
}

IntegratorConfig ScenarioConfig::integrator() const
{
    IntegratorConfig c;
    c.steps = steps;
    c.t_end = resolved_t_end();
    c.newton_tol = newton_tol;
    c.max_newton = max_newton;
    return c;
}

SeedOptions ScenarioConfig::seed_options() const
{
    SeedOptions o;
    o.component = seed_component - 1;
    o.level = seed_level;
    o.rel_tol = seed_rel_tol;
    return o;
}

InitMode ScenarioConfig::init_mode() const
{
    return seed_mode == "nearly_consistent" ? InitMode::NearlyConsistent : InitMode::Consistent;
}

ScenarioConfig parse_scenario(const std::string& ini_text)
{
    pt::ptree tree;
    std::istringstream is(ini_text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }

    ScenarioConfig c;
    static const std::set<std::string> sections{"model", "input", "grid", "coupling", "integrator",
                                                "init", "output", "run", "build"};
    for (const auto& kv : tree) {
        if (!sections.count(kv.first))
            throw InvalidArgument("unknown section [" + kv.first + "]");
        if (kv.second.empty() && !kv.second.data().empty())
            throw InvalidArgument("key '" + kv.first + "' outside of a section");
    }
    const pt::ptree empty;
    auto sec = [&](const char* name) -> const pt::ptree& {
        const auto child = tree.get_child_optional(name);
        return child ? *child : empty;
    };

    const auto& model = sec("model");
    reject_unknown(model, "model", {"type", "k", "C", "R", "G", "omega", "coupling"});
    c.model = get_value(model, "model", "type", c.model);
    c.k = get_value(model, "model", "k", c.k);
    c.C = get_value(model, "model", "C", c.C);
    c.R = get_value(model, "model", "R", c.R);
    c.G = get_value(model, "model", "G", c.G);
    c.omega = get_value(model, "model", "omega", c.omega);
    c.linear_coupling = get_value(model, "model", "coupling", c.linear_coupling);

    const auto& input = sec("input");
    reject_unknown(input, "input", {"kind", "period", "amplitude", "value"});
    c.input = get_value(input, "input", "kind", c.input);
    if (c.input == "sinsq")
        c.amplitude = 2.0;
    c.period = get_value(input, "input", "period", c.period);
    c.amplitude = get_value(input, "input", "amplitude", c.amplitude);
    c.input_value = get_value(input, "input", "value", c.input_value);

    const auto& grid = sec("grid");
    reject_unknown(grid, "grid", {"m", "stencil"});
    c.m = get_value(grid, "grid", "m", c.m);
    c.stencil = get_value(grid, "grid", "stencil", c.stencil);

    const auto& coupling = sec("coupling");
    reject_unknown(coupling, "coupling", {"kind", "component", "eta", "weights", "w_y", "w_z"});
    c.coupling = get_value(coupling, "coupling", "kind", c.coupling);
    c.component = get_value(coupling, "coupling", "component", c.component);
    c.eta = get_value(coupling, "coupling", "eta", c.eta);
    c.weights = get_value(coupling, "coupling", "weights", c.weights);
    if (coupling.get_child_optional("w_y"))
        c.w_y = parse_vector(coupling.get<std::string>("w_y"), "w_y");
    if (coupling.get_child_optional("w_z"))
        c.w_z = parse_vector(coupling.get<std::string>("w_z"), "w_z");
    if ((c.w_y.size() || c.w_z.size()) && !coupling.get_child_optional("weights"))
        c.weights = "explicit";

    const auto& integ = sec("integrator");
    reject_unknown(integ, "integrator", {"steps", "t_end", "newton_tol", "max_newton"});
    c.steps = get_value(integ, "integrator", "steps", c.steps);
    if (integ.get_child_optional("t_end"))
        c.t_end = get_value(integ, "integrator", "t_end", 0.0);
    c.newton_tol = get_value(integ, "integrator", "newton_tol", c.newton_tol);
    c.max_newton = get_value(integ, "integrator", "max_newton", c.max_newton);

    const auto& init = sec("init");
    reject_unknown(init, "init", {"mode", "seed_component", "seed_level", "seed_rel_tol"});
    c.seed_mode = get_value(init, "init", "mode", c.seed_mode);
    c.seed_component = get_value(init, "init", "seed_component", c.seed_component);
    c.seed_level = get_value(init, "init", "seed_level", c.seed_level);
    c.seed_rel_tol = get_value(init, "init", "seed_rel_tol", c.seed_rel_tol);

    const auto& output = sec("output");
    reject_unknown(output, "output", {"dir"});
    c.out_dir = get_value(output, "output", "dir", c.out_dir);
    return c;
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw InvalidArgument("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_ini(const ScenarioConfig& c)
{
    std::ostringstream os;
    os << "[model]\n"
       << "type = " << c.model << '\n';
    if (c.model == "ring_oscillator")
        os << "k = " << c.k << "\nC = " << format_double(c.C) << "\nR = " << format_double(c.R)
           << "\nG = " << format_double(c.G) << '\n';
    else
        os << "omega = " << format_double(c.omega) << "\ncoupling = " << format_double(c.linear_coupling) << '\n';
    os << "\n[input]\nkind = " << c.input << "\nperiod = " << format_double(c.period)
       << "\namplitude = " << format_double(c.amplitude) << "\nvalue = " << format_double(c.input_value) << '\n';
    os << "\n[grid]\nm = " << c.m << "\nstencil = " << c.stencil << '\n';
    os << "\n[coupling]\nkind = " << c.coupling << '\n';
    if (c.coupling == "optimality") {
        os << "weights = " << c.weights << '\n';
        if (c.weights == "explicit")
            os << "w_y = " << join_vector(c.w_y) << "\nw_z = " << join_vector(c.w_z) << '\n';
    } else {
        os << "component = " << c.component << "\neta = " << format_double(c.eta) << '\n';
    }
    os << "\n[integrator]\nsteps = " << c.steps << "\nt_end = " << format_double(c.resolved_t_end())
       << "\nnewton_tol = " << format_double(c.newton_tol) << "\nmax_newton = " << c.max_newton << '\n';
    os << "\n[init]\nmode = " << c.seed_mode << "\nseed_component = " << c.seed_component
       << "\nseed_level = " << format_double(c.seed_level) << "\nseed_rel_tol = " << format_double(c.seed_rel_tol)
       << '\n';
    os << "\n[output]\ndir = " << c.out_dir << '\n';
    return os.str();
}

void expand_weights(const std::string& w, int n_y, int n_z, Vector& w_y, Vector& w_z)
{
    if (w == "a") {
        w_y = Vector::Ones(n_y);
        w_z = Vector::Ones(n_z);
    } else if (w == "b") {
        w_y = Vector::Ones(n_y);
        w_z = Vector::Zero(n_z);
    } else if (w == "c") {
        w_y = Vector::Zero(n_y);
        w_z = Vector::Ones(n_z);
    } else if (w != "explicit") {
        throw InvalidArgument("unknown weight case '" + w + "'");
    }
}

SemiExplicitModel build_model(const ScenarioConfig& c)
{
    if (c.model == "linear")
        return make_linear_oscillator(c.omega, c.linear_coupling);
    RingOscillatorParams p;
    p.k = c.k;
    p.C = c.C;
    p.R = c.R;
    p.G = c.G;
    if (c.input == "harmonic")
        p.input = make_input_harmonic(c.period, c.amplitude);
    else if (c.input == "sinsq")
        p.input = make_input_sinsq(c.period, c.amplitude);
    else
        p.input = make_input_constant(c.input_value);
    return make_ring_oscillator(p);
}

CouplingCondition build_coupling(const ScenarioConfig& c, const SemiExplicitModel& model)
{
    if (c.coupling == "phase_differential")
        return CouplingCondition::phase_differential(c.component - 1, SlowFunction::constant(c.eta));
    if (c.coupling == "phase_algebraic")
        return CouplingCondition::phase_algebraic(c.component - 1, SlowFunction::constant(c.eta));
    Vector w_y = c.w_y, w_z = c.w_z;
    expand_weights(c.weights, model.n_y, model.n_z, w_y, w_z);
    return CouplingCondition::optimality(w_y, w_z);
}

MolSystem build_system(const ScenarioConfig& c)
{
    c.validate();
    SemiExplicitModel model = build_model(c);
    CouplingCondition coupling = build_coupling(c, model);
    return MolSystem(std::move(model), stencil_by_name(c.stencil), c.m, std::move(coupling));
}

namespace {

template <typename F>
auto stage(const char* name, F&& fn)
{
    try {
        return fn();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(name, e.what());
    }
}

} // namespace

ScenarioRun run_scenario(const ScenarioConfig& cfg, bool integrate_trajectory)
{
    MolSystem sys = stage("config", [&] { return build_system(cfg); });
    PeriodicSeed seed = stage("seed", [&] { return periodic_seed(sys.model(), cfg.m, cfg.seed_options()); });
    ConsistentPoint init = stage("init", [&] { return consistent_init(sys, seed.as_guess(0.0), cfg.init_mode()); });
    ScenarioRun run{cfg, sys, seed, init, std::nullopt};
    if (integrate_trajectory)
        run.trajectory = stage("integrate", [&] { return integrate(sys, init, cfg.integrator()); });
    return run;
}

std::string scenario_meta(const ScenarioRun& run, double rank_tol)
{
    std::ostringstream os;
    os << scenario_to_ini(run.config);
    os << "\n[run]\n";
    os << "n_bar = " << run.system.n_bar() << '\n';
    os << "seed_nu = " << format_double(run.seed.nu) << '\n';
    os << "seed_period = " << format_double(run.seed.period) << '\n';
    os << "seed_dt = " << format_double(run.seed.dt) << '\n';
    os << "seed_periods_observed = " << run.seed.periods_observed << '\n';
    os << "nu0 = " << format_double(run.init.state.nu) << '\n';
    os << "rank_tol = " << format_double(rank_tol) << '\n';
    if (run.trajectory) {
        const auto& tr = *run.trajectory;
        int max_it = 0;
        for (int it : tr.iterations)
            max_it = std::max(max_it, it);
        os << "max_newton_iterations = " << max_it << '\n';
        os << "max_constraint_residual = " << format_double(tr.max_drift) << '\n';
        os << "nu_final = " << format_double(tr.nu.back()) << '\n';
    }
    os << "\n[build]\n";
    os << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
#if defined(__clang__)
    os << "compiler = clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__ << '\n';
#elif defined(__GNUC__)
    os << "compiler = gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__ << '\n';
#endif
    os << "cxx_standard = " << __cplusplus << '\n';
    return os.str();
}

} // namespace mpdae
