#include "mvsim/runner.hpp"

#include "mvsim/diagnostics.hpp"
#include "mvsim/error.hpp"
#include "mvsim/properties.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace mvsim {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

/// View of one config table; reading a key marks it known, `finish` rejects
/// everything else.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) config_error("'" + path_ + "' must be a table");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& raw(const std::string& key) {
        if (!has(key)) config_error("missing key '" + key_path(key) + "'");
        return j_.at(key);
    }

    double real(const std::string& key) {
        const json& v = raw(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "+inf") return kInf;
            if (s == "-inf") return -kInf;
        }
        config_error("key '" + key_path(key) + "' must be a number");
    }
    double real(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

    std::uint64_t integer(const std::string& key) {
        const json& v = raw(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        config_error("key '" + key_path(key) + "' must be a nonnegative integer");
    }
    std::uint64_t integer(const std::string& key, std::uint64_t fallback) { return has(key) ? integer(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) config_error("key '" + key_path(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) config_error("key '" + key_path(key) + "' must be a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> reals(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) config_error("key '" + key_path(key) + "' must be a list of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) config_error("key '" + key_path(key) + "' must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Table sub(const std::string& key) { return Table(raw(key), key_path(key)); }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) config_error("unknown key '" + key_path(k) + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

DriftSpec parse_drift(Table t) {
    const auto kind = t.string("kind");
    DriftSpec out;
    if (kind == "mean_field_linear") out = MeanFieldLinearDrift{t.real("a", 0.0), t.real("b_bar", 0.0)};
    else if (kind == "constant") out = ConstantDrift{t.real("value", 0.0)};
    else config_error("unknown drift kind '" + kind + "'");
    t.finish();
    return out;
}

DiffusionSpec parse_diffusion(Table t) {
    const auto kind = t.string("kind");
    DiffusionSpec out;
    if (kind == "power") out = PowerDiffusion{t.real("c", 1.0), t.real("theta", 1.0), t.real("smoothing", 0.0)};
    else if (kind == "constant") out = ConstantDiffusion{t.real("value", 0.0)};
    else config_error("unknown diffusion kind '" + kind + "'");
    t.finish();
    return out;
}

InitialLaw parse_initial(Table t) {
    const auto kind = t.string("kind");
    InitialLaw out;
    if (kind == "constant") out = ConstantInitial{t.real("value", 0.0)};
    else if (kind == "uniform") out = UniformInitial{t.real("a"), t.real("b")};
    else if (kind == "gaussian") out = GaussianInitial{t.real("mean", 0.0), t.real("stddev", 1.0)};
    else if (kind == "samples") out = SampleInitial{t.reals("values")};
    else config_error("unknown initial law kind '" + kind + "'");
    t.finish();
    return out;
}

ConvexPotential parse_potential(Table t) {
    const auto kind = t.string("kind");
    auto build = [&]() -> ConvexPotential {
        if (kind == "indicator_interval") return ConvexPotential::indicator_interval(t.real("lo", -kInf), t.real("hi", kInf));
        if (kind == "abs_power") return ConvexPotential::abs_power(t.real("p"), t.real("scale", 1.0));
        if (kind == "zero") return ConvexPotential::zero();
        if (kind == "max_affine") {
            const json& pieces = t.raw("pieces");
            std::vector<AffinePiece> out;
            if (!pieces.is_array()) config_error("key '" + t.key_path("pieces") + "' must be a list of [slope, intercept]");
            for (const auto& p : pieces) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    config_error("key '" + t.key_path("pieces") + "' must be a list of [slope, intercept]");
                }
                out.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            return ConvexPotential::max_affine(std::move(out));
        }
        config_error("unknown potential kind '" + kind + "'");
    };
    try {
        auto psi = build();
        t.finish();
        return psi;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(t.key_path("kind") + ": " + e.what());
    }
}

DriverSpec parse_driver(Table t) {
    const auto kind = t.string("kind");
    DriverSpec out;
    if (kind == "zero") out = ZeroDriver{};
    else if (kind == "linear") {
        out = LinearDriver{t.real("y", 0.0), t.real("z", 0.0), t.real("x", 0.0), t.real("mean_y", 0.0),
                           t.real("constant", 0.0)};
    } else if (kind == "capped_power") out = CappedPowerDriver{t.real("coef", -1.0), t.real("k", 0.5)};
    else if (kind == "saturating") {
        out = SaturatingDriver{t.real("y", 0.0), t.real("z", 0.0), t.real("x", 0.0), t.real("constant", 0.0)};
    } else config_error("unknown driver kind '" + kind + "'");
    t.finish();
    return out;
}

TerminalSpec parse_terminal(Table t) {
    const auto kind = t.string("kind");
    TerminalSpec out;
    if (kind == "identity") out = IdentityTerminal{};
    else if (kind == "square") out = SquareTerminal{};
    else if (kind == "linear") out = LinearTerminal{t.real("x", 1.0), t.real("mean", 0.0), t.real("constant", 0.0)};
    else config_error("unknown terminal kind '" + kind + "'");
    t.finish();
    return out;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::mvsde: return "mvsde";
        case Scheme::penalized_explicit: return "penalized_explicit";
        case Scheme::penalized_splitting: return "penalized_splitting";
        case Scheme::projection: return "projection";
    }
    return "unknown";
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    f << body;
}

std::string csv_row(std::initializer_list<std::string> fields) {
    std::string row;
    bool first = true;
    for (const auto& f : fields) {
        if (!first) row += ',';
        row += f;
        first = false;
    }
    row += '\n';
    return row;
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

double default_test_value(const Scenario& sc) {
    if (sc.vi_test_value) return *sc.vi_test_value;
    return sc.potential ? sc.potential->project(0.0) : 0.0;
}

json forward_artifacts(const Scenario& sc, const ForwardSolution& sol) {
    fs::create_directories(sc.output);
    const std::size_t n = sol.particles, m = sol.steps;

    if (sc.write_paths && sol.has_paths) {
        std::string body = "particle,step,time,x,dphi\n";
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k <= m; ++k) {
                body += csv_row({std::to_string(i), std::to_string(k), format_real(sol.times[k]),
                                 format_real(sol.x(i, k)), k < m ? format_real(sol.dphi(i, k)) : std::string()});
            }
        }
        write_file(sc.output / "paths.csv", body);
    }

    {
        const auto initial = EmpiricalMeasure::from_samples(sol.initial);
        std::string body = "step,time,mean,abs_moment_1,abs_moment_2,w1_to_initial\n";
        for (std::size_t k = 0; k <= m; ++k) {
            if (!sol.has_paths && k != 0 && k != m) continue;
            const auto& st = sol.step_stats[k];
            const double w1 = wasserstein(1.0, sol.measure_at(k), initial);
            body += csv_row({std::to_string(k), format_real(sol.times[k]), format_real(st.mean),
                             format_real(st.abs_moment1), format_real(st.abs_moment2), format_real(w1)});
        }
        write_file(sc.output / "measures.csv", body);
    }

    json report;
    report["name"] = sc.name;
    report["version"] = kVersion;
    report["seed"] = sol.seed;
    report["scheme"] = scheme_name(sol.scheme);
    report["config"] = sc.source;
    report["particles"] = n;
    report["steps"] = m;
    report["horizon"] = sol.horizon;
    json moments = json::array();
    for (const auto& e : moment_report(sol, sc.moments).entries) {
        moments.push_back({{"p", e.p},
                           {"estimator", e.estimator.value},
                           {"std_error", e.estimator.std_error},
                           {"reference", e.reference},
                           {"ratio", e.ratio}});
    }
    report["moments"] = moments;
    report["terminal_mean"] = estimate_json(mean_estimate(sol.terminal));
    if (sc.potential) {
        report["terminal_violation"] = sol.terminal_violation();
        if (sol.has_paths) {
            const double c = default_test_value(sc);
            const auto vi = vi_residual(sol, *sc.potential, constant_path(c));
            report["vi_residual"] = {
                {"test_path", c}, {"max", vi.max_residual}, {"tolerance", vi.tolerance}, {"pass", vi.pass}};
        }
    }
    return report;
}

void write_report(const Scenario& sc, const json& report) {
    write_file(sc.output / "report.json", report.dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario load_scenario(const json& doc) {
    Scenario sc;
    sc.source = doc;
    Table root(doc, "");
    sc.name = root.string("name", "scenario");

    {
        Table f = root.sub("forward");
        sc.forward.drift = f.has("drift") ? parse_drift(f.sub("drift")) : DriftSpec{ConstantDrift{}};
        sc.forward.diffusion = f.has("diffusion") ? parse_diffusion(f.sub("diffusion")) : DiffusionSpec{ConstantDiffusion{}};
        sc.solver.initial = f.has("initial") ? parse_initial(f.sub("initial")) : InitialLaw{ConstantInitial{}};
        f.finish();
    }
    if (root.has("potential")) sc.potential = parse_potential(root.sub("potential"));

    {
        Table s = root.sub("solver");
        sc.solver.seed = s.integer("seed");
        sc.solver.horizon = s.real("horizon", 1.0);
        sc.solver.steps = s.integer("steps", 100);
        sc.solver.particles = s.integer("particles", 1000);
        sc.solver.penalization = s.real("penalization", 100.0);
        sc.solver.crn_fine_steps = s.integer("crn_fine_steps", 0);
        sc.solver.threads = static_cast<unsigned>(s.integer("threads", 1));
        sc.solver.store_paths = s.boolean("store_paths", true);
        const auto mode = s.string("mode", "splitting");
        if (mode == "splitting") sc.solver.mode = PenaltyMode::splitting;
        else if (mode == "explicit") sc.solver.mode = PenaltyMode::explicit_euler;
        else config_error("key 'solver.mode' must be 'splitting' or 'explicit'");
        const auto scheme = s.string("scheme", sc.potential ? "penalized" : "mvsde");
        if (scheme == "mvsde") sc.scheme = Scheme::mvsde;
        else if (scheme == "penalized") {
            sc.scheme = sc.solver.mode == PenaltyMode::splitting ? Scheme::penalized_splitting : Scheme::penalized_explicit;
        } else if (scheme == "projection") sc.scheme = Scheme::projection;
        else config_error("key 'solver.scheme' must be 'mvsde', 'penalized' or 'projection'");
        s.finish();
        if (sc.scheme != Scheme::mvsde && !sc.potential) config_error("missing key 'potential' for scheme '" + scheme + "'");
        if (sc.scheme == Scheme::projection && !sc.potential->is_indicator()) {
            config_error("key 'potential.kind' must be 'indicator_interval' for the projection scheme");
        }
        try {
            sc.solver.validate();
        } catch (const Error& e) {
            config_error(std::string("solver: ") + e.what());
        }
    }

    if (root.has("backward")) {
        Table b = root.sub("backward");
        BackwardSpec spec;
        spec.coefficients.driver = b.has("driver") ? parse_driver(b.sub("driver")) : DriverSpec{ZeroDriver{}};
        spec.coefficients.terminal = b.has("terminal") ? parse_terminal(b.sub("terminal")) : TerminalSpec{IdentityTerminal{}};
        spec.coefficients.l = b.real("l", 2.0);
        spec.coefficients.k = b.real("k", 0.5);
        if (b.has("potential2")) spec.potential = parse_potential(b.sub("potential2"));
        spec.config.penalization = b.real("penalization", 100.0);
        spec.config.truncation = b.real("truncation", kInf);
        spec.config.regression.degree = static_cast<unsigned>(b.integer("degree", 3));
        spec.config.regression.ridge = b.real("ridge", 1e-10);
        spec.config.picard_sweeps = static_cast<unsigned>(b.integer("picard_sweeps", 3));
        spec.config.picard_tolerance = b.real("picard_tolerance", 1e-8);
        spec.config.strict_picard = b.boolean("strict_picard", false);
        b.finish();
        try {
            validate_exponents(spec.coefficients);
            spec.config.validate();
        } catch (const Error& e) {
            config_error(std::string("backward: ") + e.what());
        }
        sc.backward = std::move(spec);
    }

    if (root.has("diagnostics")) {
        Table d = root.sub("diagnostics");
        if (d.has("moments")) sc.moments = d.reals("moments");
        if (d.has("vi_test_value")) sc.vi_test_value = d.real("vi_test_value");
        if (d.has("sweep")) {
            Table w = d.sub("sweep");
            SweepSpec sw;
            const auto axis = w.string("axis");
            if (axis == "steps") sw.axis = SweepSpec::Axis::steps;
            else if (axis == "penalization") sw.axis = SweepSpec::Axis::penalization;
            else config_error("key 'diagnostics.sweep.axis' must be 'steps' or 'penalization'");
            sw.values = w.reals("values");
            sw.p = w.real("p", 2.0);
            w.finish();
            sc.sweep = std::move(sw);
        }
        d.finish();
    }

    if (root.has("output")) {
        Table o = root.sub("output");
        sc.output = o.string("directory", "out");
        sc.write_paths = o.boolean("write_paths", true);
        o.finish();
    }
    root.finish();
    return sc;
}

Scenario load_scenario_file(const fs::path& path) { return load_scenario_file(path, {}); }

Scenario load_scenario_file(const fs::path& path, const RunOptions& opts) {
    std::ifstream f(path);
    if (!f) config_error("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        config_error("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    // A command-line seed stands in for a missing one in the file.
    if (opts.seed && doc.is_object() && doc.contains("solver") && doc["solver"].is_object()) {
        doc["solver"]["seed"] = *opts.seed;
    }
    auto sc = load_scenario(doc);
    apply_overrides(sc, opts);
    return sc;
}

void apply_overrides(Scenario& sc, const RunOptions& opts) {
    if (opts.seed) {
        sc.solver.seed = *opts.seed;
        sc.source["solver"]["seed"] = *opts.seed;
    }
    if (opts.out) sc.output = *opts.out;
    if (opts.threads) {
        sc.solver.threads = std::max(1u, *opts.threads);
    }
}

ForwardSolution simulate(const Scenario& sc) {
    switch (sc.scheme) {
        case Scheme::mvsde: return simulate_mvsde(sc.forward, sc.solver);
        case Scheme::projection: return simulate_reflected_projection(sc.forward, sc.potential->domain(), sc.solver);
        default: return simulate_mvsvi_penalized(sc.forward, *sc.potential, sc.solver);
    }
}

int run_forward(const Scenario& sc) {
    const auto sol = simulate(sc);
    write_report(sc, forward_artifacts(sc, sol));
    return 0;
}

int run_fbsvs(const Scenario& sc) {
    if (!sc.backward) config_error("missing key 'backward'");
    Scenario fsc = sc;
    fsc.solver.store_paths = true;
    const auto fwd = simulate(fsc);
    auto report = forward_artifacts(fsc, fwd);

    BackwardConfig bcfg = sc.backward->config;
    bcfg.threads = sc.solver.threads;
    const auto bwd = solve_penalized_bsde(fwd, sc.backward->coefficients, sc.backward->potential, bcfg);

    const std::size_t n = bwd.particles, m = bwd.steps;
    std::string body = "particle,step,y,z,dphi2\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k <= m; ++k) {
            body += csv_row({std::to_string(i), std::to_string(k), format_real(bwd.y(i, k)),
                             k < m ? format_real(bwd.z(i, k)) : std::string(),
                             k < m ? format_real(bwd.dphi2(i, k)) : std::string()});
        }
    }
    write_file(sc.output / "backward.csv", body);

    json b;
    const auto [y0, y0_se] = bwd.y0_estimate();
    b["y0"] = {{"value", y0}, {"std_error", y0_se}};
    b["sweeps"] = bwd.sweeps;
    b["picard_gap"] = bwd.picard_gap;
    b["picard_converged"] = bwd.picard_converged;
    b["mean_violation"] = bwd.mean_violation();
    const auto energy = backward_energy(bwd);
    b["sup_y2"] = estimate_json(energy.sup_y2);
    b["z_energy"] = energy.z_energy;
    b["grad_energy"] = energy.grad_energy;
    const double c = sc.backward->potential.project(0.0);
    const auto vi = vi_residual(bwd, sc.backward->potential, constant_path(c));
    b["vi_residual"] = {{"test_path", c}, {"max", vi.max_residual}, {"tolerance", vi.tolerance}, {"pass", vi.pass}};
    report["backward"] = b;
    write_report(sc, report);
    return 0;
}

int rate_study(const Scenario& sc) {
    if (!sc.sweep) config_error("missing key 'diagnostics.sweep'");
    const auto& sw = *sc.sweep;
    if (sw.values.size() < 3) throw Error(ErrorCode::InsufficientSweep, "rate study needs at least 3 sweep values");

    SolverConfig base = sc.solver;
    base.store_paths = true;
    if (sw.axis == SweepSpec::Axis::steps && base.crn_fine_steps == 0) {
        std::size_t l = 1;
        for (double v : sw.values) {
            if (!(v >= 1.0) || v != std::floor(v)) config_error("key 'diagnostics.sweep.values' must hold step counts");
            l = std::lcm(l, 2 * static_cast<std::size_t>(v));
        }
        base.crn_fine_steps = l;
    }

    Scenario run = sc;
    std::string body = "axis_value,gap,std_error,constraint_violation\n";
    std::vector<std::pair<double, double>> pts;
    for (double v : sw.values) {
        SolverConfig a = base, b = base;
        if (sw.axis == SweepSpec::Axis::steps) {
            a.steps = static_cast<std::size_t>(v);
            b.steps = 2 * a.steps;
        } else {
            a.penalization = v;
            b.penalization = 2.0 * v;
        }
        run.solver = a;
        const auto sa = simulate(run);
        run.solver = b;
        const auto sb = simulate(run);
        const auto gap = cauchy_gap_estimate(sa, sb, sw.p);
        pts.emplace_back(v, gap.value);
        body += csv_row({format_real(v), format_real(gap.value), format_real(gap.std_error),
                         format_real(sa.terminal_violation())});
    }
    fs::create_directories(sc.output);
    write_file(sc.output / "rates.csv", body);
    const auto fit = rate_fit(pts);
    json rep;
    rep["name"] = sc.name;
    rep["version"] = kVersion;
    rep["axis"] = sw.axis == SweepSpec::Axis::steps ? "steps" : "penalization";
    rep["p"] = sw.p;
    rep["slope"] = fit.slope;
    rep["intercept"] = fit.intercept;
    rep["config"] = sc.source;
    write_file(sc.output / "rates.json", rep.dump(2) + "\n");
    return 0;
}

int check_properties(const std::string& suite, const fs::path& out, unsigned threads) {
    const auto checks = run_suite(suite, threads);
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.pass;
        arr.push_back({{"suite", c.suite},
                       {"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"margin", c.margin},
                       {"detail", c.detail}});
    }
    json rep{{"suite", suite}, {"version", kVersion}, {"pass", all}, {"checks", arr}};
    fs::create_directories(out);
    write_file(out / "properties.json", rep.dump(2) + "\n");
    return all ? 0 : 4;
}

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->code()) {
            case ErrorCode::ConfigError:
            case ErrorCode::UnknownSuite:
            case ErrorCode::InsufficientSweep:
                return 2;
            default:
                return 3;
        }
    }
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
    return 3;
}

std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error(ErrorCode::InvalidArgument, "no column '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream is(line);
        while (std::getline(is, cur, ',')) out.push_back(cur);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    CsvTable t;
    std::string line;
    if (std::getline(f, line)) t.header = split(line);
    while (std::getline(f, line)) {
        auto row = split(line);
        if (row.size() != t.header.size()) {
            throw Error(ErrorCode::InvalidArgument, "ragged row in '" + path.string() + "'");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

double parse_real(const std::string& field) {
    if (field.empty()) return std::nan("");
    double v = 0.0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (r.ec != std::errc() || r.ptr != field.data() + field.size()) {
        throw Error(ErrorCode::InvalidArgument, "not a number: '" + field + "'");
    }
    return v;
}

}  // namespace mvsim
