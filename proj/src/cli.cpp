#include "ssc/cli.hpp"

#include "ssc/benchmarks.hpp"
#include "ssc/builtin_models.hpp"
#include "ssc/config.hpp"
#include "ssc/errors.hpp"
#include "ssc/io.hpp"
#include "ssc/simulator.hpp"
#include "ssc/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace ssc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Common {
    std::optional<std::string> model_file;
    std::optional<std::string> builtin;
    std::vector<int> grid;
    std::vector<double> xmax;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::optional<std::string> outer;
    std::string out = ".";
    bool json = false;
    int threads = 1;
};

struct SimFlags {
    std::vector<double> x0;
    std::optional<int> alpha0;
    std::optional<long long> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
};

struct Resolved {
    ModelSpec model;
    std::optional<std::string> builtin;
    FileSettings settings;
    json source;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
std::vector<T> broadcast(const std::vector<T>& v, int n, const char* flag) {
    if (v.size() == 1) return std::vector<T>(static_cast<std::size_t>(n), v[0]);
    if (static_cast<int>(v.size()) != n)
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(flag) + " expects 1 or " + std::to_string(n) + " values");
    return v;
}

Resolved resolve_model(const Common& c) {
    if (c.model_file) {
        if (!fs::exists(*c.model_file))
            throw Error(ErrorCode::kConfig, "cannot open model file '" + *c.model_file + "'");
        LoadedConfig cfg = load_config_file(*c.model_file);
        json src = {{"model_file", *c.model_file}};
        return {std::move(cfg.model), cfg.builtin, std::move(cfg.settings), src};
    }
    if (c.builtin) {
        return {builtin_model(*c.builtin), *c.builtin, {}, json{{"builtin", *c.builtin}}};
    }
    throw Error(ErrorCode::kInvalidArgument, "one of --model or --builtin is required");
}

Grid resolve_grid(const Common& c, const Resolved& r) {
    const int n = r.model.dim();
    std::vector<double> upper;
    std::vector<int> nodes;
    std::optional<Grid> base;
    if (r.builtin) {
        try {
            base = benchmark_case(*r.builtin).grid;
        } catch (const Error&) {
        }
    }
    if (!c.xmax.empty()) upper = broadcast(c.xmax, n, "--xmax");
    else if (r.settings.grid_upper) upper = broadcast(*r.settings.grid_upper, n, "grid.upper");
    else if (base && base->dim() == n) upper = base->uppers();
    else upper.assign(static_cast<std::size_t>(n), 5.0);
    if (!c.grid.empty()) nodes = broadcast(c.grid, n, "--grid");
    else if (r.settings.grid_nodes) nodes = broadcast(*r.settings.grid_nodes, n, "grid.nodes");
    else if (base && base->dim() == n) nodes = base->node_counts();
    else nodes.assign(static_cast<std::size_t>(n), n == 1 ? 101 : n == 2 ? 41 : 17);
    return Grid(upper, nodes);
}

SolveOptions resolve_solve_options(const Common& c, const Resolved& r) {
    SolveOptions o;
    if (r.settings.tolerance) o.tolerance = *r.settings.tolerance;
    if (r.settings.max_iterations) o.max_iterations = *r.settings.max_iterations;
    if (r.settings.outer) o.outer = outer_boundary_from_string(*r.settings.outer);
    if (c.tol) o.tolerance = *c.tol;
    if (c.max_iters) o.max_iterations = *c.max_iters;
    if (c.outer) o.outer = outer_boundary_from_string(*c.outer);
    o.validate();
    return o;
}

json grid_json(const Grid& g) {
    return {{"upper", g.uppers()}, {"nodes", g.node_counts()}};
}

json solve_options_json(const SolveOptions& o) {
    return {{"tolerance", o.tolerance},
            {"max_iterations", o.max_iterations},
            {"outer", std::string(to_string(o.outer))}};
}

json model_json(const ModelSpec& m) {
    json j = {{"name", m.name()}, {"n", m.dim()}, {"m", m.regimes()}, {"d", m.noise_dim()},
              {"r", m.discount()}};
    j["kappa0"] = m.kappa0() ? json(*m.kappa0()) : json(nullptr);
    return j;
}

json check_json(const PropertyCheck& c) {
    json j = {{"name", c.name}, {"passed", c.passed}, {"worst", number_or_null(c.worst)}};
    if (!c.where.empty()) {
        j["where"] = c.where;
        j["regime"] = c.regime + 1;
    }
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path ensure_out(const Common& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw Error(ErrorCode::kConfig, "output directory '" + c.out + "' is not writable");
    return dir;
}

struct SolveFlags {
    bool hierarchical = false;
};

SolveResult run_solve(const ModelSpec& model, const Grid& grid, const SolveOptions& opts, bool hierarchical) {
    if (hierarchical) return hierarchical_solve(model, grid, opts).full;
    return solve(model, grid, opts);
}

std::vector<PropertyCheck> property_checks(const ValueField& v, const ModelSpec& model, double tol) {
    std::vector<PropertyCheck> out{check_monotonicity(v, model, tol), check_gradient_constraints(v, model, tol),
                                   check_pde_inequality(v, model, tol)};
    if (auto ab = check_affine_bound(v, model, tol)) out.push_back(*ab);
    return out;
}

int cmd_solve(const Common& c, const SolveFlags& f, std::ostream& out) {
    const Resolved r = resolve_model(c);
    const Grid grid = resolve_grid(c, r);
    const SolveOptions opts = resolve_solve_options(c, r);
    const fs::path dir = ensure_out(c);
    const SolveResult res = run_solve(r.model, grid, opts, f.hierarchical);
    const Region region = extract_nonintervention_region(res.policy);

    write_text(dir / "value.csv", value_csv(res.value));
    write_text(dir / "policy.csv", policy_csv(res.policy));
    write_text(dir / "boundary.csv", boundary_csv(region, grid));

    json rep;
    rep["spec_version"] = kSpecVersion;
    rep["command"] = "solve";
    json options = r.source;
    options["grid"] = grid_json(grid);
    options["solver"] = solve_options_json(opts);
    options["hierarchical"] = f.hierarchical;
    rep["options"] = options;
    rep["model"] = model_json(r.model);
    rep["converged"] = res.report.converged;
    rep["iterations"] = res.report.iterations;
    rep["residual"] = number_or_null(res.report.residual);
    rep["policy_changes"] = res.report.policy_changes;
    rep["linear_solver"] = res.report.linear_solver;
    json boundary = json::array();
    for (const auto& b : region.boundary) boundary.push_back(b.size());
    rep["boundary_nodes"] = boundary;
    json checks = json::array();
    for (const auto& pc : property_checks(res.value, r.model, opts.tolerance)) checks.push_back(check_json(pc));
    rep["properties"] = checks;
    write_text(dir / "report.json", dump(rep));

    if (c.json) {
        out << dump(rep);
    } else {
        out << r.model.name() << ": " << (res.report.converged ? "converged" : "NOT converged") << " after "
            << res.report.iterations << " iterations, residual " << format_number(res.report.residual) << "\n"
            << "wrote value.csv, policy.csv, boundary.csv, report.json to " << dir.string() << "\n";
    }
    return res.report.converged ? kExitOk : kExitNotConverged;
}

// ---- simulate ----

struct SimulateFlags {
    std::string control = "auto";
    std::optional<std::string> policy_file;
    int dump_paths = 0;
    bool hierarchical = false;
};

Eigen::VectorXd resolve_x0(const SimFlags& s, const Resolved& r) {
    const int n = r.model.dim();
    std::vector<double> v;
    if (!s.x0.empty()) v = broadcast(s.x0, n, "--x0");
    else if (r.settings.x0) v = broadcast(*r.settings.x0, n, "simulation.x0");
    else v.assign(static_cast<std::size_t>(n), 1.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = v[static_cast<std::size_t>(i)];
    if ((x.array() < 0.0).any() || !x.allFinite())
        throw Error(ErrorCode::kInvalidArgument, "x0 must lie in the closed orthant");
    return x;
}

int resolve_alpha0(const SimFlags& s, const Resolved& r) {
    const int a = s.alpha0.value_or(r.settings.alpha0.value_or(1));
    if (a < 1 || a > r.model.regimes())
        throw Error(ErrorCode::kInvalidArgument,
                    "--alpha0 must be in 1.." + std::to_string(r.model.regimes()));
    return a - 1;
}

SimOptions resolve_sim_options(const Common& c, const SimFlags& s, const Resolved& r, long long default_paths) {
    SimOptions o;
    o.paths = default_paths;
    if (r.settings.dt) o.dt = *r.settings.dt;
    if (r.settings.horizon) o.horizon = *r.settings.horizon;
    if (r.settings.paths) o.paths = *r.settings.paths;
    if (r.settings.seed) o.seed = *r.settings.seed;
    if (s.dt) o.dt = *s.dt;
    if (s.horizon) o.horizon = *s.horizon;
    if (s.paths) o.paths = *s.paths;
    if (s.seed) o.seed = *s.seed;
    o.threads = c.threads;
    o.validate();
    return o;
}

json sim_options_json(const SimOptions& o, const Eigen::VectorXd& x0, int alpha0) {
    // threads is deliberately absent: it cannot change any output
    json j = {{"x0", std::vector<double>(x0.data(), x0.data() + x0.size())},
              {"alpha0", alpha0 + 1},
              {"paths", o.paths},
              {"dt", o.dt},
              {"seed", o.seed}};
    j["horizon"] = o.horizon ? json(*o.horizon) : json(nullptr);
    return j;
}

std::string default_control(const Resolved& r, const SimulateFlags& f) {
    if (f.control != "auto") return f.control;
    if (f.policy_file) return "policy";
    if (r.builtin && *r.builtin == "example1") return "unit_rate";
    if (r.builtin && *r.builtin == "example4") return "squared_brownian";
    return "policy";
}

int cmd_simulate(const Common& c, const SimFlags& s, const SimulateFlags& f, std::ostream& out) {
    const Resolved r = resolve_model(c);
    const Eigen::VectorXd x0 = resolve_x0(s, r);
    const int alpha0 = resolve_alpha0(s, r);
    const SimOptions opts = resolve_sim_options(c, s, r, 10000);
    const fs::path dir = ensure_out(c);
    const std::string control = default_control(r, f);

    json options = r.source;
    options["simulation"] = sim_options_json(opts, x0, alpha0);
    options["control"] = control;

    std::optional<PolicySource> source;
    if (control == "unit_rate") {
        source = PolicySource::explicit_control(unit_rate_rule(), control);
    } else if (control == "squared_brownian") {
        source = PolicySource::explicit_control(squared_brownian_rule(), control);
    } else if (control == "none") {
        source = PolicySource::none(resolve_grid(c, r), r.model.regimes());
    } else if (control == "policy") {
        if (f.policy_file) {
            if (!fs::exists(*f.policy_file))
                throw Error(ErrorCode::kConfig, "cannot open policy file '" + *f.policy_file + "'");
            source = PolicySource::region(read_policy_csv(*f.policy_file));
            options["policy_file"] = *f.policy_file;
        } else {
            const Grid grid = resolve_grid(c, r);
            const SolveOptions so = resolve_solve_options(c, r);
            const SolveResult res = run_solve(r.model, grid, so, f.hierarchical);
            if (!res.report.converged)
                throw Error(ErrorCode::kNotConverged, "policy solve did not converge");
            source = PolicySource::region(res.policy);
            options["grid"] = grid_json(grid);
            options["solver"] = solve_options_json(so);
        }
    } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown control '" + control + "'");
    }

    const PayoffEstimate est = estimate_payoff(r.model, *source, x0, alpha0, opts);

    json rep;
    rep["spec_version"] = kSpecVersion;
    rep["command"] = "simulate";
    rep["options"] = options;
    rep["model"] = model_json(r.model);
    rep["mode"] = std::string(to_string(source->mode()));
    rep["mean"] = number_or_null(est.mean);
    rep["standard_error"] = number_or_null(est.standard_error);
    rep["horizon"] = est.horizon;
    rep["tail_bound"] = est.tail_bound ? json(*est.tail_bound) : json("UNKNOWN");
    rep["scheme_allowance"] = est.scheme_allowance;
    rep["tolerance"] = est.tolerance();
    rep["admissible"] = est.admissible;
    rep["clamp_events"] = est.clamp_events;
    rep["first_path_seeds"] = est.first_seeds;
    if (r.builtin) {
        try {
            const BenchmarkCase bc = benchmark_case(*r.builtin);
            const double v = oracle_value(bc, x0, alpha0);
            rep["oracle_value"] = v;
            rep["within_tolerance"] = std::abs(est.mean - v) <= est.tolerance();
        } catch (const Error&) {
        }
    }
    write_text(dir / "estimate.json", dump(rep));

    if (f.dump_paths > 0) {
        std::ostringstream csv;
        csv << "path,t,";
        for (int k = 0; k < r.model.dim(); ++k) csv << 'x' << (k + 1) << ',';
        csv << "regime";
        for (int k = 0; k < r.model.dim(); ++k) csv << ",z" << (k + 1);
        csv << '\n';
        for (int p = 0; p < std::min<long long>(f.dump_paths, opts.paths); ++p) {
            const auto path = simulate_controlled_path(r.model, *source, x0, alpha0, opts.dt, est.horizon,
                                                       split_seed(opts.seed, static_cast<std::uint64_t>(p)));
            for (std::size_t i = 0; i < path.t.size(); ++i) {
                csv << p << ',' << format_number(path.t[i]) << ',';
                for (int k = 0; k < r.model.dim(); ++k) csv << format_number(path.x[i][k]) << ',';
                csv << (path.regime[i] + 1);
                for (int k = 0; k < r.model.dim(); ++k) csv << ',' << format_number(path.z[i][k]);
                csv << '\n';
            }
        }
        write_text(dir / "paths.csv", csv.str());
    }

    if (c.json) {
        out << dump(rep);
    } else {
        out << "mean " << format_number(est.mean) << " +- " << format_number(est.standard_error) << " (SE, "
            << est.paths << " paths, horizon " << format_number(est.horizon) << ")\n";
        if (rep.contains("oracle_value"))
            out << "oracle " << format_number(rep["oracle_value"].get<double>()) << ", tolerance "
                << format_number(est.tolerance()) << ": "
                << (rep["within_tolerance"].get<bool>() ? "within" : "OUTSIDE") << "\n";
    }
    return kExitOk;
}

// ---- verify ----

struct VerifyFlags {
    std::string candidate = "solved";
    std::optional<std::string> value_file;
    std::optional<std::string> policy_file;
    std::optional<double> c;
    std::optional<double> c1;
    std::optional<double> c2;
    double dpp_time = 1.0;
    bool hierarchical = false;
};

ValueField sample_on(const Grid& g, int m, const ScalarField& u) {
    ValueField v(g, m);
    for (std::size_t node = 0; node < g.size(); ++node) {
        const Eigen::VectorXd x = g.point(node);
        for (int a = 0; a < m; ++a) v(node, a) = u.value(x, a);
    }
    return v;
}

int cmd_verify(const Common& c, const SimFlags& s, const VerifyFlags& f, std::ostream& out) {
    const Resolved r = resolve_model(c);
    const ModelSpec& model = r.model;
    const int n = model.dim();
    const int m = model.regimes();
    const fs::path dir = ensure_out(c);
    const SolveOptions so = resolve_solve_options(c, r);
    const double tol = so.tolerance;

    json options = r.source;
    options["candidate"] = f.candidate;
    options["solver"] = solve_options_json(so);

    std::optional<Grid> grid;
    std::optional<ValueField> field;
    std::optional<ScalarField> closed;
    std::optional<PolicyField> policy;
    std::vector<QuadraticProbe> explicit_probes;

    const std::string& cand = f.candidate;
    if (cand == "solved") {
        grid = resolve_grid(c, r);
        const SolveResult res = run_solve(model, *grid, so, f.hierarchical);
        if (!res.report.converged) throw Error(ErrorCode::kNotConverged, "solve did not converge");
        field = res.value;
        policy = res.policy;
    } else if (cand == "value") {
        if (!f.value_file) throw Error(ErrorCode::kInvalidArgument, "--candidate value needs --value FILE");
        if (!fs::exists(*f.value_file))
            throw Error(ErrorCode::kConfig, "cannot open value file '" + *f.value_file + "'");
        field = read_value_csv(*f.value_file);
        grid = field->grid();
        if (grid->dim() != n || field->regimes() != m)
            throw Error(ErrorCode::kInvalidArgument, "value file does not match the model");
        options["value_file"] = *f.value_file;
    } else if (cand == "zero") {
        grid = resolve_grid(c, r);
        field = ValueField(*grid, m);
    } else if (cand == "oracle") {
        if (!r.builtin) throw Error(ErrorCode::kInvalidArgument, "--candidate oracle needs --builtin");
        const BenchmarkCase bc = benchmark_case(*r.builtin);
        if (!bc.oracle) throw Error(ErrorCode::kNoOracle, bc.name + " has no closed-form value function");
        closed = *bc.oracle;
    } else if (cand == "affine") {
        if (n != 1) throw Error(ErrorCode::kInvalidArgument, "the affine candidate is one-dimensional");
        const double cc = f.c.value_or(0.0);
        closed = affine_candidate(cc);
        options["c"] = cc;
        if (cc >= 0.0) explicit_probes.push_back(probe_for_affine(cc));
    } else if (cand == "exponential") {
        if (n != 1) throw Error(ErrorCode::kInvalidArgument, "the exponential candidate is one-dimensional");
        const double c1 = f.c1.value_or(1.0), c2 = f.c2.value_or(0.0);
        closed = exponential_candidate(c1, c2);
        options["c1"] = c1;
        options["c2"] = c2;
        if (c1 + c2 > 0.0) explicit_probes.push_back(probe_for_exponential(c1, c2));
    } else if (cand == "spurious") {
        if (n != 1) throw Error(ErrorCode::kInvalidArgument, "the spurious candidate is one-dimensional");
        closed = example4_spurious_field();
    } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown candidate '" + cand + "'");
    }
    if (closed) {
        grid = resolve_grid(c, r);
        field = sample_on(*grid, m, *closed);
    }
    options["grid"] = grid_json(*grid);
    if (f.policy_file) {
        if (!fs::exists(*f.policy_file))
            throw Error(ErrorCode::kConfig, "cannot open policy file '" + *f.policy_file + "'");
        policy = read_policy_csv(*f.policy_file);
        options["policy_file"] = *f.policy_file;
    }

    json checks = json::array();
    bool all = true;
    auto add = [&](json j) {
        all = all && j["passed"].get<bool>();
        checks.push_back(std::move(j));
    };

    if (closed) {
        const double hi = std::min(3.0, 0.8 * *std::min_element(grid->uppers().begin(), grid->uppers().end()));
        const auto samples = interior_samples(n, 0.05, hi, n == 1 ? 60 : n == 2 ? 12 : 5);
        const double res = check_interior_residual(*closed, model, samples);
        add({{"name", "interior_residual"}, {"passed", res <= 1e-6}, {"value", number_or_null(res)},
             {"threshold", 1e-6}});
    } else {
        const ResidualReport rr = residual_report(*field, model);
        const double thr = std::max(10.0 * tol, 1e-6);
        json j = {{"name", "residual"}, {"passed", rr.sup <= thr}, {"value", number_or_null(rr.sup)},
                  {"threshold", thr}};
        if (!rr.worst.empty()) {
            j["worst_x"] = rr.worst.front().x;
            j["worst_regime"] = rr.worst.front().regime + 1;
        }
        add(j);
    }
    for (const auto& pc : property_checks(*field, model, tol)) add(check_json(pc));

    const ScalarField probe_target = closed ? *closed : field_candidate(*field);
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < m; ++a) {
        ProbeVerdict v = check_boundary_subsolution(probe_target, model, origin, a);
        if (!explicit_probes.empty()) {
            const ProbeVerdict e = check_boundary_subsolution(probe_target, model, origin, a, explicit_probes);
            if (!e.pass) v = e;
        }
        json j = {{"name", "boundary_subsolution"}, {"regime", a + 1}, {"passed", v.pass},
                  {"probes_tested", v.tested}, {"probes_touching", v.touching}};
        if (v.witness) {
            j["witness_a"] = std::vector<double>(v.witness->a.data(), v.witness->a.data() + v.witness->a.size());
            j["witness_B"] = std::vector<double>(v.witness->B.data(), v.witness->B.data() + v.witness->B.size());
            j["witness_value"] = v.witness_value;
        }
        add(j);
    }

    if (policy) {
        const Eigen::VectorXd x0 = resolve_x0(s, r);
        const int alpha0 = resolve_alpha0(s, r);
        const SimOptions opts = resolve_sim_options(c, s, r, 2000);
        const DppReport d = dpp_sanity(model, *field, PolicySource::region(*policy), x0, alpha0, f.dpp_time, opts);
        options["simulation"] = sim_options_json(opts, x0, alpha0);
        options["dpp_time"] = f.dpp_time;
        add({{"name", "dpp"}, {"passed", d.upper_ok && d.lower_ok}, {"upper_ok", d.upper_ok},
             {"lower_ok", d.lower_ok}, {"value_at_x0", d.value_at_x0}, {"estimate", d.estimate},
             {"standard_error", d.standard_error}, {"allowance", d.allowance}});
    } else {
        checks.push_back({{"name", "dpp"}, {"passed", nullptr}, {"skipped", "no policy available"}});
    }

    json rep;
    rep["spec_version"] = kSpecVersion;
    rep["command"] = "verify";
    rep["options"] = options;
    rep["model"] = model_json(model);
    rep["checks"] = checks;
    rep["all_passed"] = all;
    write_text(dir / "verify.json", dump(rep));

    if (c.json) {
        out << dump(rep);
    } else {
        for (const auto& j : checks) {
            out << std::left << std::setw(24) << j["name"].get<std::string>();
            if (j.contains("regime")) out << " regime " << j["regime"].get<int>();
            out << "  " << (j["passed"].is_null() ? "SKIPPED" : j["passed"].get<bool>() ? "PASS" : "FAIL") << "\n";
        }
        out << (all ? "all checks passed" : "some checks failed") << "\n";
    }
    return all ? kExitOk : kExitInput;
}

// ---- benchmark ----

struct BenchmarkFlags {
    int grid_halve = 0;
    std::vector<std::string> cases{"example1", "example2", "example3", "example4"};
    bool no_simulate = false;
};

constexpr double kRoundoffFloor = 1e-10;

double oracle_error(const BenchmarkCase& bc, const ValueField& v) {
    const Grid& g = v.grid();
    double err = 0.0, scale = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
        const Eigen::VectorXd x = g.point(node);
        if ((x.array() > bc.inner_upper + 1e-12).any()) continue;
        for (int a = 0; a < v.regimes(); ++a) {
            const double o = oracle_value(bc, x, a);
            err = std::max(err, std::abs(v(node, a) - o));
            scale = std::max(scale, std::abs(o));
        }
    }
    return bc.relative ? err / scale : err;
}

Grid refined(const Grid& g, int level) {
    std::vector<int> nodes = g.node_counts();
    for (int& k : nodes) k = (k - 1) * (1 << level) + 1;
    return Grid(g.uppers(), nodes);
}

int cmd_benchmark(const Common& c, const SimFlags& s, const BenchmarkFlags& f, std::ostream& out) {
    if (f.grid_halve < 0 || f.grid_halve > 6)
        throw Error(ErrorCode::kInvalidArgument, "--grid-halve must be in 0..6");
    const fs::path dir = ensure_out(c);
    SimOptions sim;
    sim.paths = s.paths.value_or(2000);
    sim.dt = s.dt.value_or(1e-3);
    sim.seed = s.seed.value_or(0);
    sim.threads = c.threads;
    sim.validate();

    json options = {{"grid_halve", f.grid_halve}, {"cases", f.cases}, {"simulate", !f.no_simulate},
                    {"paths", sim.paths}, {"dt", sim.dt}, {"seed", sim.seed}};
    if (!c.grid.empty()) options["grid"] = c.grid;
    if (!c.xmax.empty()) options["xmax"] = c.xmax;
    if (c.tol) options["tolerance"] = *c.tol;

    json rows = json::array();
    bool all = true;
    for (const auto& name : f.cases) {
        BenchmarkCase bc = benchmark_case(name);
        SolveOptions so;
        if (c.tol) so.tolerance = *c.tol;
        if (c.max_iters) so.max_iterations = *c.max_iters;
        so.validate();
        Grid base = bc.grid;
        if (!c.grid.empty()) base = Grid(base.uppers(), broadcast(c.grid, bc.model.dim(), "--grid"));
        if (!c.xmax.empty()) {
            base = Grid(broadcast(c.xmax, bc.model.dim(), "--xmax"), base.node_counts());
            // the error window never reaches into the outer 20%
            const auto& up = base.uppers();
            bc.inner_upper = std::min(bc.inner_upper, 0.8 * *std::min_element(up.begin(), up.end()));
        }

        json row = {{"case", name}, {"notes", bc.notes}};
        json levels = json::array();
        bool ok = true;
        std::optional<SolveResult> first;
        double prev = -1.0;
        for (int l = 0; l <= f.grid_halve; ++l) {
            const Grid g = refined(base, l);
            SolveResult res = solve(bc.model, g, so);
            json lv = {{"nodes", g.node_counts()}, {"h", g.step(0)}, {"converged", res.report.converged},
                       {"iterations", res.report.iterations}, {"residual", number_or_null(res.report.residual)}};
            ok = ok && res.report.converged;
            if (bc.oracle) {
                const double e = oracle_error(bc, res.value);
                lv["error"] = number_or_null(e);
                if (l == 0) ok = ok && e <= bc.tolerance;
                if (prev >= 0.0) {
                    const double ratio = e > 0.0 ? prev / e : INFINITY;
                    lv["ratio"] = number_or_null(ratio);
                    const bool floor = prev <= kRoundoffFloor && e <= kRoundoffFloor;
                    lv["at_roundoff_floor"] = floor;
                    const bool order_ok = floor || ratio >= 1.8;
                    lv["order_ok"] = order_ok;
                    ok = ok && order_ok;
                }
                prev = e;
            }
            levels.push_back(lv);
            if (l == 0) first = std::move(res);
        }
        row["levels"] = levels;
        row["tolerance"] = bc.tolerance;
        row["relative"] = bc.relative;

        bool props = true;
        for (const auto& pc : property_checks(first->value, bc.model, so.tolerance)) props = props && pc.passed;
        row["properties_ok"] = props;

        if (!bc.oracle) {
            const ProbeVerdict v = check_boundary_subsolution(field_candidate(first->value), bc.model,
                                                              Eigen::VectorXd::Zero(bc.model.dim()), 0);
            row["boundary_subsolution_at_origin"] = v.pass ? "no violating probe found" : "FAIL";
            row["status"] = "NO_ORACLE";
            rows.push_back(row);
            continue;
        }
        ok = ok && props;

        if (!f.no_simulate) {
            Eigen::VectorXd x0 = Eigen::VectorXd::Ones(bc.model.dim());
            int alpha0 = 0;
            std::optional<PolicySource> src;
            SimOptions o = sim;
            if (name == "example1") {
                src = PolicySource::explicit_control(unit_rate_rule(), "unit_rate");
            } else if (name == "example4") {
                src = PolicySource::explicit_control(squared_brownian_rule(), "squared_brownian");
                o.horizon = std::log(1000.0) / bc.model.discount();
            } else {
                src = PolicySource::region(first->policy);
                x0 *= 2.0;
                alpha0 = bc.model.regimes() - 1;
                o.horizon = std::log(1000.0) / bc.model.discount();
            }
            const PayoffEstimate est = estimate_payoff(bc.model, *src, x0, alpha0, o);
            const double v = oracle_value(bc, x0, alpha0);
            const bool within = std::abs(est.mean - v) <= est.tolerance();
            row["simulation"] = {{"control", src->name()}, {"alpha0", alpha0 + 1}, {"mean", est.mean},
                                 {"standard_error", est.standard_error}, {"oracle", v},
                                 {"tolerance", est.tolerance()}, {"within", within}};
            ok = ok && within;
        }
        row["status"] = ok ? "PASS" : "FAIL";
        all = all && ok;
        rows.push_back(row);
    }

    json rep;
    rep["spec_version"] = kSpecVersion;
    rep["command"] = "benchmark";
    rep["options"] = options;
    rep["cases"] = rows;
    rep["all_passed"] = all;
    write_text(dir / "benchmark.json", dump(rep));

    std::ostringstream md;
    md << "| case | nodes | error | ratio | residual | simulation | status |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        for (const auto& lv : row["levels"]) {
            md << "| " << row["case"].get<std::string>() << " | " << lv["nodes"][0].get<int>() << " | "
               << (lv.contains("error") && !lv["error"].is_null() ? format_number(lv["error"].get<double>()) : "-")
               << " | " << (lv.contains("ratio") && !lv["ratio"].is_null() ? format_number(lv["ratio"].get<double>()) : "-")
               << " | " << (lv["residual"].is_null() ? "nan" : format_number(lv["residual"].get<double>())) << " | ";
            if (row.contains("simulation"))
                md << format_number(row["simulation"]["mean"].get<double>()) << " vs "
                   << format_number(row["simulation"]["oracle"].get<double>());
            else
                md << "-";
            md << " | " << row["status"].get<std::string>() << " |\n";
        }
    }
    write_text(dir / "benchmark.md", md.str());
    out << (c.json ? dump(rep) : md.str());
    return all ? kExitOk : kExitInput;
}

void add_common(CLI::App* sub, Common& c) {
    auto* model = sub->add_option("--model", c.model_file, "model configuration file (TOML)");
    auto* builtin = sub->add_option("--builtin", c.builtin, "built-in model: example1..example4");
    model->excludes(builtin);
    sub->add_option("--grid", c.grid, "nodes per axis (one value or one per axis)")->delimiter(',');
    sub->add_option("--xmax", c.xmax, "upper truncation per axis (one value or one per axis)")->delimiter(',');
    sub->add_option("--tol", c.tol, "policy-iteration residual tolerance");
    sub->add_option("--max-iters", c.max_iters, "policy-iteration cap");
    sub->add_option("--outer", c.outer, "outer boundary: GRADIENT_NEUMANN or AFFINE_DIRICHLET");
    sub->add_option("--out", c.out, "output directory");
    sub->add_flag("--json", c.json, "print the JSON report on stdout");
    sub->add_option("--threads", c.threads, "worker threads for simulation");
}

void add_sim(CLI::App* sub, SimFlags& s) {
    sub->add_option("--x0", s.x0, "initial state")->delimiter(',');
    sub->add_option("--alpha0", s.alpha0, "initial regime (1-based)");
    sub->add_option("--paths", s.paths, "Monte Carlo paths");
    sub->add_option("--dt", s.dt, "time step");
    sub->add_option("--horizon", s.horizon, "simulation horizon");
    sub->add_option("--seed", s.seed, "master seed");
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kNotConverged: return kExitNotConverged;
        case ErrorCode::kSingularSystem:
        case ErrorCode::kNanState: return kExitInternal;
        default: return kExitInput;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"singular stochastic control: QVI solver and simulator", "ssc"};
    app.require_subcommand(1);

    Common common;
    SimFlags sim;
    SolveFlags solve_flags;
    SimulateFlags simulate_flags;
    VerifyFlags verify_flags;
    BenchmarkFlags bench_flags;

    auto* s_solve = app.add_subcommand("solve", "solve the QVI on a grid; writes value/policy/boundary CSV and report.json");
    add_common(s_solve, common);
    s_solve->add_flag("--hierarchical", solve_flags.hierarchical, "solve boundary faces first");

    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo payoff of a control; writes estimate.json");
    add_common(s_sim, common);
    add_sim(s_sim, sim);
    s_sim->add_option("--control", simulate_flags.control, "auto, policy, none, unit_rate or squared_brownian");
    s_sim->add_option("--policy", simulate_flags.policy_file, "policy.csv from a previous solve");
    s_sim->add_option("--dump-paths", simulate_flags.dump_paths, "write the first k paths to paths.csv");
    s_sim->add_flag("--hierarchical", simulate_flags.hierarchical, "hierarchical solve for the policy");

    auto* s_verify = app.add_subcommand("verify", "property and viscosity checks; writes verify.json");
    add_common(s_verify, common);
    add_sim(s_verify, sim);
    s_verify->add_option("--candidate", verify_flags.candidate,
                         "solved, value, zero, oracle, affine, exponential or spurious");
    s_verify->add_option("--value", verify_flags.value_file, "value.csv to check");
    s_verify->add_option("--policy", verify_flags.policy_file, "policy.csv for the DPP check");
    s_verify->add_option("--c", verify_flags.c, "affine candidate x + c");
    s_verify->add_option("--c1", verify_flags.c1, "exponential candidate c1 e^x + c2 e^-x");
    s_verify->add_option("--c2", verify_flags.c2, "exponential candidate c1 e^x + c2 e^-x");
    s_verify->add_option("--dpp-time", verify_flags.dpp_time, "time for the DPP sanity check");
    s_verify->add_flag("--hierarchical", verify_flags.hierarchical, "hierarchical solve");

    auto* s_bench = app.add_subcommand("benchmark", "run the closed-form benchmark cases; writes benchmark.md/json");
    add_common(s_bench, common);
    add_sim(s_bench, sim);
    s_bench->add_option("--grid-halve", bench_flags.grid_halve, "number of grid halvings");
    s_bench->add_option("--cases", bench_flags.cases, "subset of cases")->delimiter(',');
    s_bench->add_flag("--no-simulate", bench_flags.no_simulate, "skip the Monte Carlo column");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (s_solve->parsed()) return cmd_solve(common, solve_flags, out);
        if (s_sim->parsed()) return cmd_simulate(common, sim, simulate_flags, out);
        if (s_verify->parsed()) return cmd_verify(common, sim, verify_flags, out);
        if (s_bench->parsed()) return cmd_benchmark(common, sim, bench_flags, out);
    } catch (const Error& e) {
        err << "ssc: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "ssc: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace ssc
