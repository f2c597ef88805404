// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.
#include "support.hpp"

#include "ssc/benchmarks.hpp"
#include "ssc/builtin_models.hpp"
#include "ssc/cli.hpp"
#include "ssc/io.hpp"
#include "ssc/operators.hpp"
#include "ssc/simulator.hpp"
#include "ssc/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ssc;
using ssc::test::vec;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool pass, const std::string& what, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s  [%s]\n", n, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// sup over grid nodes with x <= inner, optionally relative to the oracle's sup there
double inner_error(const ValueField& v, double inner, const BenchmarkCase& bc) {
    double err = 0.0, scale = 0.0;
    const Grid& g = v.grid();
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (g.coordinate(node, 0) > inner + 1e-12) continue;
        const Eigen::VectorXd x = g.point(node);
        for (int a = 0; a < v.regimes(); ++a) {
            const double o = oracle_value(bc, x, a);
            err = std::max(err, std::abs(v(node, a) - o));
            scale = std::max(scale, std::abs(o));
        }
    }
    return bc.relative ? err / scale : err;
}

void criterion1() {
    const Example3Params p;
    const bool params = check_example3_params(p.mu1, p.mu2, p.r, p.lambda1, p.lambda2);
    const BenchmarkCase bc = benchmark_case("example3", p);
    const auto t0 = Clock::now();
    const SolveResult res = solve(bc.model, Grid({10.0}, {801}));
    const double secs = seconds_since(t0);
    const double err = inner_error(res.value, 8.0, bc);
    report(1, params && res.report.converged && err <= 0.01 && secs <= 5.0,
           "two-regime geometric example: V = (x, x/0.95) on [0,8]",
           "relative error " + fmt("%.3g", err) + ", " + fmt("%.2f", secs) + " s, constraint " +
               (params ? "holds" : "violated"));
}

void criterion2() {
    const BenchmarkCase bc = benchmark_case("example1");
    const auto t0 = Clock::now();
    const SolveResult res = solve(bc.model, Grid({5.0}, {501}));
    const double err = inner_error(res.value, 4.0, bc);

    SimOptions o;
    o.paths = 10000;
    o.dt = 1e-3;
    o.seed = 42;
    const PolicySource src = PolicySource::explicit_control(unit_rate_rule(), "unit_rate");
    const PayoffEstimate est = estimate_payoff(bc.model, src, vec({1.0}), 0, o);
    const double secs = seconds_since(t0);
    // the dynamics are deterministic here, so SE = 0 and the band is the
    // horizon tail plus the step allowance
    const double gap = std::abs(est.mean - 2.0);
    report(2, res.report.converged && err <= 2e-3 && gap <= est.tolerance() && secs <= 10.0,
           "unit-drift example: V = x + 1 and Monte Carlo payoff 2.0",
           "solver error " + fmt("%.3g", err) + ", MC mean " + fmt("%.6f", est.mean) + " +- " +
               fmt("%.3g", est.tolerance()) + " (SE " + fmt("%.3g", est.standard_error) + "), " +
               fmt("%.2f", secs) + " s");
}

void criterion3() {
    const ModelSpec m = example4();
    const auto samples = interior_samples(1, 0.05, 3.0, 60);
    const double affine = check_interior_residual(affine_candidate(1.0), m, samples);
    const double spurious = check_interior_residual(example4_spurious_field(), m, samples);
    const double z = example4_root();

    const std::vector<double> upper{50.0};
    const auto pairs = lattice_pairs(upper, 33);
    const ComparisonReport cmp = check_comparison_conditions(m, 1.0, pairs);

    SimOptions o;
    o.paths = 10000;
    o.dt = 1e-3;
    o.horizon = 10.0;
    o.seed = 7;
    const PolicySource src = PolicySource::explicit_control(squared_brownian_rule(), "squared_brownian");
    const PayoffEstimate est = estimate_payoff(m, src, vec({1.0}), 0, o);
    // E of the payoff on [0, T] is x + 1 - e^-T exactly; the deterministic
    // truncation e^-T is added to the band
    const double band = 3.0 * est.standard_error + est.scheme_allowance + std::exp(-10.0);
    const bool mc_ok = std::abs(est.mean - 2.0) <= band;
    report(3, affine <= 1e-6 && spurious <= 1e-6 && !cmp.diffusion_sum_ok && mc_ok,
           "squared Bessel example: two interior solutions, comparison fails, MC gives x + 1",
           "residuals " + fmt("%.2g", affine) + " / " + fmt("%.2g", spurious) + ", z = " + fmt("%.8f", z) +
               ", diffusion_sum_ok = " + (cmp.diffusion_sum_ok ? "true" : "false") + ", MC " +
               fmt("%.4f", est.mean) + " +- " + fmt("%.3g", band) +
               (est.admissible ? "" : ", control flagged non-monotone"));
}

void criterion4() {
    const ModelSpec m = example2();
    const Eigen::VectorXd origin = vec({0.0});
    int refuted = 0, total = 0;
    for (double c : {0.0, 0.5, 1.0, 2.0, 5.0}) {
        const QuadraticProbe p = probe_for_affine(c);
        ++total;
        if (!check_boundary_subsolution(affine_candidate(c), m, origin, 0, std::span<const QuadraticProbe>(&p, 1)).pass)
            ++refuted;
    }
    for (auto [c1, c2] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {3.0, -1.0}, {-0.5, 2.0}}) {
        const QuadraticProbe p = probe_for_exponential(c1, c2);
        ++total;
        if (!check_boundary_subsolution(exponential_candidate(c1, c2), m, origin, 0,
                                        std::span<const QuadraticProbe>(&p, 1))
                 .pass)
            ++refuted;
    }
    report(4, refuted == total, "explicit probes refute x + c and c1 e^x + c2 e^-x at the origin",
           std::to_string(refuted) + "/" + std::to_string(total) + " candidates refuted");
}

bool same_solution(const SolveResult& a, const SolveResult& b, const std::vector<int>& order) {
    const Grid& g = a.value.grid();
    for (std::size_t node = 0; node < g.size(); ++node)
        for (std::size_t k = 0; k < order.size(); ++k) {
            const int a_reg = static_cast<int>(k), b_reg = order[k];
            if (a.value(node, a_reg) != b.value(node, b_reg) || a.policy(node, a_reg) != b.policy(node, b_reg))
                return false;
        }
    return true;
}

void criterion5() {
    std::vector<std::string> problems;
    const double tol = 1e-8;
    struct Case {
        ModelSpec model;
        Grid grid;
    };
    const std::vector<Case> cases{{example1(), Grid({5.0}, {501})},
                                  {example2(), Grid({5.0}, {501})},
                                  {example3(), Grid({10.0}, {801})},
                                  {example4(), Grid({5.0}, {501})},
                                  {test::three_regime_model(), Grid({8.0}, {161})},
                                  {test::product_model(), Grid({6.0, 6.0}, {31, 31})}};
    int affine_checked = 0;
    for (const auto& c : cases) {
        const SolveResult res = solve(c.model, c.grid);
        if (!res.report.converged) {
            problems.push_back(c.model.name() + " did not converge");
            continue;
        }
        std::vector<PropertyCheck> checks{check_monotonicity(res.value, c.model, tol),
                                          check_gradient_constraints(res.value, c.model, tol),
                                          check_pde_inequality(res.value, c.model, tol)};
        if (auto ab = check_affine_bound(res.value, c.model, tol)) {
            checks.push_back(*ab);
            ++affine_checked;
        }
        for (const auto& pc : checks)
            if (!pc.passed) problems.push_back(c.model.name() + " " + pc.name);

        const int m = c.model.regimes();
        if (m > 1) {
            std::vector<int> order(static_cast<std::size_t>(m));
            std::iota(order.rbegin(), order.rend(), 0);
            if (!same_solution(solve(c.model.with_regime_order(order), c.grid), res, order))
                problems.push_back(c.model.name() + " permutation");

            // Q = 0: the joint solve equals each regime solved alone, bit for bit
            const ModelSpec free = c.model.with_generator(Eigen::MatrixXd::Zero(m, m));
            const SolveResult joint = solve(free, c.grid);
            for (int k = 0; k < m; ++k) {
                const std::vector<int> only{k};
                const SolveResult alone = solve(free.with_regime_order(only), c.grid);
                if (!same_solution(alone, joint, only)) problems.push_back(c.model.name() + " decoupling");
            }
        }
    }

    // transform identity at 20 cubic probes
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), pos(0.05, 3.0);
    const ModelSpec m = test::full_model_2d();
    const TransformContext ctx = TransformContext::for_model(m);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
        test::Poly phi[2];
        for (auto& p : phi)
            for (double& c : p.c) c = coef(rng);
        const double x1 = pos(rng), x2 = pos(rng);
        const Eigen::VectorXd x = vec({x1, x2});
        const double e = std::exp(-ctx.lambda * (x1 + x2));
        const Eigen::Vector2d one = Eigen::Vector2d::Ones();
        for (int a = 0; a < 2; ++a) {
            const double xi[] = {phi[0].value(x1, x2), phi[1].value(x1, x2)};
            const Eigen::Vector2d g = phi[a].grad(x1, x2);
            const double F = f_value(m, x, a, xi, g, phi[a].hess(x1, x2));
            const Eigen::Vector2d dt = e * (g - ctx.lambda * xi[a] * one);
            const Eigen::Matrix2d ht = e * (phi[a].hess(x1, x2) - ctx.lambda * (one * g.transpose() + g * one.transpose()) +
                                            ctx.lambda * ctx.lambda * xi[a] * one * one.transpose());
            double coupling = 0.0;
            for (int j = 0; j < 2; ++j) coupling += m.generator()(a, j) * e * xi[j];
            const double lhs = m.discount() * e * xi[a] - h_lambda(m, x, a, e * xi[a], dt, ht, ctx) - coupling;
            worst = std::max(worst, std::abs(lhs - e * F) / std::max(1.0, std::abs(e * F)));
        }
    }
    if (worst > 1e-10) problems.push_back("transform identity " + fmt("%.2g", worst));

    std::string detail = std::to_string(cases.size()) + " solves, affine bound on " + std::to_string(affine_checked) +
                         ", transform identity " + fmt("%.2g", worst);
    for (const auto& p : problems) detail += "; " + p;
    report(5, problems.empty(), "property suite on converged solves", detail);
}

struct CliRun {
    int code;
    std::string out;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ssc_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void criterion6() {
    const fs::path dir = scratch("order");
    const CliRun r = cli({"benchmark", "--grid-halve", "2", "--no-simulate", "--cases", "example1,example3,example4",
                          "--json", "--out", dir.string()});
    const json rep = json::parse(r.out);
    bool pass = true;
    std::string detail;
    for (const auto& row : rep["cases"]) {
        const auto& lv = row["levels"];
        const double e0 = lv[0]["error"].get<double>(), e1 = lv[1]["error"].get<double>();
        const bool floor = lv[1]["at_roundoff_floor"].get<bool>();
        // the criterion is about the first halving; the second level only
        // feeds the diagnostic below
        pass = pass && lv[1]["order_ok"].get<bool>();
        if (!detail.empty()) detail += "; ";
        detail += row["case"].get<std::string>() + " " + fmt("%.3g", e0) + " -> " + fmt("%.3g", e1);
        if (floor) {
            detail += " (both at roundoff, scheme exact on the affine oracle)";
            continue;
        }
        detail += " ratio " + fmt("%.3f", lv[1]["ratio"].get<double>());
        // when a fixed truncation error dominates, the h-dependent part still
        // shows up in successive differences
        const double e2 = lv[2]["error"].get<double>();
        if (e1 != e2) detail += ", successive-difference ratio " + fmt("%.2f", (e0 - e1) / (e1 - e2));
    }
    report(6, pass, "one grid halving shrinks the oracle error by >= 1.8", detail);
}

std::vector<std::string> files_in(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

bool same_tree(const fs::path& a, const fs::path& b, int& compared) {
    const auto na = files_in(a), nb = files_in(b);
    if (na != nb) return false;
    for (const auto& n : na) {
        ++compared;
        if (read_text(a / n) != read_text(b / n)) return false;
    }
    return true;
}

void criterion7() {
    struct Job {
        std::string name;
        std::vector<std::string> args;
    };
    const std::vector<Job> jobs{
        {"solve", {"solve", "--builtin", "example3", "--grid", "401"}},
        {"simulate", {"simulate", "--builtin", "example3", "--grid", "201", "--x0", "2", "--alpha0", "2", "--paths",
                      "256", "--horizon", "5", "--seed", "11", "--dump-paths", "3"}},
        {"simulate_bessel", {"simulate", "--builtin", "example4", "--paths", "256", "--horizon", "3", "--seed", "5"}},
        {"verify", {"verify", "--builtin", "example3", "--grid", "201"}},
        {"benchmark", {"benchmark", "--cases", "example1,example4", "--paths", "128"}},
    };
    bool pass = true;
    int compared = 0;
    std::string bad;
    for (const auto& job : jobs) {
        std::vector<fs::path> dirs;
        std::vector<int> codes;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path d = scratch(job.name + "_" + std::to_string(dirs.size()));
            std::vector<std::string> args = job.args;
            args.insert(args.end(), {"--out", d.string(), "--threads", threads});
            codes.push_back(cli(args).code);
            dirs.push_back(d);
        }
        bool ok = codes[0] == codes[1] && codes[1] == codes[2];
        ok = ok && same_tree(dirs[0], dirs[1], compared) && same_tree(dirs[0], dirs[2], compared);
        if (!ok) bad += " " + job.name;
        pass = pass && ok;
    }
    report(7, pass, "byte-identical outputs across runs and thread counts",
           std::to_string(compared) + " file comparisons" + (bad.empty() ? "" : ", differing:" + bad));
}

}  // namespace

int main() {
    void (*steps[])() = {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7};
    for (int k = 0; k < 7; ++k) {
        try {
            steps[k]();
        } catch (const std::exception& e) {
            report(k + 1, false, "aborted", e.what());
        }
    }
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
