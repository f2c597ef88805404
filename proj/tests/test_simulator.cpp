#include "support.hpp"

#include "ssc/benchmarks.hpp"
#include "ssc/builtin_models.hpp"
#include "ssc/errors.hpp"
#include "ssc/simulator.hpp"
#include "ssc/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace ssc;
using test::vec;

TEST_SUITE_BEGIN("simulator");

namespace {

const SolveResult& example3_solution() {
    static const SolveResult res = solve(example3(), Grid({10.0}, {801}));
    return res;
}

SimOptions options(long long paths, double horizon, std::uint64_t seed, double dt = 1e-3) {
    SimOptions o;
    o.paths = paths;
    o.horizon = horizon;
    o.seed = seed;
    o.dt = dt;
    return o;
}

}  // namespace

TEST_CASE("seed splitting") {
    CHECK(split_seed(42, 7) == split_seed(42, 7));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(split_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(split_seed(42, 0) != split_seed(43, 0));
}

TEST_CASE("chain without switching stays put") {
    const Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
    const RegimePath p = simulate_chain(q, 1, 100.0, 5);
    CHECK(p.regimes.size() == 1);
    CHECK(p.at(0.0) == 1);
    CHECK(p.at(99.9) == 1);
}

TEST_CASE("chain occupation approaches the stationary law") {
    // Q = [[-1, 1], [2, -2]] has pi = (2/3, 1/3). The occupation fraction of a
    // two-state chain over T has asymptotic variance 2 pi1 pi2 / ((l1 + l2) T).
    const Eigen::MatrixXd q = test::mat({{-1.0, 1.0}, {2.0, -2.0}});
    const double horizon = 1e4;
    const double sd = std::sqrt(2.0 * (2.0 / 9.0) / (3.0 * horizon));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const RegimePath p = simulate_chain(q, 0, horizon, seed);
        double in_first = 0.0;
        for (std::size_t k = 0; k < p.regimes.size(); ++k) {
            const double end = k + 1 < p.jump_times.size() ? p.jump_times[k + 1] : horizon;
            if (p.regimes[k] == 0) in_first += end - p.jump_times[k];
        }
        CHECK(std::abs(in_first / horizon - 2.0 / 3.0) < 4.0 * sd);
        for (std::size_t k = 1; k < p.regimes.size(); ++k) CHECK(p.regimes[k] != p.regimes[k - 1]);
    }
}

TEST_CASE("unit-rate control pays x0 + 1 - e^-T on every path") {
    const PolicySource src = PolicySource::explicit_control(unit_rate_rule(), "unit_rate");
    for (double horizon : {1.0, 5.0}) {
        const auto p = simulate_controlled_path(example1(), src, vec({1.0}), 0, 1e-3, horizon, 9);
        CHECK(p.payoff == doctest::Approx(1.0 + 1.0 - std::exp(-horizon)).epsilon(1e-12));
        CHECK(p.z_nondecreasing);
        CHECK(p.state_in_orthant);
        CHECK(p.initial_jump[0] == doctest::Approx(1.0));
        CHECK(std::abs(p.x.back()[0]) < 1e-9);
    }
}

TEST_CASE("example 1 Monte Carlo matches x + 1") {
    const PolicySource src = PolicySource::explicit_control(unit_rate_rule(), "unit_rate");
    SimOptions o;
    o.paths = 2000;
    o.seed = 42;
    const auto est = estimate_payoff(example1(), src, vec({1.0}), 0, o);
    REQUIRE(est.tail_bound.has_value());
    CHECK(est.horizon == doctest::Approx(std::log(1000.0)));
    CHECK(std::abs(est.mean - 2.0) <= est.tolerance());
    CHECK(est.admissible);
}

TEST_CASE("never pushing pays nothing") {
    const SolveResult& s = example3_solution();
    const PolicySource src = PolicySource::none(s.value.grid(), 2);
    const auto est = estimate_payoff(example3(), src, vec({2.0}), 1, options(50, 5.0, 3));
    CHECK(est.mean == 0.0);
    CHECK(est.standard_error == 0.0);
}

TEST_CASE("squared Brownian control: mean x + 1, not admissible") {
    const PolicySource src = PolicySource::explicit_control(squared_brownian_rule(), "squared_brownian");
    const auto est = estimate_payoff(example4(), src, vec({1.0}), 0, options(1000, 10.0, 11));
    CHECK_FALSE(est.tail_bound.has_value());
    // E int e^-t d(W^2) = int e^-t dt, so the truncated mean is 2 - e^-10
    CHECK(std::abs(est.mean - (2.0 - std::exp(-10.0))) <= est.tolerance());
    CHECK_FALSE(est.admissible);
}

TEST_CASE("solved example 3 policy reproduces 2/0.95 from x0 = 2 in regime 2") {
    const SolveResult& s = example3_solution();
    REQUIRE(s.report.converged);
    const PolicySource src = PolicySource::region(s.policy);
    const auto est = estimate_payoff(example3(), src, vec({2.0}), 1, options(400, std::log(1000.0) / 0.1, 17));
    CHECK(std::abs(est.mean - 2.0 / 0.95) <= est.tolerance());
    CHECK(est.admissible);
}

TEST_CASE("region paths stay admissible") {
    const SolveResult& s = example3_solution();
    const PolicySource src = PolicySource::region(s.policy);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = simulate_controlled_path(example3(), src, vec({3.0}), 1, 1e-3, 5.0, seed);
        CHECK(p.z_nondecreasing);
        CHECK(p.state_in_orthant);
        CHECK(p.t.size() == p.x.size());
        for (std::size_t k = 1; k < p.z.size(); ++k) CHECK(p.z[k][0] >= p.z[k - 1][0]);
    }
}

TEST_CASE("estimates are reproducible and independent of thread count") {
    const PolicySource src = PolicySource::explicit_control(squared_brownian_rule(), "squared_brownian");
    SimOptions one = options(1, 2.0, 99);
    const auto a = estimate_payoff(example4(), src, vec({1.0}), 0, one);
    const auto b = estimate_payoff(example4(), src, vec({1.0}), 0, one);
    CHECK(a.mean == b.mean);
    CHECK(a.first_seeds == b.first_seeds);

    SimOptions many = options(64, 2.0, 99);
    const auto serial = estimate_payoff(example4(), src, vec({1.0}), 0, many);
    many.threads = 4;
    const auto parallel = estimate_payoff(example4(), src, vec({1.0}), 0, many);
    CHECK(serial.mean == parallel.mean);
    CHECK(serial.standard_error == parallel.standard_error);
    CHECK(serial.first_seeds.size() == 4);
    CHECK(serial.first_seeds[0] == split_seed(99, 0));
}

TEST_CASE("dynamic programming sanity") {
    const SolveResult& s = example3_solution();
    const PolicySource policy = PolicySource::region(s.policy);
    const Eigen::VectorXd x0 = vec({2.0});

    const auto at_zero = dpp_sanity(example3(), s.value, policy, x0, 1, 0.0, options(10, 1.0, 1));
    CHECK(at_zero.estimate == s.value.interpolate(x0, 1));
    CHECK(at_zero.standard_error == 0.0);

    const auto at_one = dpp_sanity(example3(), s.value, policy, x0, 1, 1.0, options(2000, 1.0, 5));
    CHECK(at_one.upper_ok);
    CHECK(at_one.lower_ok);

    // example 1 without pushing: X_1 = x0 + 1, so the estimate is e^-1 (x0 + 2) < x0 + 1
    const SolveResult e1 = solve(example1(), Grid({5.0}, {501}));
    const PolicySource none = PolicySource::none(e1.value.grid(), 1);
    const auto lazy = dpp_sanity(example1(), e1.value, none, vec({1.0}), 0, 1.0, options(20, 1.0, 5));
    CHECK(lazy.estimate == doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-6));
    CHECK(lazy.upper_ok);
    CHECK_FALSE(lazy.lower_ok);
}

TEST_CASE("invalid simulation inputs") {
    const PolicySource src = PolicySource::explicit_control(unit_rate_rule(), "unit_rate");
    SimOptions o;
    o.paths = 0;
    CHECK_THROWS_AS(estimate_payoff(example1(), src, vec({1.0}), 0, o), Error);
    o = SimOptions{};
    o.dt = 0.0;
    CHECK_THROWS_AS(o.validate(), Error);
    // no verified kappa0 and no horizon
    CHECK_FALSE(default_horizon(example4(), vec({1.0})).has_value());
    const PolicySource bessel = PolicySource::explicit_control(squared_brownian_rule(), "squared_brownian");
    CHECK_THROWS_AS(estimate_payoff(example4(), bessel, vec({1.0}), 0, SimOptions{}), Error);
    // a region source must match the model's dimension and regimes
    const SolveResult& s = example3_solution();
    try {
        estimate_payoff(example1(), PolicySource::region(s.policy), vec({1.0}), 0, options(1, 1.0, 1));
        FAIL("expected REGION_UNAVAILABLE");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kRegionUnavailable);
    }
}

TEST_SUITE_END();
