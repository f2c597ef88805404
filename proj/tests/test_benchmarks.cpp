#include "support.hpp"

#include "ssc/benchmarks.hpp"
#include "ssc/builtin_models.hpp"
#include "ssc/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace ssc;
using test::vec;

TEST_SUITE_BEGIN("benchmarks");

namespace {

// Newton on cosh(y) - y sinh(y) = 0, i.e. coth(y) = y
double newton_root() {
    double y = 1.2;
    for (int k = 0; k < 50; ++k) {
        const double g = std::cosh(y) - y * std::sinh(y);
        const double dg = -y * std::cosh(y);
        y -= g / dg;
    }
    return 0.5 * y * y;
}

ScalarField two_regime_linear(double c1, double c2) {
    ScalarField f;
    f.name = "linear";
    f.value = [=](const Eigen::VectorXd& x, int a) { return (a == 0 ? c1 : c2) * x[0]; };
    return f;
}

}  // namespace

TEST_CASE("oracle values") {
    const BenchmarkCase e1 = benchmark_case("example1");
    CHECK(oracle_value(e1, vec({0.0}), 0) == 1.0);
    const BenchmarkCase e3 = benchmark_case("example3");
    CHECK(oracle_value(e3, vec({2.0}), 1) == doctest::Approx(2.0 / 0.95).epsilon(1e-14));
    CHECK(oracle_value(e3, vec({2.0}), 1) == doctest::Approx(2.10526).epsilon(1e-5));
    CHECK(oracle_value(e3, vec({2.0}), 0) == 2.0);
    const BenchmarkCase e4 = benchmark_case("example4");
    CHECK(oracle_value(e4, vec({3.0}), 0) == 4.0);
    const BenchmarkCase e2 = benchmark_case("example2");
    CHECK_FALSE(e2.oracle.has_value());
    try {
        oracle_value(e2, vec({1.0}), 0);
        FAIL("expected NO_ORACLE");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kNoOracle);
    }
    CHECK_THROWS_AS(benchmark_case("example9"), Error);
}

TEST_CASE("example 3 oracle has unit slope in regime 1") {
    const BenchmarkCase e3 = benchmark_case("example3");
    for (double x : {0.3, 1.0, 4.5})
        for (double y : {0.0, 0.2, 2.0})
            CHECK(oracle_value(e3, vec({x}), 0) - oracle_value(e3, vec({y}), 0) == doctest::Approx(x - y));
}

TEST_CASE("squared Bessel root and spurious branch") {
    const double z = example4_root();
    CHECK(z == doctest::Approx(newton_root()).epsilon(1e-11));
    CHECK(std::sqrt(2.0 * z) == doctest::Approx(1.19968).epsilon(1e-5));
    // the quoted 0.71966 disagrees with the root in the fifth digit
    CHECK(std::abs(z - 0.71966) < 1e-4);

    const double below = example4_spurious(z - 1e-13);
    const double above = example4_spurious(z + 1e-13);
    CHECK(std::abs(below - above) < 1e-10);

    const double h = 1e-6;
    const double left = (example4_spurious(z) - example4_spurious(z - h)) / h;
    const double right = (example4_spurious(z + h) - example4_spurious(z)) / h;
    CHECK(left == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(right == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(example4_spurious(0.0) == 0.0);
}

TEST_CASE("interior residual examples") {
    const auto samples = interior_samples(1, 0.0, 3.0, 40);
    CHECK(check_interior_residual(scaled_exponential_candidate(2.0), example1(), samples) <= 1e-8);
    CHECK(check_interior_residual(affine_candidate(1.0), example4(), samples) <= 1e-8);
    CHECK(check_interior_residual(affine_candidate(1.0), example1(), samples) <= 1e-8);

    const auto inner = interior_samples(1, 0.05, 3.0, 40);
    CHECK(check_interior_residual(example4_spurious_field(), example4(), inner) <= 1e-6);
}

TEST_CASE("perturbed example 3 candidate is not a solution") {
    const Example3Params p;
    const double c = p.lambda2 / (p.lambda2 + p.r - p.mu2) * 1.1;
    const auto samples = interior_samples(1, 0.0, 3.0, 30);
    // by hand: regime 1 has D - f = 0 and F = x (r - mu1 - l1 (c - 1));
    // regime 2 has min{x (c (r - mu2 + l2) - l2), c - 1}
    double expected = 0.0;
    for (const auto& s : samples) {
        const double x = s[0];
        const double r1 = std::min(x * (p.r - p.mu1 - p.lambda1 * (c - 1.0)), 0.0);
        const double r2 = std::min(x * (c * (p.r - p.mu2 + p.lambda2) - p.lambda2), c - 1.0);
        expected = std::max({expected, std::abs(r1), std::abs(r2)});
    }
    const double got = check_interior_residual(two_regime_linear(1.0, c), example3(p), samples);
    CHECK(got == doctest::Approx(expected).epsilon(1e-6));
    CHECK(got > 0.1);

    const double exact = check_interior_residual(two_regime_linear(1.0, c / 1.1), example3(p), samples);
    CHECK(exact <= 1e-8);
}

TEST_CASE("explicit probes refute the example 2 candidates") {
    const ModelSpec m = example2();
    const Eigen::VectorXd origin = vec({0.0});
    for (double c : {0.0, 0.5, 1.0, 3.0}) {
        const QuadraticProbe probe = probe_for_affine(c);
        const ProbeVerdict v = check_boundary_subsolution(affine_candidate(c), m, origin, 0,
                                                          std::span<const QuadraticProbe>(&probe, 1));
        CHECK_FALSE(v.pass);
        REQUIRE(v.witness.has_value());
        // phi(0) - phi''(0) = c + (2 - c) = 2 and phi'(0) - 1 = 1
        CHECK(v.witness_value == doctest::Approx(1.0));
    }
    for (auto [c1, c2] : {std::pair{1.0, 0.0}, {0.5, 0.5}, {2.0, -1.0}, {0.0, 1.0}}) {
        const QuadraticProbe probe = probe_for_exponential(c1, c2);
        const ProbeVerdict v = check_boundary_subsolution(exponential_candidate(c1, c2), m, origin, 0,
                                                          std::span<const QuadraticProbe>(&probe, 1));
        CHECK_FALSE(v.pass);
        const double s = c1 + c2;
        CHECK(v.witness_value == doctest::Approx(std::min(s / 3.0, std::abs(c1 - c2) + 1.0)));
    }
}

TEST_CASE("probe lattice accepts x + 1 for example 1") {
    const ProbeVerdict v = check_boundary_subsolution(affine_candidate(1.0), example1(), vec({0.0}), 0);
    CHECK(v.pass);
    CHECK(v.touching > 0);
    CHECK(v.tested == 21 * 11);
    CHECK_THROWS_AS(check_boundary_subsolution(affine_candidate(1.0), example1(), vec({0.5}), 0), Error);
}

TEST_CASE("viscosity check classification") {
    const auto inner = interior_samples(1, 0.0, 3.0, 20);
    const std::vector<Eigen::VectorXd> faces{vec({0.0})};
    const auto good = viscosity_check(affine_candidate(1.0), example1(), inner, faces);
    REQUIRE(good.classification.size() == 2);
    CHECK(good.classification[0] == Classification::kSolvesInterior);
    CHECK(good.classification[1] == Classification::kBoundarySubsolutionOk);

    const auto bad = viscosity_check(affine_candidate(1.0), example2(), inner, faces);
    CHECK(bad.classification[0] == Classification::kSolvesInterior);
    CHECK(bad.classification[1] == Classification::kBoundarySubsolutionFail);
    CHECK(to_string(bad.classification[1]) == "BOUNDARY_SUBSOLUTION_FAIL");

    const auto wrong = viscosity_check(affine_candidate(1.0), example3(), inner, {});
    CHECK(wrong.classification.size() == 1);
    CHECK(wrong.classification[0] == Classification::kFailsInterior);
}

TEST_CASE("interior sample lattice stays strictly inside") {
    const auto s = interior_samples(2, 0.0, 1.0, 4);
    CHECK(s.size() == 16);
    for (const auto& x : s) {
        CHECK(x.minCoeff() > 0.0);
        CHECK(x.maxCoeff() < 1.0);
    }
}

TEST_SUITE_END();
