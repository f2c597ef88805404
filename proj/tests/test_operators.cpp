#include "support.hpp"

#include "ssc/builtin_models.hpp"
#include "ssc/errors.hpp"
#include "ssc/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ssc;
using ssc::test::full_model_2d;
using ssc::test::mat;
using ssc::test::Poly;
using ssc::test::vec;

namespace {

// 2-d, two regimes, state-dependent coefficients and a diagonal covariance.
ModelSpec diag_model_2d() {
    auto drift = CoefficientField::affine(2, 1, 2, {{0.1, 0.0, 0.0, -0.2}, {0.05, 0.02, 0.0, 0.1}},
                                          {{0.5, 0.3}, {-0.2, 0.4}});
    auto sig = CoefficientField::geometric(2, 2, {{0.3, 0.0, 0.0, 0.2}, {0.25, 0.0, 0.0, 0.35}});
    auto f = CoefficientField::constant(2, 1, 2, {{1.0, 2.0}, {1.5, 0.5}});
    return ModelSpec("diag2d", 0.3, drift, sig, f, mat({{-1, 1}, {0.5, -0.5}}));
}

ValueField random_field(const Grid& g, int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ValueField v(g, m);
    for (std::size_t node = 0; node < g.size(); ++node)
        for (int a = 0; a < m; ++a) v(node, a) = u(rng);
    return v;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("generator annihilates constants exactly") {
    const Grid g({4.0, 3.0}, {9, 7});
    for (const ModelSpec& m : {diag_model_2d(), full_model_2d()}) {
        ValueField v(g, 2);
        for (std::size_t node = 0; node < g.size(); ++node) v(node, 0) = v(node, 1) = 2.75;
        for (std::size_t node = 0; node < g.size(); ++node)
            for (int a = 0; a < 2; ++a) CHECK(apply_generator(v, m, node, a) == 0.0);
    }
}

TEST_CASE("generator on simple fields") {
    const ModelSpec m = test::constant_1d(1.0, {1.0}, {0.0}, {1.0}, mat({{0}}));
    const Grid g({2.0}, {21});
    ValueField v(g, 1);
    for (std::size_t node = 0; node < g.size(); ++node) v(node, 0) = g.coordinate(node, 0);
    for (std::size_t node = 0; node + 1 < g.size(); ++node)
        CHECK(apply_generator(v, m, node, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(apply_generator(v, m, g.size() - 1, 0) == 0.0);  // outward drift dropped on the face

    // closed form of the two-regime geometric example: L h(x, 2) = r h(x, 2)
    const ModelSpec m3 = example3();
    const double c = 1.0 / (1.0 + 0.1 - 0.15);
    const Grid g3({10.0}, {201});
    ValueField h(g3, 2);
    for (std::size_t node = 0; node < g3.size(); ++node) {
        h(node, 0) = g3.coordinate(node, 0);
        h(node, 1) = c * g3.coordinate(node, 0);
    }
    for (std::size_t node = 1; node + 1 < g3.size(); ++node)
        CHECK(std::abs(apply_generator(h, m3, node, 1) - 0.1 * h(node, 1)) <= 1e-10 * (1.0 + h(node, 1)));
}

TEST_CASE("F examples") {
    const ModelSpec m = test::constant_1d(1.0, {0.0}, {0.0}, {1.0}, mat({{0}}));
    const double xi[] = {2.0};
    CHECK(f_value(m, vec({0.7}), 0, xi, vec({3.0}), mat({{5.0}})) == 2.0);

    const ModelSpec m3 = example3();
    const double c = 1.0 / (1.0 + 0.1 - 0.15);
    for (double x : {0.5, 1.0, 4.0}) {
        const double xs[] = {x, c * x};
        CHECK(std::abs(f_value(m3, vec({x}), 1, xs, vec({c}), mat({{0.0}}))) <= 1e-12 * (1 + x));
        // regime 1: x (r - mu1 + l1 - l1 c) > 0
        const double expect = x * (0.1 - 0.0 + 1.0 - c);
        const double got = f_value(m3, vec({x}), 0, xs, vec({1.0}), mat({{0.0}}));
        CHECK(got == doctest::Approx(expect));
        CHECK(got > 0.0);
    }
}

TEST_CASE("QVI residual examples") {
    const ModelSpec m1 = example1();
    const Grid g({5.0}, {501});
    ValueField v(g, 1);
    for (std::size_t node = 0; node < g.size(); ++node) v(node, 0) = g.coordinate(node, 0) + 1.0;
    const std::size_t mid = 50;  // x = 0.5
    REQUIRE(g.coordinate(mid, 0) == doctest::Approx(0.5));
    const auto r = qvi_residual(v, m1, mid, 0);
    CHECK(r.pde_part == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(r.gradient_parts.at(0)) <= 1e-12);
    CHECK(std::abs(r.combined) <= 1e-12);

    ValueField zero(g, 1);
    for (std::size_t node = 0; node < g.size(); ++node) CHECK(qvi_residual(zero, m1, node, 0).combined == -1.0);

    const ModelSpec m3 = example3();
    const double c = 1.0 / (1.0 + 0.1 - 0.15);
    const Grid g3({10.0}, {801});
    ValueField h(g3, 2);
    for (std::size_t node = 0; node < g3.size(); ++node) {
        h(node, 0) = g3.coordinate(node, 0);
        h(node, 1) = c * g3.coordinate(node, 0);
    }
    for (std::size_t node = 1; node + 1 < g3.size(); ++node)
        for (int a = 0; a < 2; ++a) CHECK(std::abs(qvi_residual(h, m3, node, a).combined) <= 1e-9);
}

TEST_CASE("combined residual is order-reversing in f") {
    std::mt19937_64 rng(3);
    const Grid g({3.0, 3.0}, {7, 7});
    const ModelSpec m = diag_model_2d();
    const ModelSpec richer("richer", m.discount(), m.drift(), m.diffusion(),
                           CoefficientField::constant(2, 1, 2, {{1.2, 2.5}, {1.5, 0.9}}), m.generator());
    for (int trial = 0; trial < 5; ++trial) {
        const ValueField v = random_field(g, 2, rng);
        for (std::size_t node = 0; node < g.size(); ++node)
            for (int a = 0; a < 2; ++a)
                CHECK(qvi_residual(v, richer, node, a).combined <= qvi_residual(v, m, node, a).combined);
    }
}

TEST_CASE("generator is linear") {
    std::mt19937_64 rng(11);
    const Grid g({2.0, 2.0}, {9, 9});
    const ModelSpec m = full_model_2d();
    for (int trial = 0; trial < 5; ++trial) {
        const ValueField u = random_field(g, 2, rng), w = random_field(g, 2, rng);
        const double a = 1.7, b = -0.3;
        ValueField s(g, 2);
        for (std::size_t node = 0; node < g.size(); ++node)
            for (int k = 0; k < 2; ++k) s(node, k) = a * u(node, k) + b * w(node, k);
        for (std::size_t node = 0; node < g.size(); ++node) {
            for (int k = 0; k < 2; ++k) {
                const double lhs = apply_generator(s, m, node, k);
                const double rhs = a * apply_generator(u, m, node, k) + b * apply_generator(w, m, node, k);
                CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(rhs)));
            }
        }
    }
}

TEST_CASE("upwind stencil is monotone for diagonal covariance") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick_node(0, 80);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    const Grid g({2.0, 2.0}, {9, 9});
    const ModelSpec m = diag_model_2d();
    for (int trial = 0; trial < 200; ++trial) {
        const ValueField v = random_field(g, 2, rng);
        const auto node = static_cast<std::size_t>(pick_node(rng));
        const int a = trial % 2;
        const double base = apply_generator(v, m, node, a);
        ValueField w = v;
        auto other = static_cast<std::size_t>(pick_node(rng));
        int oa = trial % 3 == 0 ? 1 - a : a;
        if (other == node && oa == a) oa = 1 - a;
        w(other, oa) += bump(rng);
        CHECK(apply_generator(w, m, node, a) >= base - 1e-12);
    }
}

TEST_CASE("non-dominant covariance is rejected") {
    // a = [[4, 0.9], [0.9, 0.25]]: row 2 has 0.25 < 0.9 on an equal mesh
    const double s21 = 0.45, s22 = std::sqrt(0.25 - 0.45 * 0.45);
    const ModelSpec m("skew", 1.0, CoefficientField::constant(2, 1, 2, {{0.0, 0.0}}),
                      CoefficientField::constant(2, 2, 2, {{2.0, 0.0, s21, s22}}),
                      CoefficientField::constant(2, 1, 2, {{1.0, 1.0}}), mat({{0}}));
    const Grid g({1.0, 1.0}, {5, 5});
    std::vector<StencilTerm> out;
    const std::size_t centre = 2 * g.stride(0) + 2 * g.stride(1);
    try {
        generator_stencil(m, g, centre, 0, out);
        FAIL("expected NONMONOTONE_DIFFUSION");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kNonmonotoneDiffusion);
    }
}

TEST_CASE("exponential transform") {
    const Grid g({2.0, 1.0}, {5, 3});
    const TransformContext ctx(0.05);
    ValueField one(g, 2), growth(g, 2);
    for (std::size_t node = 0; node < g.size(); ++node) {
        const double s = g.point(node).sum();
        for (int a = 0; a < 2; ++a) {
            one(node, a) = 1.0;
            growth(node, a) = std::exp(0.05 * s);
        }
    }
    const ValueField t1 = exp_transform(one, ctx);
    const ValueField t2 = exp_transform(growth, ctx);
    const ValueField back = exp_untransform(t1, ctx);
    for (std::size_t node = 0; node < g.size(); ++node) {
        const double s = g.point(node).sum();
        for (int a = 0; a < 2; ++a) {
            CHECK(t1(node, a) == doctest::Approx(std::exp(-0.05 * s)).epsilon(1e-15));
            CHECK(t2(node, a) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(back(node, a) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(TransformContext(0.0), Error);
    CHECK_THROWS_AS(TransformContext(-1.0), Error);
}

TEST_CASE("default lambda keeps the transform admissible") {
    for (double k : {0.1, 1.0, 3.0, 10.0}) {
        for (double r : {0.01, 0.1, 1.0}) {
            const ModelSpec m = example1().with_discount(r).with_kappa0(k);
            const auto ctx = TransformContext::for_model(m);
            CHECK(ctx.lambda == doctest::Approx(std::min(0.1, r / (2 * k + k * k + 1))));
            CHECK(ctx.admissible(r, k));
        }
    }
}

TEST_CASE("H_lambda term isolation") {
    const ModelSpec still = test::constant_1d(1.0, {0.0}, {0.0}, {1.0}, mat({{0}}));
    const TransformContext ctx(0.08);
    CHECK(h_lambda(still, vec({1.0}), 0, 3.0, vec({2.0}), mat({{-1.0}}), ctx) == 0.0);

    const ModelSpec m = full_model_2d();
    const Eigen::VectorXd x = vec({0.4, 1.3});
    const Eigen::Vector2d v = m.diffusion_at(x, 0).transpose() * Eigen::Vector2d::Ones();
    const double expect = 0.5 * 0.08 * 0.08 * v.squaredNorm() + 0.08 * m.drift_at(x, 0).sum();
    CHECK(h_lambda(m, x, 0, 1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2), ctx) ==
          doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("transform identity at polynomial probes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), pos(0.05, 3.0);
    const ModelSpec m = full_model_2d();
    const TransformContext ctx = TransformContext::for_model(m);
    for (int probe = 0; probe < 20; ++probe) {
        Poly phi[2];
        for (auto& p : phi)
            for (double& c : p.c) c = coef(rng);
        const double x1 = pos(rng), x2 = pos(rng);
        const Eigen::VectorXd x = vec({x1, x2});
        const double s = x1 + x2, e = std::exp(-ctx.lambda * s);
        for (int a = 0; a < 2; ++a) {
            // F on phi itself
            const double xi[] = {phi[0].value(x1, x2), phi[1].value(x1, x2)};
            const double F = f_value(m, x, a, xi, phi[a].grad(x1, x2), phi[a].hess(x1, x2));
            // transformed probe: t = e^{-ls} phi, derivatives by the product rule
            const double t = e * xi[a];
            const Eigen::Vector2d one = Eigen::Vector2d::Ones();
            const Eigen::Vector2d dt = e * (phi[a].grad(x1, x2) - ctx.lambda * xi[a] * one);
            const Eigen::Matrix2d ht =
                e * (phi[a].hess(x1, x2) - ctx.lambda * (one * phi[a].grad(x1, x2).transpose() +
                                                         phi[a].grad(x1, x2) * one.transpose()) +
                     ctx.lambda * ctx.lambda * xi[a] * one * one.transpose());
            double coupling = 0.0;
            for (int j = 0; j < 2; ++j) coupling += m.generator()(a, j) * e * xi[j];
            const double lhs = m.discount() * t - h_lambda(m, x, a, t, dt, ht, ctx) - coupling;
            const double rhs = e * F;
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

}
