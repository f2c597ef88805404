#pragma once

#include "ssc/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ssc::test {

// Constant-coefficient 1-d model with one entry per regime.
inline ModelSpec constant_1d(double r, std::vector<double> b, std::vector<double> s, std::vector<double> f,
                             Eigen::MatrixXd q, std::optional<double> kappa0 = std::nullopt) {
    auto wrap = [](const std::vector<double>& v) {
        std::vector<std::vector<double>> out;
        for (double x : v) out.push_back({x});
        return out;
    };
    return ModelSpec("constant_1d", r, CoefficientField::constant(1, 1, 1, wrap(b)),
                     CoefficientField::constant(1, 1, 1, wrap(s)), CoefficientField::constant(1, 1, 1, wrap(f)),
                     std::move(q), kappa0);
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double e : row) m(i, j++) = e;
        ++i;
    }
    return m;
}

// Two copies of the geometric two-regime model sharing one chain, reward (1, 1).
inline ModelSpec product_model() {
    const double mu1 = 0.0, mu2 = 0.15, r = 0.1, l1 = 1.0, l2 = 1.0, s1 = 0.2, s2 = 0.2;
    return ModelSpec("product", r, CoefficientField::geometric(2, 1, {{mu1, mu1}, {mu2, mu2}}),
                     CoefficientField::geometric(2, 2, {{s1, 0, 0, s1}, {s2, 0, 0, s2}}),
                     CoefficientField::constant(2, 1, 2, {{1, 1}, {1, 1}}), mat({{-l1, l1}, {l2, -l2}}));
}

// Three regimes with distinct drifts, volatilities and rewards.
inline ModelSpec three_regime_model() {
    return ModelSpec("three", 0.2, CoefficientField::geometric(1, 1, {{0.05}, {0.3}, {-0.1}}),
                     CoefficientField::geometric(1, 1, {{0.2}, {0.4}, {0.1}}),
                     CoefficientField::constant(1, 1, 1, {{1.0}, {0.8}, {1.3}}),
                     mat({{-1, 0.4, 0.6}, {0.3, -0.5, 0.2}, {1.0, 1.0, -2.0}}));
}

// 2-d, two regimes, affine drift and a full (correlated) constant diffusion.
inline ModelSpec full_model_2d() {
    auto drift = CoefficientField::affine(2, 1, 2, {{0.1, 0.0, 0.0, -0.2}, {0.05, 0.02, 0.0, 0.1}},
                                          {{0.5, 0.3}, {-0.2, 0.4}});
    auto sig = CoefficientField::constant(2, 2, 2, {{0.5, 0.1, 0.2, 0.4}, {0.3, -0.1, 0.05, 0.6}});
    auto f = CoefficientField::constant(2, 1, 2, {{1.0, 2.0}, {1.5, 0.5}});
    return ModelSpec("full2d", 0.7, drift, sig, f, mat({{-2, 2}, {1, -1}}));
}

// Cubic polynomial in two variables with analytic derivatives.
struct Poly {
    double c[10];  // 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3
    double value(double x, double y) const {
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y + c[6] * x * x * x +
               c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y;
    }
    Eigen::Vector2d grad(double x, double y) const {
        return {c[1] + 2 * c[3] * x + c[4] * y + 3 * c[6] * x * x + 2 * c[7] * x * y + c[8] * y * y,
                c[2] + c[4] * x + 2 * c[5] * y + c[7] * x * x + 2 * c[8] * x * y + 3 * c[9] * y * y};
    }
    Eigen::Matrix2d hess(double x, double y) const {
        Eigen::Matrix2d h;
        h(0, 0) = 2 * c[3] + 6 * c[6] * x + 2 * c[7] * y;
        h(0, 1) = h(1, 0) = c[4] + 2 * c[7] * x + 2 * c[8] * y;
        h(1, 1) = 2 * c[5] + 2 * c[8] * x + 6 * c[9] * y;
        return h;
    }
};

}  // namespace ssc::test
