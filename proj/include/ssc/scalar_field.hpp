#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace ssc {

/// A per-regime scalar function x -> u(x, a) with optional analytic derivatives.
/// Used for Lyapunov functions, closed-form candidates and probe functions.
struct ScalarField {
    using Value = std::function<double(const Eigen::VectorXd&, int)>;
    using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>;
    using Hessian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)>;

    std::string name;
    Value value;
    Gradient gradient;  // may be empty
    Hessian hessian;    // may be empty
};

struct Jet {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Finite-difference settings. Central differences; when `richardson` is set,
/// each derivative is extrapolated from steps h and h/2.
struct FiniteDifference {
    double gradient_step = 1e-5;
    double hessian_step = 1e-4;
    bool richardson = false;
};

/// Value, gradient and Hessian at (x, regime); analytic where provided,
/// finite differences otherwise.
Jet jet(const ScalarField& field, const Eigen::VectorXd& x, int regime,
        const FiniteDifference& fd = {});

}  // namespace ssc
