#include "ssc/builtin_models.hpp"

#include <cmath>

namespace ssc {

namespace {

Eigen::MatrixXd zero_generator() { return Eigen::MatrixXd::Zero(1, 1); }

CoefficientField unit_reward() { return CoefficientField::constant(1, 1, 1, {{1.0}}); }

}  // namespace

ModelSpec example1() {
    return ModelSpec("example1", 1.0, CoefficientField::constant(1, 1, 1, {{1.0}}),
                     CoefficientField::constant(1, 1, 1, {{0.0}}), unit_reward(),
                     zero_generator(), 1.0);
}

ModelSpec example2() {
    return ModelSpec("example2", 1.0, CoefficientField::constant(1, 1, 1, {{0.0}}),
                     CoefficientField::constant(1, 1, 1, {{std::sqrt(2.0)}}), unit_reward(),
                     zero_generator(), std::sqrt(2.0));
}

ModelSpec example3(const Example3Params& p) {
    check_example3_params(p.mu1, p.mu2, p.r, p.lambda1, p.lambda2);
    Eigen::MatrixXd q(2, 2);
    q << -p.lambda1, p.lambda1, p.lambda2, -p.lambda2;
    return ModelSpec("example3", p.r, CoefficientField::geometric(1, 1, {{p.mu1}, {p.mu2}}),
                     CoefficientField::geometric(1, 1, {{p.sigma1}, {p.sigma2}}),
                     CoefficientField::constant(1, 1, 1, {{1.0}, {1.0}}), q);
}

ModelSpec example4() {
    return ModelSpec("example4", 1.0, CoefficientField::constant(1, 1, 1, {{1.0}}),
                     CoefficientField::sqrt_power(1, 1, {{2.0}}), unit_reward(),
                     zero_generator());
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3", "example4"};
    return names;
}

ModelSpec builtin_model(std::string_view name) {
    if (name == "example1") return example1();
    if (name == "example2") return example2();
    if (name == "example3") return example3();
    if (name == "example4") return example4();
    throw Error(ErrorCode::kConfig, "unknown builtin model '" + std::string(name) + "'");
}

}  // namespace ssc
