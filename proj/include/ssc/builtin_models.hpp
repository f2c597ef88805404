#pragma once

#include "ssc/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ssc {

// Two-regime geometric model: dX = mu_a X dt + sigma_a X dW - dZ, f = 1,
// Q = [[-lambda1, lambda1], [lambda2, -lambda2]].
struct Example3Params {
    double mu1 = 0.0;
    double mu2 = 0.15;
    double r = 0.1;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double sigma1 = 0.2;
    double sigma2 = 0.2;
};

// dX = dt - dZ, r = 1, f = 1.
ModelSpec example1();
// dX = sqrt(2) dW - dZ, r = 1, f = 1. No classical solution exists.
ModelSpec example2();
ModelSpec example3(const Example3Params& p = {});
// Squared Bessel: dX = dt + 2 sqrt(X) dW - dZ, r = 1, f = 1.
ModelSpec example4();

const std::vector<std::string>& builtin_names();
ModelSpec builtin_model(std::string_view name);

}  // namespace ssc
