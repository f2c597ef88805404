#include "ssc/scalar_field.hpp"

#include "ssc/errors.hpp"

#include <cmath>

namespace ssc {

namespace {

double first_central(const ScalarField& f, Eigen::VectorXd x, int regime, int i, double h) {
    const double xi = x[i];
    x[i] = xi + h;
    const double up = f.value(x, regime);
    x[i] = xi - h;
    const double down = f.value(x, regime);
    return (up - down) / (2.0 * h);
}

double second_central(const ScalarField& f, Eigen::VectorXd x, int regime, int i, int j,
                      double h, double center) {
    if (i == j) {
        const double xi = x[i];
        x[i] = xi + h;
        const double up = f.value(x, regime);
        x[i] = xi - h;
        const double down = f.value(x, regime);
        return (up - 2.0 * center + down) / (h * h);
    }
    auto at = [&](double si, double sj) {
        Eigen::VectorXd y = x;
        y[i] += si * h;
        y[j] += sj * h;
        return f.value(y, regime);
    };
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
}

}  // namespace

Jet jet(const ScalarField& field, const Eigen::VectorXd& x, int regime,
        const FiniteDifference& fd) {
    const auto n = x.size();
    Jet out;
    out.value = field.value(x, regime);
    if (field.gradient) {
        out.gradient = field.gradient(x, regime);
    } else {
        out.gradient.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = fd.gradient_step;
            double d = first_central(field, x, regime, static_cast<int>(i), h);
            if (fd.richardson) {
                const double d2 = first_central(field, x, regime, static_cast<int>(i), h / 2);
                d = (4.0 * d2 - d) / 3.0;
            }
            out.gradient[i] = d;
        }
    }
    if (field.hessian) {
        out.hessian = field.hessian(x, regime);
    } else {
        out.hessian.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double h = fd.hessian_step;
                double d = second_central(field, x, regime, static_cast<int>(i),
                                          static_cast<int>(j), h, out.value);
                if (fd.richardson) {
                    const double d2 = second_central(field, x, regime, static_cast<int>(i),
                                                     static_cast<int>(j), h / 2, out.value);
                    d = (4.0 * d2 - d) / 3.0;
                }
                out.hessian(i, j) = d;
                out.hessian(j, i) = d;
            }
        }
    }
    if (!std::isfinite(out.value) || !out.gradient.allFinite() || !out.hessian.allFinite())
        throw Error(ErrorCode::kDerivativeUnavailable, "non-finite jet at probe point");
    return out;
}

}  // namespace ssc
