#include "ssc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ssc {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ModelSpec::ModelSpec(std::string name, double discount, CoefficientField drift,
                     CoefficientField diffusion, CoefficientField reward,
                     Eigen::MatrixXd generator, std::optional<double> kappa0)
    : name_(std::move(name)), discount_(discount), drift_(std::move(drift)),
      diffusion_(std::move(diffusion)), reward_(std::move(reward)),
      generator_(std::move(generator)), kappa0_(kappa0) {
    if (!(discount_ > 0.0) || !std::isfinite(discount_))
        throw Error(ErrorCode::kInvalidArgument, "discount rate r must be positive");
    const int n = drift_.rows();
    if (drift_.cols() != 1 || reward_.cols() != 1)
        throw Error(ErrorCode::kInvalidArgument, "drift and reward must be vector fields");
    if (diffusion_.rows() != n || reward_.rows() != n)
        throw Error(ErrorCode::kInvalidArgument, "drift/diffusion/reward row counts differ");
    if (drift_.dim() != n || diffusion_.dim() != n || reward_.dim() != n)
        throw Error(ErrorCode::kInvalidArgument, "coefficient input dimension must equal n");
    if (generator_.rows() < 1 || generator_.rows() != generator_.cols())
        throw Error(ErrorCode::kInvalidArgument, "generator must be a nonempty square matrix");
    const int m = static_cast<int>(generator_.rows());
    if (drift_.regimes() != m || diffusion_.regimes() != m || reward_.regimes() != m)
        throw Error(ErrorCode::kInvalidArgument, "coefficient regime count must equal m");
    if (!generator_.allFinite())
        throw Error(ErrorCode::kInvalidArgument, "generator has non-finite entries");
    if (kappa0_ && !(*kappa0_ > 0.0))
        throw Error(ErrorCode::kInvalidArgument, "kappa0 must be positive");
}

Eigen::VectorXd ModelSpec::drift_at(const Eigen::VectorXd& x, int regime) const {
    return drift_(x, regime);
}

Eigen::MatrixXd ModelSpec::diffusion_at(const Eigen::VectorXd& x, int regime) const {
    return diffusion_(x, regime);
}

Eigen::VectorXd ModelSpec::reward_at(const Eigen::VectorXd& x, int regime) const {
    return reward_(x, regime);
}

Eigen::MatrixXd ModelSpec::covariance_at(const Eigen::VectorXd& x, int regime) const {
    const Eigen::MatrixXd s = diffusion_(x, regime);
    return s * s.transpose();
}

ModelSpec ModelSpec::with_regime_order(std::span<const int> order) const {
    const int m = static_cast<int>(order.size());
    for (int a : order)
        if (a < 0 || a >= regimes()) throw Error(ErrorCode::kInvalidArgument, "regime index out of range");
    Eigen::MatrixXd q(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) q(a, b) = generator_(order[a], order[b]);
    return ModelSpec(name_, discount_, drift_.with_regime_order(order),
                     diffusion_.with_regime_order(order), reward_.with_regime_order(order), q,
                     kappa0_);
}

ModelSpec ModelSpec::restricted(std::span<const int> axes) const {
    return ModelSpec(name_, discount_, drift_.restricted(axes), diffusion_.restricted(axes),
                     reward_.restricted(axes), generator_, kappa0_);
}

ModelSpec ModelSpec::with_name(std::string name) const {
    ModelSpec out = *this;
    out.name_ = std::move(name);
    return out;
}

ModelSpec ModelSpec::with_discount(double discount) const {
    return ModelSpec(name_, discount, drift_, diffusion_, reward_, generator_, kappa0_);
}

ModelSpec ModelSpec::with_generator(Eigen::MatrixXd generator) const {
    return ModelSpec(name_, discount_, drift_, diffusion_, reward_, std::move(generator), kappa0_);
}

ModelSpec ModelSpec::with_kappa0(std::optional<double> kappa0) const {
    return ModelSpec(name_, discount_, drift_, diffusion_, reward_, generator_, kappa0);
}

ValidationResult validate_generator(const Eigen::MatrixXd& q, bool strict) {
    if (q.rows() != q.cols() || q.rows() == 0)
        throw Error(ErrorCode::kInvalidArgument, "generator must be square");
    const auto m = q.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j && q(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "q(" << i << "," << j << ") = " << q(i, j) << " < 0";
                return ValidationResult::reject({ErrorCode::kNegativeOffDiagonal, msg.str(),
                                                 {static_cast<int>(i), static_cast<int>(j)}, {}, {}});
            }
        }
        const double sum = q.row(i).sum();
        if (std::abs(sum) > kGeneratorRowTolerance) {
            std::ostringstream msg;
            msg << "row " << i << " sums to " << sum;
            return ValidationResult::reject(
                {ErrorCode::kRowSumNonzero, msg.str(), {static_cast<int>(i)}, {}, {}});
        }
        if (strict && m > 1 && !(q(i, i) < 0.0)) {
            std::ostringstream msg;
            msg << "q(" << i << "," << i << ") = " << q(i, i) << " is not negative";
            return ValidationResult::reject(
                {ErrorCode::kZeroDiagonalInStrictMode, msg.str(), {static_cast<int>(i)}, {}, {}});
        }
    }
    return ValidationResult::accept();
}

ValidationResult validate_reward(const ModelSpec& model,
                                 std::span<const Eigen::VectorXd> samples) {
    if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "reward samples must be nonempty");
    const int n = model.dim();
    const int m = model.regimes();
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < m; ++a) {
        const Eigen::VectorXd f0 = model.reward_at(origin, a);
        for (int i = 0; i < n; ++i) {
            if (!(f0[i] > 0.0) || !std::isfinite(f0[i])) {
                std::ostringstream msg;
                msg << "f_" << i << "(0, " << a << ") = " << f0[i];
                return ValidationResult::reject({ErrorCode::kNonpositiveAtOrigin, msg.str(),
                                                 {a, i}, to_std(origin), {}});
            }
        }
    }
    std::vector<Eigen::VectorXd> values(samples.size());
    for (int a = 0; a < m; ++a) {
        for (std::size_t s = 0; s < samples.size(); ++s) values[s] = model.reward_at(samples[s], a);
        for (std::size_t p = 0; p < samples.size(); ++p) {
            for (std::size_t q = 0; q < samples.size(); ++q) {
                if (p == q || !(samples[p].array() <= samples[q].array()).all()) continue;
                // x = samples[p] <= y = samples[q] requires f(x) >= f(y).
                for (int i = 0; i < n; ++i) {
                    if (values[p][i] < values[q][i] - kRewardMonotoneTolerance) {
                        std::ostringstream msg;
                        msg << "f_" << i << " increases from " << values[p][i] << " to "
                            << values[q][i] << " in regime " << a;
                        return ValidationResult::reject({ErrorCode::kNotNonincreasing, msg.str(),
                                                         {a, i}, to_std(samples[p]),
                                                         to_std(samples[q])});
                    }
                }
            }
        }
    }
    return ValidationResult::accept();
}

ComparisonReport check_comparison_conditions(const ModelSpec& model, double kappa0,
                                             std::span<const PointPair> samples) {
    if (!(kappa0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kappa0 must be positive");
    ComparisonReport report;
    report.kappa0 = kappa0;
    auto note = [&](const char* condition, const Eigen::VectorXd& x, int regime, double excess) {
        if (excess <= 0.0) return;
        if (!report.worst || excess > report.worst->excess)
            report.worst = ComparisonReport::Worst{condition, to_std(x), regime, excess};
    };
    const int m = model.regimes();
    for (const auto& [x, y] : samples) {
        for (int a = 0; a < m; ++a) {
            const Eigen::VectorXd bx = model.drift_at(x, a);
            const Eigen::VectorXd by = model.drift_at(y, a);
            const Eigen::MatrixXd sx = model.diffusion_at(x, a);
            const Eigen::MatrixXd sy = model.diffusion_at(y, a);
            const double lip = (bx - by).norm() + (sx - sy).norm() - kappa0 * (x - y).norm();
            if (lip > 1e-12) report.lipschitz_ok = false;
            note("lipschitz", x, a, lip);
            for (const auto* pt : {&x, &y}) {
                const Eigen::VectorXd b = model.drift_at(*pt, a);
                const Eigen::MatrixXd s = model.diffusion_at(*pt, a);
                const double drift_excess = b.sum() - kappa0;
                const double diff_excess = (s.transpose() * Eigen::VectorXd::Ones(s.rows())).norm() - kappa0;
                if (drift_excess > 1e-12) report.drift_sum_ok = false;
                if (diff_excess > 1e-12) report.diffusion_sum_ok = false;
                note("drift_sum", *pt, a, drift_excess);
                note("diffusion_sum", *pt, a, diff_excess);
            }
        }
    }
    return report;
}

bool check_example3_params(double mu1, double mu2, double r, double lambda1, double lambda2) {
    for (double v : {mu1, mu2, r, lambda1, lambda2})
        if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "parameters must be finite");
    if (!(r > 0.0) || !(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw Error(ErrorCode::kNonpositiveParameter, "r, lambda1 and lambda2 must be positive");
    if (!(mu1 < r && r < mu2)) return false;
    const double denom = r + lambda1 - mu1;
    const double bound = (r * lambda1 + (r - mu1) * (r + lambda2)) / denom;
    return mu2 <= bound;
}

LyapunovReport lyapunov_check(const ScalarField& psi, const ModelSpec& model,
                              std::span<const Eigen::VectorXd> samples) {
    if (!psi.value) throw Error(ErrorCode::kDerivativeUnavailable, "Lyapunov function has no value");
    LyapunovReport report;
    report.max_value = -std::numeric_limits<double>::infinity();
    const int m = model.regimes();
    const auto& q = model.generator();
    for (const auto& x : samples) {
        for (int a = 0; a < m; ++a) {
            const Jet j = jet(psi, x, a);
            const Eigen::VectorXd b = model.drift_at(x, a);
            const Eigen::MatrixXd cov = model.covariance_at(x, a);
            double value = b.dot(j.gradient) + 0.5 * (cov.cwiseProduct(j.hessian)).sum();
            for (int k = 0; k < m; ++k) value += q(a, k) * psi.value(x, k);
            if (!std::isfinite(value))
                throw Error(ErrorCode::kDerivativeUnavailable, "non-finite L Psi at sample");
            report.samples.push_back({to_std(x), a, value});
            report.max_value = std::max(report.max_value, value);
        }
    }
    if (samples.empty()) report.max_value = 0.0;
    report.passed = report.max_value <= 1e-8;
    return report;
}

std::vector<Eigen::VectorXd> lattice_points(std::span<const double> upper, int per_axis) {
    if (per_axis < 2) throw Error(ErrorCode::kInvalidArgument, "lattice needs >= 2 points per axis");
    const auto n = static_cast<int>(upper.size());
    std::size_t count = 1;
    for (int k = 0; k < n; ++k) count *= static_cast<std::size_t>(per_axis);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Eigen::VectorXd x(n);
        std::size_t rem = idx;
        for (int k = n - 1; k >= 0; --k) {
            const auto i = rem % static_cast<std::size_t>(per_axis);
            rem /= static_cast<std::size_t>(per_axis);
            x[k] = upper[k] * static_cast<double>(i) / (per_axis - 1);
        }
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<PointPair> lattice_pairs(std::span<const double> upper, int per_axis) {
    const auto n = static_cast<int>(upper.size());
    std::vector<PointPair> out;
    for (const auto& x : lattice_points(upper, per_axis)) {
        Eigen::VectorXd diag = x;
        bool diag_ok = true;
        for (int k = 0; k < n; ++k) {
            const double h = upper[k] / (per_axis - 1);
            if (x[k] + h > upper[k] * (1 + 1e-12)) {
                diag_ok = false;
                continue;
            }
            Eigen::VectorXd y = x;
            y[k] += h;
            diag[k] += h;
            out.emplace_back(x, y);
        }
        if (diag_ok && n > 1) out.emplace_back(x, diag);
    }
    return out;
}

double reward_sup(const ModelSpec& model, std::span<const double> upper, int per_axis) {
    double sup = 0.0;
    for (const auto& x : lattice_points(upper, per_axis))
        for (int a = 0; a < model.regimes(); ++a)
            sup = std::max(sup, model.reward_at(x, a).cwiseAbs().maxCoeff());
    return sup;
}

std::optional<double> verified_kappa0(const ModelSpec& model, std::span<const double> upper,
                                      int per_axis) {
    if (!model.kappa0()) return std::nullopt;
    const auto pairs = lattice_pairs(upper, per_axis);
    const auto report = check_comparison_conditions(model, *model.kappa0(), pairs);
    if (!report.all_ok()) return std::nullopt;
    return model.kappa0();
}

}  // namespace ssc
