#pragma once

#include "ssc/coefficient_field.hpp"
#include "ssc/errors.hpp"
#include "ssc/scalar_field.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ssc {

/// Problem datum of a regime-switching singular control problem:
///   dX = b(X, a) dt + sigma(X, a) dW - dZ,   reward f(X-, a-) . dZ discounted at rate r,
/// with the regime a(t) a Markov chain generated by Q.
class ModelSpec {
public:
    ModelSpec(std::string name, double discount, CoefficientField drift,
              CoefficientField diffusion, CoefficientField reward, Eigen::MatrixXd generator,
              std::optional<double> kappa0 = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    int dim() const noexcept { return drift_.rows(); }
    int regimes() const noexcept { return static_cast<int>(generator_.rows()); }
    int noise_dim() const noexcept { return diffusion_.cols(); }
    double discount() const noexcept { return discount_; }
    const CoefficientField& drift() const noexcept { return drift_; }
    const CoefficientField& diffusion() const noexcept { return diffusion_; }
    const CoefficientField& reward() const noexcept { return reward_; }
    const Eigen::MatrixXd& generator() const noexcept { return generator_; }
    /// Declared bound for b.1 and |sigma'1| (and the Lipschitz constant), if any.
    std::optional<double> kappa0() const noexcept { return kappa0_; }

    Eigen::VectorXd drift_at(const Eigen::VectorXd& x, int regime) const;
    Eigen::MatrixXd diffusion_at(const Eigen::VectorXd& x, int regime) const;
    Eigen::VectorXd reward_at(const Eigen::VectorXd& x, int regime) const;
    /// sigma sigma' at (x, regime).
    Eigen::MatrixXd covariance_at(const Eigen::VectorXd& x, int regime) const;

    /// Regime a of the result is regime order[a] of this model. A subset
    /// selection keeps the corresponding block of Q.
    ModelSpec with_regime_order(std::span<const int> order) const;
    /// Reduced model on the face where only `axes` survive (others pinned at 0).
    ModelSpec restricted(std::span<const int> axes) const;
    ModelSpec with_name(std::string name) const;
    ModelSpec with_discount(double discount) const;
    ModelSpec with_generator(Eigen::MatrixXd generator) const;
    ModelSpec with_kappa0(std::optional<double> kappa0) const;

private:
    std::string name_;
    double discount_;
    CoefficientField drift_;
    CoefficientField diffusion_;
    CoefficientField reward_;
    Eigen::MatrixXd generator_;
    std::optional<double> kappa0_;
};

struct Violation {
    ErrorCode code;
    std::string message;
    std::vector<int> indices;         // row/column or regime/component indices
    std::vector<double> witness_x;    // offending point, when applicable
    std::vector<double> witness_y;    // second point of a witness pair
};

struct ValidationResult {
    std::optional<Violation> violation;

    bool ok() const noexcept { return !violation.has_value(); }
    static ValidationResult accept() { return {}; }
    static ValidationResult reject(Violation v) { return {std::move(v)}; }
};

inline constexpr double kGeneratorRowTolerance = 1e-12;
inline constexpr double kRewardMonotoneTolerance = 1e-12;

/// Accepts iff off-diagonals are nonnegative, rows sum to zero and, in strict
/// mode, every diagonal entry is negative. A one-regime chain is exempt from
/// the strict diagonal requirement (there is nowhere to jump).
ValidationResult validate_generator(const Eigen::MatrixXd& q, bool strict);

/// Sampled refutation of "f_i(., a) nonincreasing and 0 < f_i(0, a) < inf".
ValidationResult validate_reward(const ModelSpec& model, std::span<const Eigen::VectorXd> samples);

struct ComparisonReport {
    struct Worst {
        std::string condition;  // "lipschitz", "drift_sum" or "diffusion_sum"
        std::vector<double> x;
        int regime = 0;
        double excess = 0.0;    // amount by which the inequality fails
    };

    double kappa0 = 0.0;
    bool lipschitz_ok = true;
    bool drift_sum_ok = true;
    bool diffusion_sum_ok = true;
    std::optional<Worst> worst;

    bool all_ok() const noexcept { return lipschitz_ok && drift_sum_ok && diffusion_sum_ok; }
};

using PointPair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

/// Sampled check of |b(x)-b(y)| + |s(x)-s(y)| <= k0|x-y|, b.1 <= k0, |s'1| <= k0.
/// Sampling can refute these conditions, never prove them.
ComparisonReport check_comparison_conditions(const ModelSpec& model, double kappa0,
                                             std::span<const PointPair> samples);

/// mu1 < r < mu2 <= (r l1 + (r - mu1)(r + l2)) / (r + l1 - mu1).
bool check_example3_params(double mu1, double mu2, double r, double lambda1, double lambda2);

struct LyapunovReport {
    struct Sample {
        std::vector<double> x;
        int regime = 0;
        double value = 0.0;  // L Psi(x, regime)
    };
    double max_value = 0.0;
    bool passed = false;     // max_value <= 1e-8
    std::vector<Sample> samples;
};

/// Evaluates L Psi = b.DPsi + 1/2 tr(ss' D^2 Psi) + sum_j q_aj Psi(x, j) at interior samples.
LyapunovReport lyapunov_check(const ScalarField& psi, const ModelSpec& model,
                              std::span<const Eigen::VectorXd> samples);

/// Uniform lattice over [0, upper] with `per_axis` points per axis (last axis fastest).
std::vector<Eigen::VectorXd> lattice_points(std::span<const double> upper, int per_axis = 17);

/// Each lattice point paired with its forward neighbour along every axis and the
/// forward diagonal neighbour.
std::vector<PointPair> lattice_pairs(std::span<const double> upper, int per_axis = 17);

/// max |f_i(x, a)| over the lattice.
double reward_sup(const ModelSpec& model, std::span<const double> upper, int per_axis = 17);

/// Declared kappa0, if present and not refuted on the lattice over [0, upper].
std::optional<double> verified_kappa0(const ModelSpec& model, std::span<const double> upper,
                                      int per_axis = 17);

}  // namespace ssc
