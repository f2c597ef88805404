#pragma once

#include "ssc/grid.hpp"
#include "ssc/model.hpp"
#include "ssc/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace ssc {

/// Mixes a master seed and a path index into an independent 64-bit seed.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

struct RegimePath {
    std::vector<double> jump_times;  // jump_times[0] = 0
    std::vector<int> regimes;        // regime on [jump_times[k], jump_times[k+1])

    int at(double t) const;
};

/// Holding times ~ Exp(-q_ii), jump to j with probability q_ij / (-q_ii).
RegimePath simulate_chain(const Eigen::MatrixXd& q, int alpha0, double horizon, std::uint64_t seed);

/// Writes the cumulative control Z(t) into z (presized to n), given time, the
/// uncontrolled-step state, cumulative Brownian motion and the initial state.
using ControlRule = std::function<void(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& x0, Eigen::VectorXd& z)>;

enum class ProjectionMode { kPolicyRegion, kExplicitControl };

std::string_view to_string(ProjectionMode mode);

class PolicySource {
public:
    static PolicySource region(PolicyField policy);
    static PolicySource explicit_control(ControlRule rule, std::string name);
    /// Never pushes.
    static PolicySource none(const Grid& grid, int regimes);

    ProjectionMode mode() const noexcept { return mode_; }
    const PolicyField* policy() const noexcept { return policy_ ? &*policy_ : nullptr; }
    const ControlRule& rule() const noexcept { return rule_; }
    const std::string& name() const noexcept { return name_; }

private:
    ProjectionMode mode_ = ProjectionMode::kPolicyRegion;
    std::optional<PolicyField> policy_;
    ControlRule rule_;
    std::string name_;
};

struct SimOptions {
    double dt = 1e-3;
    std::optional<double> horizon;  // default from the affine bound when available
    long long paths = 10000;
    std::uint64_t seed = 0;
    int threads = 1;                // execution only; results do not depend on it

    void validate() const;
};

struct ControlledPath {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> x;
    std::vector<int> regime;
    std::vector<Eigen::VectorXd> z;
    Eigen::VectorXd initial_jump;   // Z(0) = x0 - X(0)
    double payoff = 0.0;
    bool z_nondecreasing = true;
    bool state_in_orthant = true;   // X >= -1e-12 at every sample
    long long clamp_events = 0;     // negative Euler states reset to 0 (region mode)
};

/// One path on [0, horizon]. `record` keeps every step.
ControlledPath simulate_controlled_path(const ModelSpec& model, const PolicySource& source,
                                        const Eigen::VectorXd& x0, int alpha0, double dt,
                                        double horizon, std::uint64_t path_seed, bool record = true);

struct PayoffEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    long long paths = 0;
    double horizon = 0.0;
    std::optional<double> tail_bound;   // e^{-rT} |f| (k0/r + 1.x); unknown without k0
    double scheme_allowance = 0.0;      // time-stepping / grid allowance
    bool admissible = true;             // every path kept Z nondecreasing and X in the orthant
    long long clamp_events = 0;
    std::vector<std::uint64_t> first_seeds;

    /// 3 SE + tail bound + scheme allowance.
    double tolerance() const;
};

/// T = ln(1000)/r when a verified k0 exists on the box [0, max(2 x0, 1)].
std::optional<double> default_horizon(const ModelSpec& model, const Eigen::VectorXd& x0);

PayoffEstimate estimate_payoff(const ModelSpec& model, const PolicySource& source,
                               const Eigen::VectorXd& x0, int alpha0, const SimOptions& opts);

struct DppReport {
    double value_at_x0 = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double allowance = 0.0;
    bool upper_ok = true;   // estimate <= V + 3 SE + allowance
    bool lower_ok = true;   // estimate >= V - 3 SE - allowance
};

/// E[int_0^t e^{-rs} f.dZ + e^{-rt} V(X_t, a_t)] under the source, against V(x0, a0).
DppReport dpp_sanity(const ModelSpec& model, const ValueField& value, const PolicySource& source,
                     const Eigen::VectorXd& x0, int alpha0, double t, const SimOptions& opts);

/// Z(t) = x0 + t 1: initial lump then unit rate.
ControlRule unit_rate_rule();
/// Z(t) = x0 + W(t)^2 (first noise component); not monotone in t.
ControlRule squared_brownian_rule();

}  // namespace ssc
