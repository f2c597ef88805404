#include "ssc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace ssc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

int RegimePath::at(double t) const {
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return regimes[static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - jump_times.begin() - 1, 0))];
}

RegimePath simulate_chain(const Eigen::MatrixXd& q, int alpha0, double horizon, std::uint64_t seed) {
    const auto m = static_cast<int>(q.rows());
    if (alpha0 < 0 || alpha0 >= m) throw Error(ErrorCode::kInvalidArgument, "initial regime out of range");
    if (!(horizon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be nonnegative");
    const auto check = validate_generator(q, false);
    if (!check.ok()) throw Error(check.violation->code, check.violation->message);
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    RegimePath path{{0.0}, {alpha0}};
    double t = 0.0;
    int a = alpha0;
    while (true) {
        const double rate = -q(a, a);
        if (rate <= 0.0) break;
        t += std::exponential_distribution<double>(rate)(engine);
        if (t > horizon) break;
        const double u = uniform(engine) * rate;
        double acc = 0.0;
        int next = a;
        for (int j = 0; j < m; ++j) {
            if (j == a || q(a, j) <= 0.0) continue;
            acc += q(a, j);
            next = j;
            if (u < acc) break;
        }
        a = next;
        path.jump_times.push_back(t);
        path.regimes.push_back(a);
    }
    return path;
}

std::string_view to_string(ProjectionMode mode) {
    return mode == ProjectionMode::kPolicyRegion ? "POLICY_REGION" : "EXPLICIT_CONTROL";
}

PolicySource PolicySource::region(PolicyField policy) {
    PolicySource s;
    s.mode_ = ProjectionMode::kPolicyRegion;
    s.policy_ = std::move(policy);
    s.name_ = "policy_region";
    return s;
}

PolicySource PolicySource::explicit_control(ControlRule rule, std::string name) {
    if (!rule) throw Error(ErrorCode::kInvalidArgument, "explicit control needs a rule");
    PolicySource s;
    s.mode_ = ProjectionMode::kExplicitControl;
    s.rule_ = std::move(rule);
    s.name_ = std::move(name);
    return s;
}

PolicySource PolicySource::none(const Grid& grid, int regimes) {
    PolicySource s = region(PolicyField(grid, regimes));
    s.name_ = "no_control";
    return s;
}

void SimOptions::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
    if (horizon && !(*horizon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
    if (paths < 1) throw Error(ErrorCode::kInvalidArgument, "path count must be >= 1");
    if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "thread count must be >= 1");
}

double PayoffEstimate::tolerance() const {
    return 3.0 * standard_error + tail_bound.value_or(0.0) + scheme_allowance;
}

namespace {

double indicator(const PolicyField& policy, const Eigen::VectorXd& x, int regime) {
    double acc = 0.0;
    for_each_corner(policy.grid(), x, [&](std::size_t node, double w) {
        if (w != 0.0 && policy(node, regime) == PolicyField::kContinue) acc += w;
    });
    return acc;
}

constexpr double kInsideEps = 1e-12;

bool inside(const PolicyField& policy, const Eigen::VectorXd& x, int regime) {
    return indicator(policy, x, regime) >= 0.5 - kInsideEps;
}

std::size_t nearest_node(const Grid& g, const Eigen::VectorXd& x) {
    std::size_t node = 0;
    for (int k = 0; k < g.dim(); ++k) {
        const double t = std::clamp(x[k], 0.0, g.upper(k)) / g.step(k);
        const int i = std::min(static_cast<int>(std::lround(t)), g.nodes(k) - 1);
        node += static_cast<std::size_t>(i) * g.stride(k);
    }
    return node;
}

// Largest x_i' <= x_i with the point inside the region closure (0 if none).
// The indicator is linear in x_i within a cell, so the crossing is exact.
double smallest_decrease(const PolicyField& policy, Eigen::VectorXd x, int regime, int axis) {
    const Grid& g = policy.grid();
    const double h = g.step(axis);
    const int cells = g.nodes(axis) - 1;
    double cur = std::min(x[axis], g.upper(axis));
    int c = cur >= g.upper(axis) ? cells - 1 : std::min(static_cast<int>(cur / h), cells - 1);
    while (true) {
        const double lo = c * h;
        const double hi = c == cells - 1 ? g.upper(axis) : (c + 1) * h;
        x[axis] = lo;
        const double i_lo = indicator(policy, x, regime);
        x[axis] = hi;
        const double i_hi = indicator(policy, x, regime);
        const double slope = (i_hi - i_lo) / (hi - lo);
        const double i_cur = i_lo + slope * (cur - lo);
        if (i_cur >= 0.5 - kInsideEps) return cur;
        if (i_lo >= 0.5 - kInsideEps) return std::clamp(lo + (0.5 - i_lo) / slope, lo, cur);
        if (c == 0) return 0.0;
        --c;
        cur = lo;
    }
}

// Pushes x into the region; returns the decrease per axis.
Eigen::VectorXd project(const PolicyField& policy, Eigen::VectorXd& x, int regime) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(n);
    for (int round = 0; round < 2 * n && !inside(policy, x, regime); ++round) {
        const int label = policy(nearest_node(policy.grid(), x), regime);
        int axis = label - 1;
        if (axis < 0 || x[axis] <= 0.0) {
            axis = -1;
            for (int k = 0; k < n && axis < 0; ++k)
                if (x[k] > 0.0) axis = k;
        }
        if (axis < 0) break;
        const double target = smallest_decrease(policy, x, regime, axis);
        dz[axis] += x[axis] - target;
        x[axis] = target;
    }
    return dz;
}

bool frozen_at_origin(const ModelSpec& model) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.dim());
    for (int a = 0; a < model.regimes(); ++a) {
        if (model.drift_at(zero, a).cwiseAbs().maxCoeff() != 0.0) return false;
        if (model.diffusion_at(zero, a).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

void check_source(const ModelSpec& model, const PolicySource& source) {
    if (source.mode() != ProjectionMode::kPolicyRegion) return;
    const PolicyField* p = source.policy();
    if (!p) throw Error(ErrorCode::kRegionUnavailable, "no policy field for region projection");
    if (p->grid().dim() != model.dim() || p->regimes() != model.regimes())
        throw Error(ErrorCode::kRegionUnavailable, "policy field does not match the model");
}

}  // namespace

ControlledPath simulate_controlled_path(const ModelSpec& model, const PolicySource& source,
                                        const Eigen::VectorXd& x0, int alpha0, double dt,
                                        double horizon, std::uint64_t path_seed, bool record) {
    const int n = model.dim();
    const int d = model.noise_dim();
    if (x0.size() != n) throw Error(ErrorCode::kInvalidArgument, "x0 has wrong dimension");
    if ((x0.array() < 0.0).any()) throw Error(ErrorCode::kInvalidArgument, "x0 must lie in the closed orthant");
    if (!(dt > 0.0) || !(horizon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "bad time grid");
    check_source(model, source);

    const double r = model.discount();
    const RegimePath chain = simulate_chain(model.generator(), alpha0, horizon, split_seed(path_seed, 1));
    std::mt19937_64 engine(split_seed(path_seed, 2));
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool noisy = !model.diffusion().identically_zero();
    const bool region = source.mode() == ProjectionMode::kPolicyRegion;
    const bool frozen = region && frozen_at_origin(model);

    ControlledPath path;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    int a = alpha0;

    // step workspace; nothing below allocates per step in explicit mode
    Eigen::VectorXd xs(n), b(n), f(n), next(n), dz(n), z_next(n), dw(d);
    std::vector<double> sig(static_cast<std::size_t>(n) * d);
    auto eval = [](const CoefficientField& c, const Eigen::VectorXd& at, int regime, double* out, int len) {
        c.evaluate(std::span<const double>(at.data(), static_cast<std::size_t>(at.size())), regime,
                   std::span<double>(out, static_cast<std::size_t>(len)));
    };

    eval(model.reward(), x0, alpha0, f.data(), n);
    if (region) {
        z = project(*source.policy(), x, a);
    } else {
        source.rule()(0.0, x0, w, x0, z);
        if ((z.array() < 0.0).any()) path.z_nondecreasing = false;
        x = x0 - z;
    }
    path.initial_jump = z;
    path.payoff = f.dot(z);
    auto sample = [&](double t) {
        path.t.push_back(t);
        path.x.push_back(x);
        path.regime.push_back(a);
        path.z.push_back(z);
    };
    if (record) sample(0.0);

    const auto steps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
    double disc0 = 1.0;
    for (long long k = 0; k < steps; ++k) {
        const double t0 = static_cast<double>(k) * dt;
        const double t1 = k + 1 == steps ? horizon : static_cast<double>(k + 1) * dt;
        const double h = t1 - t0;
        if (frozen && (x.array() == 0.0).all()) break;
        xs = x.cwiseMax(0.0);
        eval(model.drift(), xs, a, b.data(), n);
        next = x + b * h;
        if (noisy) {
            const double sh = std::sqrt(h);
            for (int j = 0; j < d; ++j) dw[j] = sh * normal(engine);
            w += dw;
            eval(model.diffusion(), xs, a, sig.data(), n * d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) next[i] += sig[static_cast<std::size_t>(i) * d + j] * dw[j];
        }
        a = chain.at(t1);
        const double disc1 = std::exp(-r * t1);
        const double weight = (disc0 - disc1) / (r * h);
        disc0 = disc1;
        if (region) {
            for (int i = 0; i < n; ++i) {
                if (next[i] < 0.0) {
                    next[i] = 0.0;
                    ++path.clamp_events;
                }
            }
            eval(model.reward(), next, a, f.data(), n);
            dz = project(*source.policy(), next, a);
        } else {
            source.rule()(t1, next, w, x0, z_next);
            dz = z_next - z;
            xs = next.cwiseMax(0.0);
            eval(model.reward(), xs, a, f.data(), n);
            next -= dz;
        }
        path.payoff += weight * f.dot(dz);
        if ((dz.array() < -1e-15).any()) path.z_nondecreasing = false;
        z += dz;
        x = next;
        if (!x.allFinite()) throw Error(ErrorCode::kNanState, "state became non-finite at t=" + std::to_string(t1));
        if ((x.array() < -1e-12).any()) path.state_in_orthant = false;
        if (record) sample(t1);
    }
    a = chain.at(horizon);
    if (!record) sample(horizon);
    return path;
}

std::optional<double> default_horizon(const ModelSpec& model, const Eigen::VectorXd& x0) {
    std::vector<double> box(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) box[i] = std::max(2.0 * x0[i], 1.0);
    if (!verified_kappa0(model, box)) return std::nullopt;
    return std::log(1000.0) / model.discount();
}

namespace {

struct PathOutcome {
    double value = 0.0;
    double terminal_bound = 0.0;
    bool admissible = true;
    long long clamps = 0;
};

template <class Fn>
std::vector<PathOutcome> run_paths(long long count, int threads, Fn&& one) {
    std::vector<PathOutcome> out(static_cast<std::size_t>(count));
    const int workers = static_cast<int>(std::min<long long>(threads, count));
    if (workers <= 1) {
        for (long long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = one(i);
        return out;
    }
    std::atomic<long long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const long long i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    out[static_cast<std::size_t>(i)] = one(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

void mean_and_se(const std::vector<PathOutcome>& outcomes, double& mean, double& se) {
    const auto n = static_cast<double>(outcomes.size());
    double sum = 0.0;
    for (const auto& o : outcomes) sum += o.value;
    mean = sum / n;
    double ss = 0.0;
    for (const auto& o : outcomes) ss += (o.value - mean) * (o.value - mean);
    se = outcomes.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
}

double allowance(const ModelSpec& model, const PolicySource& source, const Eigen::VectorXd& x0,
                 double dt) {
    std::vector<double> box(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) box[i] = std::max(2.0 * x0[i], 1.0);
    const double fsup = reward_sup(model, box);
    if (source.mode() == ProjectionMode::kExplicitControl) return fsup * dt;
    double h = 0.0;
    for (int k = 0; k < source.policy()->grid().dim(); ++k) h += source.policy()->grid().step(k);
    return fsup * (std::sqrt(dt) + h);
}

}  // namespace

PayoffEstimate estimate_payoff(const ModelSpec& model, const PolicySource& source,
                               const Eigen::VectorXd& x0, int alpha0, const SimOptions& opts) {
    opts.validate();
    check_source(model, source);
    if (alpha0 < 0 || alpha0 >= model.regimes())
        throw Error(ErrorCode::kInvalidArgument, "initial regime out of range");
    const auto fallback = default_horizon(model, x0);
    if (!opts.horizon && !fallback)
        throw Error(ErrorCode::kInvalidArgument,
                    "no verified kappa0 for this model; the horizon must be given explicitly");
    const double horizon = opts.horizon.value_or(fallback.value_or(0.0));

    std::vector<double> box(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) box[i] = std::max(2.0 * x0[i], 1.0);
    const auto kappa = verified_kappa0(model, box);
    const double fsup = reward_sup(model, box);

    const auto outcomes = run_paths(opts.paths, opts.threads, [&](long long i) {
        const auto p = simulate_controlled_path(model, source, x0, alpha0, opts.dt, horizon,
                                                split_seed(opts.seed, static_cast<std::uint64_t>(i)), false);
        PathOutcome o;
        o.value = p.payoff;
        o.terminal_bound = p.x.back().sum();
        o.admissible = p.z_nondecreasing && p.state_in_orthant;
        o.clamps = p.clamp_events;
        return o;
    });

    PayoffEstimate est;
    mean_and_se(outcomes, est.mean, est.standard_error);
    est.paths = opts.paths;
    est.horizon = horizon;
    double terminal = 0.0;
    for (const auto& o : outcomes) {
        est.admissible = est.admissible && o.admissible;
        est.clamp_events += o.clamps;
        terminal += o.terminal_bound;
    }
    terminal /= static_cast<double>(outcomes.size());
    if (kappa) {
        const double reach = std::max(x0.sum(), terminal);
        est.tail_bound = std::exp(-model.discount() * horizon) * fsup * (*kappa / model.discount() + reach);
    }
    est.scheme_allowance = allowance(model, source, x0, opts.dt);
    for (long long i = 0; i < std::min<long long>(opts.paths, 4); ++i)
        est.first_seeds.push_back(split_seed(opts.seed, static_cast<std::uint64_t>(i)));
    return est;
}

DppReport dpp_sanity(const ModelSpec& model, const ValueField& value, const PolicySource& source,
                     const Eigen::VectorXd& x0, int alpha0, double t, const SimOptions& opts) {
    opts.validate();
    check_source(model, source);
    if (!(t >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "time must be nonnegative");
    DppReport rep;
    rep.value_at_x0 = value.interpolate(x0, alpha0);
    if (t == 0.0) {
        rep.estimate = rep.value_at_x0;
        return rep;
    }
    const double r = model.discount();
    const auto outcomes = run_paths(opts.paths, opts.threads, [&](long long i) {
        const auto p = simulate_controlled_path(model, source, x0, alpha0, opts.dt, t,
                                                split_seed(opts.seed, static_cast<std::uint64_t>(i)), false);
        PathOutcome o;
        o.value = p.payoff + std::exp(-r * t) * value.interpolate(p.x.back().cwiseMax(0.0), p.regime.back());
        return o;
    });
    mean_and_se(outcomes, rep.estimate, rep.standard_error);
    double h = 0.0;
    for (int k = 0; k < value.grid().dim(); ++k) h += value.grid().step(k);
    rep.allowance = allowance(model, source, x0, opts.dt) + h;
    const double band = 3.0 * rep.standard_error + rep.allowance;
    rep.upper_ok = rep.estimate <= rep.value_at_x0 + band;
    rep.lower_ok = rep.estimate >= rep.value_at_x0 - band;
    return rep;
}

ControlRule unit_rate_rule() {
    return [](double t, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& x0,
              Eigen::VectorXd& z) { z = (x0.array() + t).matrix(); };
}

ControlRule squared_brownian_rule() {
    return [](double, const Eigen::VectorXd&, const Eigen::VectorXd& w, const Eigen::VectorXd& x0,
              Eigen::VectorXd& z) { z = (x0.array() + w[0] * w[0]).matrix(); };
}

}  // namespace ssc
