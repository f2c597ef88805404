#include "ssc/solver.hpp"

#include "ssc/operators.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace ssc {

std::string_view to_string(OuterBoundary b) {
    return b == OuterBoundary::kGradientNeumann ? "GRADIENT_NEUMANN" : "AFFINE_DIRICHLET";
}

OuterBoundary outer_boundary_from_string(std::string_view name) {
    if (name == "GRADIENT_NEUMANN") return OuterBoundary::kGradientNeumann;
    if (name == "AFFINE_DIRICHLET") return OuterBoundary::kAffineDirichlet;
    throw Error(ErrorCode::kConfig, "unknown outer boundary '" + std::string(name) + "'");
}

PolicyField::PolicyField(Grid grid, int regimes)
    : grid_(std::move(grid)), regimes_(regimes),
      actions_(grid_.size() * static_cast<std::size_t>(regimes), kContinue) {}

std::string action_label(int action) {
    return action == PolicyField::kContinue ? "CONTINUE" : "PUSH_" + std::to_string(action);
}

void SolveOptions::validate() const {
    if (!(tolerance > 0.0) || !(linear_tolerance > 0.0) || !(tie_margin >= 0.0))
        throw Error(ErrorCode::kInvalidArgument, "solver tolerances must be positive");
    if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max iterations must be >= 1");
}

ValueField initial_guess(const ModelSpec& model, const Grid& grid) {
    ValueField v(grid, model.regimes());
    const auto kappa = verified_kappa0(model, grid.uppers());
    if (!kappa) return v;
    const double fsup = reward_sup(model, grid.uppers());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const double val = fsup * (*kappa / model.discount() + grid.point(node).sum());
        for (int a = 0; a < model.regimes(); ++a) v(node, a) = val;
    }
    return v;
}

namespace {

enum class RowKind : std::uint8_t { kFree, kNeumann, kDirichlet };

struct Rows {
    std::vector<RowKind> kind;          // per unknown
    std::vector<int> fixed_axis;        // Neumann axis
    std::vector<double> fixed_value;    // Dirichlet value
};

// The discrete problem for one policy iteration, with everything that does not
// depend on the iterate precomputed.
class Discretization {
public:
    Discretization(const ModelSpec& model, const Grid& grid, const SolveOptions& opts,
                   const DirichletPins& pins)
        : model_(model), grid_(grid), opts_(opts), m_(model.regimes()),
          unknowns_(grid.size() * static_cast<std::size_t>(m_)) {
        rows_.kind.assign(unknowns_, RowKind::kFree);
        rows_.fixed_axis.assign(unknowns_, -1);
        rows_.fixed_value.assign(unknowns_, 0.0);
        std::optional<double> kappa;
        double fsup = 0.0;
        if (opts.outer == OuterBoundary::kAffineDirichlet) {
            kappa = model.kappa0();
            if (!kappa)
                throw Error(ErrorCode::kInvalidArgument,
                            "AFFINE_DIRICHLET outer boundary needs a declared kappa0");
            fsup = reward_sup(model, grid.uppers());
        }
        stencils_.resize(unknowns_);
        rewards_.resize(unknowns_);
        for (std::size_t node = 0; node < grid.size(); ++node) {
            const Eigen::VectorXd x = grid.point(node);
            int upper_axis = -1;
            for (int k = 0; k < grid.dim() && upper_axis < 0; ++k)
                if (grid.at_upper(node, k)) upper_axis = k;
            for (int a = 0; a < m_; ++a) {
                const std::size_t u = unknown(node, a);
                rewards_[u] = model.reward_at(x, a);
                if (!pins.empty() && pins.mask[u]) {
                    rows_.kind[u] = RowKind::kDirichlet;
                    rows_.fixed_value[u] = pins.values[u];
                } else if (upper_axis >= 0) {
                    if (opts.outer == OuterBoundary::kGradientNeumann) {
                        rows_.kind[u] = RowKind::kNeumann;
                        rows_.fixed_axis[u] = upper_axis;
                    } else {
                        rows_.kind[u] = RowKind::kDirichlet;
                        rows_.fixed_value[u] = fsup * (*kappa / model.discount() + x.sum());
                    }
                }
                if (rows_.kind[u] == RowKind::kFree || grid.interior(node))
                    generator_stencil(model, grid, node, a, stencils_[u]);
            }
        }
    }

    std::size_t unknowns() const { return unknowns_; }
    std::size_t unknown(std::size_t node, int a) const {
        return node * static_cast<std::size_t>(m_) + static_cast<std::size_t>(a);
    }

    double continue_residual(const Eigen::VectorXd& v, std::size_t u) const {
        double lv = 0.0;
        for (const auto& t : stencils_[u]) lv += t.weight * v[unknown(t.node, t.regime)];
        return model_.discount() * v[u] - lv;
    }

    double push_residual(const Eigen::VectorXd& v, std::size_t node, int a, int axis) const {
        const std::size_t u = unknown(node, a);
        const std::size_t s = grid_.stride(axis);
        return (v[u] - v[unknown(node - s, a)]) / grid_.step(axis) - rewards_[u][axis];
    }

    // Minimizing action with CONTINUE preferred within the tie margin.
    int improve(const Eigen::VectorXd& v, std::size_t node, int a, int current) const {
        const std::size_t u = unknown(node, a);
        const double cont = continue_residual(v, u);
        // ties are judged relative to the local value, otherwise roundoff
        // flips between equally good pushes and the iteration never settles
        const double margin = opts_.tie_margin * (1.0 + std::abs(v[static_cast<Eigen::Index>(u)]));
        int best = PolicyField::kContinue;
        double best_res = std::numeric_limits<double>::infinity();
        double current_res = current == PolicyField::kContinue ? cont : std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid_.dim(); ++i) {
            if (grid_.at_lower(node, i)) continue;
            const double res = push_residual(v, node, a, i);
            if (i + 1 == current) current_res = res;
            if (res < best_res) {
                best_res = res;
                best = i + 1;
            }
        }
        if (best == PolicyField::kContinue || cont <= best_res + margin) {
            best = PolicyField::kContinue;
            best_res = std::min(best_res, cont);
        }
        if (current_res <= best_res + margin) return current;
        return best;
    }

    double interior_residual(const Eigen::VectorXd& v) const {
        double sup = 0.0;
        for (std::size_t node = 0; node < grid_.size(); ++node) {
            if (!grid_.interior(node)) continue;
            for (int a = 0; a < m_; ++a) {
                const std::size_t u = unknown(node, a);
                if (rows_.kind[u] != RowKind::kFree) continue;
                double combined = continue_residual(v, u);
                for (int i = 0; i < grid_.dim(); ++i)
                    combined = std::min(combined, push_residual(v, node, a, i));
                sup = std::max(sup, std::abs(combined));
            }
        }
        return sup;
    }

    Eigen::VectorXd solve_policy(const std::vector<int>& policy, std::string& method) const {
        using Sparse = Eigen::SparseMatrix<double>;
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(unknowns_ * 6);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns_));
        for (std::size_t node = 0; node < grid_.size(); ++node) {
            for (int a = 0; a < m_; ++a) {
                const std::size_t u = unknown(node, a);
                const auto row = static_cast<Eigen::Index>(u);
                int push_axis = -1;
                switch (rows_.kind[u]) {
                    case RowKind::kDirichlet:
                        triplets.emplace_back(row, row, 1.0);
                        rhs[row] = rows_.fixed_value[u];
                        continue;
                    case RowKind::kNeumann:
                        push_axis = rows_.fixed_axis[u];
                        break;
                    case RowKind::kFree:
                        push_axis = policy[u] - 1;
                        break;
                }
                if (push_axis >= 0) {
                    const std::size_t s = grid_.stride(push_axis);
                    triplets.emplace_back(row, row, 1.0);
                    triplets.emplace_back(row, static_cast<Eigen::Index>(unknown(node - s, a)), -1.0);
                    rhs[row] = grid_.step(push_axis) * rewards_[u][push_axis];
                } else {
                    triplets.emplace_back(row, row, model_.discount());
                    for (const auto& t : stencils_[u])
                        triplets.emplace_back(row, static_cast<Eigen::Index>(unknown(t.node, t.regime)),
                                              -t.weight);
                }
            }
        }
        const auto size = static_cast<Eigen::Index>(unknowns_);
        Sparse mat(size, size);
        mat.setFromTriplets(triplets.begin(), triplets.end());
        if (unknowns_ <= opts_.direct_limit) {
            method = "sparse_lu";
            Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
            lu.analyzePattern(mat);
            lu.factorize(mat);
            if (lu.info() != Eigen::Success)
                throw Error(ErrorCode::kSingularSystem, "sparse LU factorization failed: " + lu.lastErrorMessage());
            Eigen::VectorXd v = lu.solve(rhs);
            if (lu.info() != Eigen::Success || !v.allFinite())
                throw Error(ErrorCode::kSingularSystem, "sparse LU solve failed");
            return v;
        }
        method = "gauss_seidel";
        return gauss_seidel(Eigen::SparseMatrix<double, Eigen::RowMajor>(mat), rhs);
    }

    RowKind kind(std::size_t u) const { return rows_.kind[u]; }
    int fixed_axis(std::size_t u) const { return rows_.fixed_axis[u]; }

private:
    Eigen::VectorXd gauss_seidel(const Eigen::SparseMatrix<double, Eigen::RowMajor>& mat,
                                 const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(rhs.size());
        for (int sweep = 0; sweep < 1000000; ++sweep) {
            double change = 0.0;
            double scale = 1.0;
            for (Eigen::Index row = 0; row < mat.outerSize(); ++row) {
                double diag = 0.0;
                double acc = rhs[row];
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, row); it; ++it) {
                    if (it.col() == row) diag += it.value();
                    else acc -= it.value() * v[it.col()];
                }
                if (diag == 0.0) throw Error(ErrorCode::kSingularSystem, "zero pivot in Gauss-Seidel");
                const double next = acc / diag;
                change = std::max(change, std::abs(next - v[row]));
                scale = std::max(scale, std::abs(next));
                v[row] = next;
            }
            if (!v.allFinite()) throw Error(ErrorCode::kSingularSystem, "Gauss-Seidel diverged");
            if (change <= opts_.linear_tolerance * scale) break;
        }
        return v;
    }

    const ModelSpec& model_;
    const Grid& grid_;
    const SolveOptions& opts_;
    int m_;
    std::size_t unknowns_;
    Rows rows_;
    std::vector<std::vector<StencilTerm>> stencils_;
    std::vector<Eigen::VectorXd> rewards_;
};

SolveResult solve_core(const ModelSpec& model, const Grid& grid, const SolveOptions& opts,
                       const DirichletPins& pins) {
    const Discretization disc(model, grid, opts, pins);
    const int m = model.regimes();
    Eigen::VectorXd v = initial_guess(model, grid).values();
    for (std::size_t u = 0; u < disc.unknowns(); ++u)
        if (!pins.empty() && pins.mask[u]) v[u] = pins.values[u];

    std::vector<int> policy(disc.unknowns(), PolicyField::kContinue);
    auto improve_all = [&](const Eigen::VectorXd& cur) {
        int changes = 0;
        for (std::size_t node = 0; node < grid.size(); ++node) {
            for (int a = 0; a < m; ++a) {
                const std::size_t u = disc.unknown(node, a);
                int next = PolicyField::kContinue;
                if (disc.kind(u) == RowKind::kNeumann) next = disc.fixed_axis(u) + 1;
                else if (disc.kind(u) == RowKind::kFree) next = disc.improve(cur, node, a, policy[u]);
                if (next != policy[u]) ++changes;
                policy[u] = next;
            }
        }
        return changes;
    };
    improve_all(v);

    SolveReport report;
    Eigen::VectorXd best_v = v;
    std::vector<int> best_policy = policy;
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it) {
        v = disc.solve_policy(policy, report.linear_solver);
        const std::vector<int> used = policy;
        const double res = disc.interior_residual(v);
        const int changes = improve_all(v);
        report.iterations = it;
        report.policy_changes.push_back(changes);
        if (res <= best_res) {
            best_res = res;
            best_v = v;
            best_policy = used;
        }
        if (changes == 0) {
            best_v = v;
            best_policy = used;
            best_res = res;
            report.converged = res <= opts.tolerance;
            break;
        }
    }
    report.residual = best_res;
    ValueField value(grid, m, best_v);
    PolicyField out_policy(grid, m);
    for (std::size_t node = 0; node < grid.size(); ++node)
        for (int a = 0; a < m; ++a) out_policy(node, a) = best_policy[disc.unknown(node, a)];
    return {std::move(value), std::move(out_policy), std::move(report)};
}

// Regimes linked (in either direction) by a nonzero rate share a component.
std::vector<std::vector<int>> coupled_components(const Eigen::MatrixXd& q) {
    const int m = static_cast<int>(q.rows());
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j && q(i, j) != 0.0) parent[find(i)] = find(j);
    std::map<int, std::vector<int>> groups;
    std::vector<int> root_order;
    for (int a = 0; a < m; ++a) {
        const int r = find(a);
        if (!groups.count(r)) root_order.push_back(r);
        groups[r].push_back(a);
    }
    std::vector<std::vector<int>> out;
    for (int r : root_order) out.push_back(groups[r]);
    return out;
}

// Regime order that depends only on the regimes' data, so relabelled models
// assemble identical systems.
std::vector<int> canonical_order(const ModelSpec& model, const Grid& grid) {
    const int m = model.regimes();
    const auto samples = lattice_points(grid.uppers(), 5);
    std::vector<std::vector<double>> keys(m);
    const auto& q = model.generator();
    for (int a = 0; a < m; ++a) {
        auto& k = keys[a];
        k.push_back(q(a, a));
        std::vector<double> off;
        for (int j = 0; j < m; ++j)
            if (j != a) off.push_back(q(a, j));
        std::sort(off.begin(), off.end());
        k.insert(k.end(), off.begin(), off.end());
        for (const auto& x : samples) {
            const Eigen::VectorXd b = model.drift_at(x, a);
            const Eigen::MatrixXd s = model.diffusion_at(x, a);
            const Eigen::VectorXd f = model.reward_at(x, a);
            k.insert(k.end(), b.data(), b.data() + b.size());
            k.insert(k.end(), s.data(), s.data() + s.size());
            k.insert(k.end(), f.data(), f.data() + f.size());
        }
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    return order;
}

void require_valid(const ModelSpec& model, const Grid& grid) {
    if (grid.dim() != model.dim())
        throw Error(ErrorCode::kInvalidArgument, "grid dimension differs from model dimension");
    const auto gen = validate_generator(model.generator(), false);
    if (!gen.ok()) throw Error(gen.violation->code, gen.violation->message);
    const int per_axis = model.dim() == 1 ? 17 : model.dim() == 2 ? 9 : 4;
    const auto pts = lattice_points(grid.uppers(), per_axis);
    const auto rew = validate_reward(model, pts);
    if (!rew.ok()) throw Error(rew.violation->code, rew.violation->message);
}

}  // namespace

SolveResult solve(const ModelSpec& model, const Grid& grid, const SolveOptions& opts) {
    return solve(model, grid, opts, DirichletPins{});
}

SolveResult solve(const ModelSpec& model, const Grid& grid, const SolveOptions& opts,
                  const DirichletPins& pins) {
    opts.validate();
    require_valid(model, grid);
    const int m = model.regimes();
    const std::size_t nodes = grid.size();
    if (!pins.empty() && (pins.mask.size() != nodes * m || pins.values.size() != nodes * m))
        throw Error(ErrorCode::kInvalidArgument, "pin arrays do not match the grid");

    ValueField value(grid, m);
    PolicyField policy(grid, m);
    SolveReport report;
    report.converged = true;
    for (const auto& component : coupled_components(model.generator())) {
        const ModelSpec sub = model.with_regime_order(component);
        const std::vector<int> canon = canonical_order(sub, grid);
        const ModelSpec canon_model = sub.with_regime_order(canon);
        // Local regime c of the canonical model is global regime component[canon[c]].
        std::vector<int> global(canon.size());
        for (std::size_t c = 0; c < canon.size(); ++c) global[c] = component[canon[c]];
        const int mc = static_cast<int>(global.size());
        DirichletPins sub_pins;
        if (!pins.empty()) {
            sub_pins.mask.resize(nodes * mc);
            sub_pins.values.resize(nodes * mc);
            for (std::size_t node = 0; node < nodes; ++node)
                for (int c = 0; c < mc; ++c) {
                    sub_pins.mask[node * mc + c] = pins.mask[node * m + global[c]];
                    sub_pins.values[node * mc + c] = pins.values[node * m + global[c]];
                }
        }
        const SolveResult part = solve_core(canon_model, grid, opts, sub_pins);
        for (std::size_t node = 0; node < nodes; ++node)
            for (int c = 0; c < mc; ++c) {
                value(node, global[c]) = part.value(node, c);
                policy(node, global[c]) = part.policy(node, c);
            }
        const auto& pr = part.report;
        report.iterations = std::max(report.iterations, pr.iterations);
        report.residual = std::max(report.residual, pr.residual);
        report.converged = report.converged && pr.converged;
        report.linear_solver = pr.linear_solver;
        if (report.policy_changes.size() < pr.policy_changes.size())
            report.policy_changes.resize(pr.policy_changes.size(), 0);
        for (std::size_t i = 0; i < pr.policy_changes.size(); ++i)
            report.policy_changes[i] += pr.policy_changes[i];
    }
    return {std::move(value), std::move(policy), std::move(report)};
}

Region extract_nonintervention_region(const PolicyField& policy) {
    const Grid& g = policy.grid();
    const int m = policy.regimes();
    Region region;
    region.continuation.assign(m, std::vector<std::uint8_t>(g.size(), 0));
    region.boundary.assign(m, {});
    for (int a = 0; a < m; ++a) {
        for (std::size_t node = 0; node < g.size(); ++node)
            region.continuation[a][node] = policy(node, a) == PolicyField::kContinue;
        for (std::size_t node = 0; node < g.size(); ++node) {
            if (!region.continuation[a][node]) continue;
            bool edge = false;
            for (int k = 0; k < g.dim() && !edge; ++k) {
                const std::size_t s = g.stride(k);
                if (!g.at_lower(node, k) && policy(node - s, a) != PolicyField::kContinue) edge = true;
                if (!g.at_upper(node, k) && policy(node + s, a) != PolicyField::kContinue) edge = true;
            }
            if (edge) region.boundary[a].push_back(node);
        }
    }
    return region;
}

ResidualReport residual_report(const ValueField& field, const ModelSpec& model) {
    const Grid& g = field.grid();
    std::vector<ResidualLocation> all;
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (!g.interior(node)) continue;
        for (int a = 0; a < field.regimes(); ++a) {
            const auto res = qvi_residual(field, model, node, a);
            const Eigen::VectorXd x = g.point(node);
            all.push_back({node, a, {x.data(), x.data() + x.size()}, res.combined});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
        return std::abs(l.value) > std::abs(r.value);
    });
    ResidualReport report;
    if (!all.empty()) report.sup = std::abs(all.front().value);
    if (all.size() > 10) all.resize(10);
    report.worst = std::move(all);
    return report;
}

void check_h1(const ModelSpec& model, const Grid& grid, int per_axis) {
    const int n = model.dim();
    for (int i = 0; i < n; ++i) {
        for (auto x : lattice_points(grid.uppers(), per_axis)) {
            x[i] = 0.0;
            for (int a = 0; a < model.regimes(); ++a) {
                const double b = model.drift_at(x, a)[i];
                const double s = model.diffusion_at(x, a).row(i).cwiseAbs().maxCoeff();
                if (std::abs(b) > 1e-12 || s > 1e-12) {
                    std::string where;
                    for (int k = 0; k < n; ++k) where += (k ? "," : "") + std::to_string(x[k]);
                    throw Error(ErrorCode::kH1Violated,
                                "coefficients of component " + std::to_string(i + 1) +
                                    " do not vanish at x=(" + where + "), regime " +
                                    std::to_string(a + 1) + ": b=" + std::to_string(b) +
                                    ", |sigma|=" + std::to_string(s));
                }
            }
        }
    }
}

namespace {

// Face values and labels for every node of `grid` (over `axes`) lying on a
// lower face, read from the lower-dimensional systems already solved.
void pins_from_faces(const std::vector<int>& axes, const Grid& grid, int m,
                     const std::vector<FaceSystem>& faces, DirichletPins& pins,
                     std::vector<int>& labels) {
    pins.mask.assign(grid.size() * m, 0);
    pins.values.assign(grid.size() * m, 0.0);
    labels.assign(grid.size() * m, PolicyField::kContinue);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (!grid.on_lower_face(node)) continue;
        std::vector<int> alive;
        std::vector<int> alive_pos;
        std::vector<int> idx;
        for (int k = 0; k < grid.dim(); ++k) {
            const int i = grid.index_on_axis(node, k);
            if (i > 0) {
                alive.push_back(axes[k]);
                alive_pos.push_back(k);
                idx.push_back(i);
            }
        }
        for (int a = 0; a < m; ++a) pins.mask[node * m + a] = 1;
        if (alive.empty()) continue;  // origin: nothing can move, V = 0
        const auto face = std::find_if(faces.begin(), faces.end(),
                                       [&](const FaceSystem& f) { return f.axes == alive; });
        if (face == faces.end()) throw Error(ErrorCode::kInvalidArgument, "missing face system");
        const std::size_t fnode = face->grid.node(idx);
        for (int a = 0; a < m; ++a) {
            pins.values[node * m + a] = face->value(fnode, a);
            const int act = face->policy(fnode, a);
            labels[node * m + a] = act == PolicyField::kContinue ? act : alive_pos[act - 1] + 1;
        }
    }
}

}  // namespace

HierarchicalResult hierarchical_solve(const ModelSpec& model, const Grid& grid,
                                      const SolveOptions& opts) {
    if (grid.dim() != model.dim())
        throw Error(ErrorCode::kInvalidArgument, "grid dimension differs from model dimension");
    check_h1(model, grid);
    const int n = model.dim();
    const int m = model.regimes();
    std::vector<std::vector<int>> subsets;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> axes;
        for (int k = 0; k < n; ++k)
            if (mask & (1u << k)) axes.push_back(k);
        subsets.push_back(std::move(axes));
    }
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const auto& l, const auto& r) { return l.size() < r.size() || (l.size() == r.size() && l < r); });

    HierarchicalResult out{{}, {ValueField(grid, m), PolicyField(grid, m), {}}};
    auto level = [&](const std::vector<int>& axes, const ModelSpec& sub, const Grid& g) {
        DirichletPins pins;
        std::vector<int> labels;
        pins_from_faces(axes, g, m, out.faces, pins, labels);
        SolveResult res = solve(sub, g, opts, pins);
        for (std::size_t u = 0; u < pins.mask.size(); ++u)
            if (pins.mask[u]) res.policy(u / m, static_cast<int>(u % m)) = labels[u];
        return res;
    };
    for (const auto& axes : subsets) {
        ModelSpec sub = model.restricted(axes);
        Grid g = grid.restricted(axes);
        SolveResult res = level(axes, sub, g);
        out.faces.push_back({axes, std::move(sub), std::move(g), std::move(res.value),
                             std::move(res.policy), std::move(res.report)});
    }
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    out.full = level(all, model, grid);
    return out;
}

namespace {

void note(PropertyCheck& c, double slack, const Grid& g, std::size_t node, int a, double allowed) {
    if (slack < c.worst) {
        c.worst = slack;
        const Eigen::VectorXd x = g.point(node);
        c.where.assign(x.data(), x.data() + x.size());
        c.regime = a;
    }
    if (slack < -allowed) c.passed = false;
}

}  // namespace

PropertyCheck check_monotonicity(const ValueField& v, const ModelSpec& model, double tol) {
    PropertyCheck c;
    c.name = "monotonicity";
    const Grid& g = v.grid();
    const double allowed = 10.0 * tol;
    for (std::size_t node = 0; node < g.size(); ++node) {
        const Eigen::VectorXd x = g.point(node);
        for (int a = 0; a < v.regimes(); ++a) {
            const Eigen::VectorXd f = model.reward_at(x, a);
            bool diag = true;
            double diag_gain = 0.0;
            std::size_t diag_node = node;
            for (int i = 0; i < g.dim(); ++i) {
                const int idx = g.index_on_axis(node, i);
                if (idx == 0) diag = false;
                for (int k = 1; k <= idx; ++k) {
                    const std::size_t y = node - static_cast<std::size_t>(k) * g.stride(i);
                    const double gain = f[i] * (x[i] - g.coordinate(y, i));
                    note(c, v(node, a) - v(y, a) - gain, g, node, a, allowed);
                }
                if (idx > 0) {
                    diag_gain += f[i] * (x[i] - g.coordinate(node - g.stride(i), i));
                    diag_node -= g.stride(i);
                }
            }
            if (diag && g.dim() > 1) note(c, v(node, a) - v(diag_node, a) - diag_gain, g, node, a, allowed);
        }
    }
    return c;
}

PropertyCheck check_gradient_constraints(const ValueField& v, const ModelSpec& model, double tol) {
    PropertyCheck c;
    c.name = "gradient_constraints";
    const Grid& g = v.grid();
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (!g.interior(node)) continue;
        for (int a = 0; a < v.regimes(); ++a) {
            const auto res = qvi_residual(v, model, node, a);
            for (double gp : res.gradient_parts) note(c, gp, g, node, a, 10.0 * tol);
        }
    }
    return c;
}

PropertyCheck check_pde_inequality(const ValueField& v, const ModelSpec& model, double tol) {
    PropertyCheck c;
    c.name = "pde_inequality";
    const Grid& g = v.grid();
    for (std::size_t node = 0; node < g.size(); ++node) {
        if (!g.interior(node)) continue;
        for (int a = 0; a < v.regimes(); ++a)
            note(c, qvi_residual(v, model, node, a).pde_part, g, node, a, 10.0 * tol);
    }
    return c;
}

std::optional<PropertyCheck> check_affine_bound(const ValueField& v, const ModelSpec& model,
                                                double tol) {
    const Grid& g = v.grid();
    const auto kappa = verified_kappa0(model, g.uppers());
    if (!kappa) return std::nullopt;
    const double fsup = reward_sup(model, g.uppers());
    PropertyCheck c;
    c.name = "affine_bound";
    for (std::size_t node = 0; node < g.size(); ++node) {
        const double bound = fsup * (*kappa / model.discount() + g.point(node).sum());
        for (int a = 0; a < v.regimes(); ++a) note(c, bound - v(node, a), g, node, a, 10.0 * tol);
    }
    return c;
}

}  // namespace ssc
