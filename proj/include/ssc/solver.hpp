#pragma once

#include "ssc/grid.hpp"
#include "ssc/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssc {

enum class OuterBoundary { kGradientNeumann, kAffineDirichlet };

std::string_view to_string(OuterBoundary b);
OuterBoundary outer_boundary_from_string(std::string_view name);

/// Action per (node, regime): 0 is CONTINUE, i + 1 is PUSH along axis i.
class PolicyField {
public:
    static constexpr int kContinue = 0;

    PolicyField(Grid grid, int regimes);

    const Grid& grid() const noexcept { return grid_; }
    int regimes() const noexcept { return regimes_; }
    int operator()(std::size_t node, int regime) const {
        return actions_[node * static_cast<std::size_t>(regimes_) + static_cast<std::size_t>(regime)];
    }
    int& operator()(std::size_t node, int regime) {
        return actions_[node * static_cast<std::size_t>(regimes_) + static_cast<std::size_t>(regime)];
    }
    const std::vector<int>& actions() const noexcept { return actions_; }

private:
    Grid grid_;
    int regimes_;
    std::vector<int> actions_;
};

/// "CONTINUE" or "PUSH_<i>" with 1-based i.
std::string action_label(int action);

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iterations = 200;
    double linear_tolerance = 1e-10;
    OuterBoundary outer = OuterBoundary::kGradientNeumann;
    double tie_margin = 1e-12;
    std::size_t direct_limit = 200000;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;             // sup |combined| over interior unknowns
    std::vector<int> policy_changes;   // per iteration
    bool converged = false;
    std::string linear_solver;         // "sparse_lu" or "gauss_seidel"
};

struct SolveResult {
    ValueField value;
    PolicyField policy;
    SolveReport report;
};

/// Fixed values for selected unknowns (indexed node * m + regime).
struct DirichletPins {
    std::vector<std::uint8_t> mask;
    std::vector<double> values;

    bool empty() const noexcept { return mask.empty(); }
};

/// Howard policy iteration on the discretized QVI. Never throws NOT_CONVERGED;
/// the report's flag carries it and the best iterate is returned.
SolveResult solve(const ModelSpec& model, const Grid& grid, const SolveOptions& opts = {});
SolveResult solve(const ModelSpec& model, const Grid& grid, const SolveOptions& opts,
                  const DirichletPins& pins);

/// Initial iterate: |f|_inf (k0/r + 1.x) when k0 survives the sampled comparison
/// check on the grid box, zero otherwise.
ValueField initial_guess(const ModelSpec& model, const Grid& grid);

struct Region {
    std::vector<std::vector<std::uint8_t>> continuation;  // [regime][node]
    std::vector<std::vector<std::size_t>> boundary;       // [regime] -> nodes
};

/// Free boundary: CONTINUE nodes with at least one axis neighbour labelled PUSH.
Region extract_nonintervention_region(const PolicyField& policy);

struct ResidualLocation {
    std::size_t node = 0;
    int regime = 0;
    std::vector<double> x;
    double value = 0.0;  // signed combined residual
};

struct ResidualReport {
    double sup = 0.0;
    std::vector<ResidualLocation> worst;  // up to 10, largest |value| first
};

ResidualReport residual_report(const ValueField& field, const ModelSpec& model);

struct FaceSystem {
    std::vector<int> axes;  // surviving coordinates, 0-based
    ModelSpec model;
    Grid grid;
    ValueField value;
    PolicyField policy;
    SolveReport report;
};

struct HierarchicalResult {
    std::vector<FaceSystem> faces;  // by increasing face dimension
    SolveResult full;
};

/// Sampled check that b_i = sigma_i. = 0 on {x_i = 0}; throws H1_VIOLATED.
void check_h1(const ModelSpec& model, const Grid& grid, int per_axis = 17);

HierarchicalResult hierarchical_solve(const ModelSpec& model, const Grid& grid,
                                      const SolveOptions& opts = {});

struct PropertyCheck {
    std::string name;
    bool passed = true;
    double worst = 0.0;          // most negative slack found
    std::vector<double> where;
    int regime = 0;
};

/// V(x) - V(y) >= f(x).(x - y) - 10 tol along axis lines and the lower diagonal.
PropertyCheck check_monotonicity(const ValueField& v, const ModelSpec& model, double tol);
/// One-sided D_i V >= f_i - 10 tol at interior nodes.
PropertyCheck check_gradient_constraints(const ValueField& v, const ModelSpec& model, double tol);
/// Discrete F >= -10 tol at interior nodes.
PropertyCheck check_pde_inequality(const ValueField& v, const ModelSpec& model, double tol);
/// V <= |f|_inf (k0/r + 1.x) + 10 tol; nullopt when k0 is absent or refuted.
std::optional<PropertyCheck> check_affine_bound(const ValueField& v, const ModelSpec& model,
                                                double tol);

}  // namespace ssc
