#pragma once

#include "ssc/grid.hpp"
#include "ssc/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ssc {

struct StencilTerm {
    std::size_t node;
    int regime;
    double weight;
};

/// Discrete generator at (node, regime) written as sum(weight * V(node', regime')).
/// Drift is upwinded, pure second derivatives are central (dropped on the faces
/// normal to them),
/// cross derivatives use the monotone 7-point stencil at interior nodes only.
/// Throws NONMONOTONE_DIFFUSION when sigma sigma' is not diagonally dominant
/// relative to the mesh at a node that needs a cross stencil.
void generator_stencil(const ModelSpec& model, const Grid& grid, std::size_t node, int regime,
                       std::vector<StencilTerm>& out);

/// 1/2 tr(ss' D^2 V) + b.DV + sum_j q_aj V(x, j) at a grid node.
double apply_generator(const ValueField& field, const ModelSpec& model, std::size_t node,
                       int regime);

/// r xi_a - 1/2 tr(ss'(x,a) A) - b(x,a).p - sum_j q_aj xi_j
double f_value(const ModelSpec& model, const Eigen::VectorXd& x, int alpha,
               std::span<const double> xi, const Eigen::VectorXd& p, const Eigen::MatrixXd& A);

/// (V(x) - V(x - h e_i)) / h, forward difference on the x_i = 0 face.
double one_sided_gradient(const ValueField& field, std::size_t node, int regime, int axis);

struct QviResidual {
    double pde_part = 0.0;
    std::vector<double> gradient_parts;
    double combined = 0.0;
};

QviResidual qvi_residual(const ValueField& field, const ModelSpec& model, std::size_t node,
                         int regime);

/// Exponential change of unknown with s(x) = x.1.
struct TransformContext {
    explicit TransformContext(double lambda);

    /// lambda = min(0.1, r / (2 k0 + k0^2 + 1)); k0 = 0 when none is known.
    static TransformContext for_model(const ModelSpec& model);

    /// r - lambda k0 - lambda^2 k0^2 / 2 > 0
    bool admissible(double r, double kappa0) const;

    double lambda;
};

ValueField exp_transform(const ValueField& field, const TransformContext& ctx);
ValueField exp_untransform(const ValueField& field, const TransformContext& ctx);

/// 1/2 tr(ss'A) + lambda/2 (1'ss'p + p'ss'1) + b.p + lambda q b.1 + lambda^2/2 q |s'1|^2
double h_lambda(const ModelSpec& model, const Eigen::VectorXd& x, int alpha, double q,
                const Eigen::VectorXd& p, const Eigen::MatrixXd& A, const TransformContext& ctx);

}  // namespace ssc
