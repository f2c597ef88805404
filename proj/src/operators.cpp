#include "ssc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ssc {

void generator_stencil(const ModelSpec& model, const Grid& grid, std::size_t node, int regime,
                       std::vector<StencilTerm>& out) {
    if (node >= grid.size()) throw Error(ErrorCode::kOutOfGrid, "node index outside the grid");
    if (regime < 0 || regime >= model.regimes())
        throw Error(ErrorCode::kOutOfGrid, "regime out of range");
    if (grid.dim() != model.dim())
        throw Error(ErrorCode::kInvalidArgument, "grid and model dimensions differ");
    out.clear();
    const int n = grid.dim();
    const Eigen::VectorXd x = grid.point(node);
    const Eigen::VectorXd b = model.drift_at(x, regime);
    const Eigen::MatrixXd a = model.covariance_at(x, regime);
    auto add = [&](std::size_t nd, double w) {
        if (w != 0.0) out.push_back({nd, regime, w});
    };
    for (int i = 0; i < n; ++i) {
        const double h = grid.step(i);
        const std::size_t s = grid.stride(i);
        const bool lo = grid.at_lower(node, i);
        const bool hi = grid.at_upper(node, i);
        const double bi = b[i];
        // an outward drift on a face has no upwind neighbour; it is dropped
        // rather than differenced the wrong way
        if (bi > 0.0 && !hi) {
            add(node + s, bi / h);
            add(node, -bi / h);
        } else if (bi < 0.0 && !lo) {
            add(node, bi / h);
            add(node - s, -bi / h);
        }
        const double c = 0.5 * a(i, i) / (h * h);
        // no monotone second difference exists across a face; the normal
        // diffusion term is dropped there
        if (c == 0.0 || lo || hi) continue;
        {
            add(node + s, c);
            add(node - s, c);
            add(node, -2.0 * c);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            if (grid.at_lower(node, i) || grid.at_upper(node, i) || grid.at_lower(node, j) ||
                grid.at_upper(node, j))
                continue;
            const double hi = grid.step(i);
            const double hj = grid.step(j);
            const std::size_t si = grid.stride(i);
            const std::size_t sj = grid.stride(j);
            const double w = std::abs(aij) / (2.0 * hi * hj);
            add(node, 2.0 * w);
            add(node + si, -w);
            add(node - si, -w);
            add(node + sj, -w);
            add(node - sj, -w);
            if (aij > 0.0) {
                add(node + si + sj, w);
                add(node - si - sj, w);
            } else {
                add(node + si - sj, w);
                add(node - si + sj, w);
            }
        }
    }
    // Monotonicity of the cross stencil: axis-neighbour weights must stay >= 0.
    for (int i = 0; i < n; ++i) {
        if (grid.at_lower(node, i) || grid.at_upper(node, i)) continue;
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i || a(i, j) == 0.0) continue;
            if (grid.at_lower(node, j) || grid.at_upper(node, j)) continue;
            off += std::abs(a(i, j)) / (grid.step(i) * grid.step(j));
        }
        const double diag = a(i, i) / (grid.step(i) * grid.step(i));
        if (off > 0.0 && diag < off * (1.0 - 1e-12)) {
            throw Error(ErrorCode::kNonmonotoneDiffusion,
                        "sigma sigma' not diagonally dominant on axis " + std::to_string(i + 1) +
                            " at node " + std::to_string(node));
        }
    }
    const Eigen::MatrixXd& q = model.generator();
    for (int j = 0; j < model.regimes(); ++j)
        if (q(regime, j) != 0.0) out.push_back({node, j, q(regime, j)});
}

double apply_generator(const ValueField& field, const ModelSpec& model, std::size_t node,
                       int regime) {
    if (field.regimes() != model.regimes())
        throw Error(ErrorCode::kInvalidArgument, "field and model regime counts differ");
    std::vector<StencilTerm> terms;
    generator_stencil(model, field.grid(), node, regime, terms);
    double acc = 0.0;
    for (const auto& t : terms) acc += t.weight * field(t.node, t.regime);
    return acc;
}

double f_value(const ModelSpec& model, const Eigen::VectorXd& x, int alpha,
               std::span<const double> xi, const Eigen::VectorXd& p, const Eigen::MatrixXd& A) {
    const Eigen::MatrixXd a = model.covariance_at(x, alpha);
    const Eigen::VectorXd b = model.drift_at(x, alpha);
    double coupling = 0.0;
    for (int j = 0; j < model.regimes(); ++j) coupling += model.generator()(alpha, j) * xi[j];
    return model.discount() * xi[alpha] - 0.5 * a.cwiseProduct(A).sum() - b.dot(p) - coupling;
}

double one_sided_gradient(const ValueField& field, std::size_t node, int regime, int axis) {
    const Grid& g = field.grid();
    const double h = g.step(axis);
    const std::size_t s = g.stride(axis);
    if (g.at_lower(node, axis)) return (field(node + s, regime) - field(node, regime)) / h;
    return (field(node, regime) - field(node - s, regime)) / h;
}

QviResidual qvi_residual(const ValueField& field, const ModelSpec& model, std::size_t node,
                         int regime) {
    QviResidual out;
    out.pde_part = model.discount() * field(node, regime) -
                   apply_generator(field, model, node, regime);
    const Eigen::VectorXd f = model.reward_at(field.grid().point(node), regime);
    out.combined = out.pde_part;
    for (int i = 0; i < field.grid().dim(); ++i) {
        out.gradient_parts.push_back(one_sided_gradient(field, node, regime, i) - f[i]);
        out.combined = std::min(out.combined, out.gradient_parts.back());
    }
    return out;
}

TransformContext::TransformContext(double lam) : lambda(lam) {
    if (!(lam > 0.0) || !std::isfinite(lam))
        throw Error(ErrorCode::kInvalidArgument, "transform lambda must be positive");
}

TransformContext TransformContext::for_model(const ModelSpec& model) {
    const double k = model.kappa0().value_or(0.0);
    return TransformContext(std::min(0.1, model.discount() / (2.0 * k + k * k + 1.0)));
}

bool TransformContext::admissible(double r, double kappa0) const {
    return r - lambda * kappa0 - 0.5 * lambda * lambda * kappa0 * kappa0 > 0.0;
}

namespace {

ValueField scale_by_exp(const ValueField& field, const TransformContext& ctx, bool forward) {
    ValueField out = field;
    const Grid& g = field.grid();
    for (std::size_t node = 0; node < g.size(); ++node) {
        const double factor = std::exp(ctx.lambda * g.point(node).sum());
        for (int a = 0; a < field.regimes(); ++a)
            out(node, a) = forward ? field(node, a) / factor : field(node, a) * factor;
    }
    return out;
}

}  // namespace

ValueField exp_transform(const ValueField& field, const TransformContext& ctx) {
    return scale_by_exp(field, ctx, true);
}

ValueField exp_untransform(const ValueField& field, const TransformContext& ctx) {
    return scale_by_exp(field, ctx, false);
}

double h_lambda(const ModelSpec& model, const Eigen::VectorXd& x, int alpha, double q,
                const Eigen::VectorXd& p, const Eigen::MatrixXd& A, const TransformContext& ctx) {
    const Eigen::MatrixXd a = model.covariance_at(x, alpha);
    const Eigen::VectorXd b = model.drift_at(x, alpha);
    const Eigen::MatrixXd s = model.diffusion_at(x, alpha);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(x.size());
    const double lam = ctx.lambda;
    const double st1 = (s.transpose() * ones).squaredNorm();
    return 0.5 * a.cwiseProduct(A).sum() + 0.5 * lam * (ones.dot(a * p) + p.dot(a * ones)) +
           b.dot(p) + lam * q * b.sum() + 0.5 * lam * lam * q * st1;
}

}  // namespace ssc
