#include "ssc/coefficient_field.hpp"

#include "ssc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace ssc {

namespace {

void require(bool cond, const std::string& message) {
    if (!cond) throw Error(ErrorCode::kInvalidArgument, message);
}

void require_block_sizes(const std::vector<std::vector<double>>& blocks, std::size_t size,
                         std::string_view what) {
    require(!blocks.empty(), std::string(what) + ": at least one regime block required");
    for (const auto& block : blocks) {
        require(block.size() == size, std::string(what) + ": expected " + std::to_string(size) +
                                          " entries per regime, got " +
                                          std::to_string(block.size()));
        for (double v : block) require(std::isfinite(v), std::string(what) + ": non-finite entry");
    }
}

std::size_t table_node_count(const CoefficientField::TableAxes& axes) {
    std::size_t count = 1;
    for (int n : axes.nodes) count *= static_cast<std::size_t>(n);
    return count;
}

}  // namespace

std::string_view to_string(CoefficientField::Family family) {
    switch (family) {
        case CoefficientField::Family::kConstant: return "CONSTANT";
        case CoefficientField::Family::kAffine: return "AFFINE";
        case CoefficientField::Family::kGeometric: return "GEOMETRIC";
        case CoefficientField::Family::kSqrtPower: return "SQRT_POWER";
        case CoefficientField::Family::kTable: return "TABLE";
    }
    return "UNKNOWN";
}

CoefficientField::Family family_from_string(std::string_view name) {
    for (auto f : {CoefficientField::Family::kConstant, CoefficientField::Family::kAffine,
                   CoefficientField::Family::kGeometric, CoefficientField::Family::kSqrtPower,
                   CoefficientField::Family::kTable}) {
        if (to_string(f) == name) return f;
    }
    throw Error(ErrorCode::kConfig, "unknown coefficient family '" + std::string(name) + "'");
}

CoefficientField::CoefficientField(Family family, int rows, int cols, int dim,
                                   std::vector<std::vector<double>> params, TableAxes axes)
    : family_(family), rows_(rows), cols_(cols), dim_(dim), params_(std::move(params)),
      axes_(std::move(axes)) {
    require(rows > 0 && cols > 0 && dim > 0, "coefficient field shape must be positive");
}

CoefficientField CoefficientField::constant(int rows, int cols, int dim,
                                            std::vector<std::vector<double>> value) {
    require_block_sizes(value, static_cast<std::size_t>(rows * cols), "CONSTANT");
    return CoefficientField(Family::kConstant, rows, cols, dim, std::move(value));
}

CoefficientField CoefficientField::affine(int rows, int cols, int dim,
                                          std::vector<std::vector<double>> slope,
                                          std::vector<std::vector<double>> offset) {
    const auto entries = static_cast<std::size_t>(rows * cols);
    require_block_sizes(offset, entries, "AFFINE offset");
    require_block_sizes(slope, entries * static_cast<std::size_t>(dim), "AFFINE slope");
    require(slope.size() == offset.size(), "AFFINE: slope/offset regime counts differ");
    std::vector<std::vector<double>> params(offset.size());
    for (std::size_t a = 0; a < offset.size(); ++a) {
        params[a] = offset[a];
        params[a].insert(params[a].end(), slope[a].begin(), slope[a].end());
    }
    return CoefficientField(Family::kAffine, rows, cols, dim, std::move(params));
}

CoefficientField CoefficientField::geometric(int rows, int cols,
                                             std::vector<std::vector<double>> coef) {
    require_block_sizes(coef, static_cast<std::size_t>(rows * cols), "GEOMETRIC");
    return CoefficientField(Family::kGeometric, rows, cols, rows, std::move(coef));
}

CoefficientField CoefficientField::sqrt_power(int rows, int cols,
                                              std::vector<std::vector<double>> coef) {
    require_block_sizes(coef, static_cast<std::size_t>(rows * cols), "SQRT_POWER");
    return CoefficientField(Family::kSqrtPower, rows, cols, rows, std::move(coef));
}

CoefficientField CoefficientField::table(int rows, int cols, TableAxes axes,
                                         std::vector<std::vector<double>> values) {
    require(!axes.upper.empty() && axes.upper.size() == axes.nodes.size(),
            "TABLE: axis bounds and node counts must have equal, positive length");
    for (std::size_t k = 0; k < axes.upper.size(); ++k) {
        require(axes.upper[k] > 0.0 && std::isfinite(axes.upper[k]), "TABLE: upper bound must be > 0");
        require(axes.nodes[k] >= 2, "TABLE: at least two nodes per axis");
    }
    require_block_sizes(values, table_node_count(axes) * static_cast<std::size_t>(rows * cols),
                        "TABLE");
    const int dim = static_cast<int>(axes.upper.size());
    require(dim <= 8, "TABLE: at most 8 axes");
    return CoefficientField(Family::kTable, rows, cols, dim, std::move(values), std::move(axes));
}

double CoefficientField::table_entry(std::span<const double> x, int regime, int entry) const {
    const int d = dim_;
    const int entries = rows_ * cols_;
    const auto& values = params_[regime];
    // Locate the cell and local weights on each axis (clamped to the table).
    std::array<int, 8> base{};
    std::array<double, 8> frac{};
    std::array<std::size_t, 8> stride{};
    std::size_t s = 1;
    for (int k = d - 1; k >= 0; --k) {
        stride[k] = s;
        s *= static_cast<std::size_t>(axes_.nodes[k]);
    }
    for (int k = 0; k < d; ++k) {
        const int cells = axes_.nodes[k] - 1;
        const double h = axes_.upper[k] / cells;
        const double xc = std::clamp(x[k], 0.0, axes_.upper[k]);
        int i = std::min(static_cast<int>(xc / h), cells - 1);
        base[k] = i;
        frac[k] = std::clamp(xc / h - i, 0.0, 1.0);
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
        double w = 1.0;
        std::size_t node = 0;
        for (int k = 0; k < d; ++k) {
            const bool up = (corner >> k) & 1u;
            w *= up ? frac[k] : 1.0 - frac[k];
            node += static_cast<std::size_t>(base[k] + (up ? 1 : 0)) * stride[k];
        }
        if (w != 0.0) acc += w * values[node * entries + entry];
    }
    return acc;
}

void CoefficientField::evaluate(std::span<const double> x, int regime,
                                std::span<double> out) const {
    const auto& p = params_[regime];
    const int entries = rows_ * cols_;
    switch (family_) {
        case Family::kConstant:
            std::copy(p.begin(), p.end(), out.begin());
            return;
        case Family::kAffine:
            for (int e = 0; e < entries; ++e) {
                double v = p[e];
                const double* slope = p.data() + entries + static_cast<std::size_t>(e) * dim_;
                for (int l = 0; l < dim_; ++l) v += slope[l] * x[l];
                out[e] = v;
            }
            return;
        case Family::kGeometric:
            for (int k = 0; k < rows_; ++k)
                for (int j = 0; j < cols_; ++j) out[k * cols_ + j] = p[k * cols_ + j] * x[k];
            return;
        case Family::kSqrtPower:
            for (int k = 0; k < rows_; ++k) {
                const double root = std::sqrt(std::max(x[k], 0.0));
                for (int j = 0; j < cols_; ++j) out[k * cols_ + j] = p[k * cols_ + j] * root;
            }
            return;
        case Family::kTable:
            for (int e = 0; e < entries; ++e) out[e] = table_entry(x, regime, e);
            return;
    }
}

Eigen::MatrixXd CoefficientField::operator()(const Eigen::VectorXd& x, int regime) const {
    if (x.size() != dim_) throw Error(ErrorCode::kInvalidArgument, "coefficient field: wrong x size");
    if (regime < 0 || regime >= regimes())
        throw Error(ErrorCode::kInvalidArgument, "coefficient field: regime out of range");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(rows_, cols_);
    evaluate(std::span<const double>(x.data(), x.size()), regime,
             std::span<double>(out.data(), out.size()));
    return out;
}

bool CoefficientField::identically_zero() const {
    return std::all_of(params_.begin(), params_.end(), [](const std::vector<double>& block) {
        return std::all_of(block.begin(), block.end(), [](double v) { return v == 0.0; });
    });
}

CoefficientField CoefficientField::restricted(std::span<const int> axes) const {
    require(!axes.empty(), "restriction needs at least one surviving axis");
    for (int a : axes) require(a >= 0 && a < rows_ && a < dim_, "restriction axis out of range");
    const int new_rows = static_cast<int>(axes.size());
    const int entries = rows_ * cols_;
    const int new_entries = new_rows * cols_;
    std::vector<std::vector<double>> out(params_.size());
    auto old_entry = [&](int new_e) {
        const int k = new_e / cols_;
        const int j = new_e % cols_;
        return axes[k] * cols_ + j;
    };
    switch (family_) {
        case Family::kConstant:
        case Family::kGeometric:
        case Family::kSqrtPower:
            for (std::size_t a = 0; a < params_.size(); ++a) {
                out[a].resize(new_entries);
                for (int e = 0; e < new_entries; ++e) out[a][e] = params_[a][old_entry(e)];
            }
            return CoefficientField(family_, new_rows, cols_, new_rows, std::move(out));
        case Family::kAffine:
            for (std::size_t a = 0; a < params_.size(); ++a) {
                auto& block = out[a];
                block.resize(static_cast<std::size_t>(new_entries) * (1 + new_rows));
                for (int e = 0; e < new_entries; ++e) {
                    const int oe = old_entry(e);
                    block[e] = params_[a][oe];
                    for (int l = 0; l < new_rows; ++l)
                        block[new_entries + e * new_rows + l] =
                            params_[a][entries + static_cast<std::size_t>(oe) * dim_ + axes[l]];
                }
            }
            return CoefficientField(family_, new_rows, cols_, new_rows, std::move(out));
        case Family::kTable: {
            TableAxes sub;
            for (int a : axes) {
                sub.upper.push_back(axes_.upper[a]);
                sub.nodes.push_back(axes_.nodes[a]);
            }
            std::vector<std::size_t> stride(dim_);
            std::size_t s = 1;
            for (int k = dim_ - 1; k >= 0; --k) {
                stride[k] = s;
                s *= static_cast<std::size_t>(axes_.nodes[k]);
            }
            const std::size_t sub_count = table_node_count(sub);
            for (std::size_t a = 0; a < params_.size(); ++a) {
                out[a].resize(sub_count * new_entries);
                for (std::size_t node = 0; node < sub_count; ++node) {
                    // Decode the surviving-axes multi-index (last axis fastest); the
                    // dropped axes sit at index 0.
                    std::size_t rem = node;
                    std::size_t old_node = 0;
                    for (int k = new_rows - 1; k >= 0; --k) {
                        const auto idx = rem % static_cast<std::size_t>(sub.nodes[k]);
                        rem /= static_cast<std::size_t>(sub.nodes[k]);
                        old_node += idx * stride[axes[k]];
                    }
                    for (int e = 0; e < new_entries; ++e)
                        out[a][node * new_entries + e] =
                            params_[a][old_node * entries + old_entry(e)];
                }
            }
            return CoefficientField(family_, new_rows, cols_, new_rows, std::move(out),
                                    std::move(sub));
        }
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown family");
}

CoefficientField CoefficientField::with_regime_order(std::span<const int> order) const {
    require(!order.empty(), "regime selection must be nonempty");
    std::vector<std::vector<double>> out;
    out.reserve(order.size());
    for (int a : order) {
        require(a >= 0 && a < regimes(), "regime index out of range");
        out.push_back(params_[a]);
    }
    return CoefficientField(family_, rows_, cols_, dim_, std::move(out), axes_);
}

}  // namespace ssc
