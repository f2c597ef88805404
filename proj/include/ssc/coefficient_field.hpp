#pragma once

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace ssc {

/// A per-regime coefficient map x -> R^{rows x cols} drawn from a small set of
/// closed-form families, or tabulated on a uniform grid over [0, upper].
///
/// Entry (k, j) is stored row-major at k * cols + j. Rows are always indexed by
/// state component, so `rows` equals the state dimension for every field the
/// toolkit builds (drift n x 1, diffusion n x d, reward n x 1).
class CoefficientField {
public:
    enum class Family { kConstant, kAffine, kGeometric, kSqrtPower, kTable };

    struct TableAxes {
        std::vector<double> upper;  // lower bound is 0 on every axis
        std::vector<int> nodes;     // >= 2 per axis
    };

    /// value[regime] holds rows*cols entries.
    static CoefficientField constant(int rows, int cols, int dim,
                                     std::vector<std::vector<double>> value);
    /// entry(k,j) = offset[regime][k*cols+j] + sum_l slope[regime][(k*cols+j)*dim + l] * x_l
    static CoefficientField affine(int rows, int cols, int dim,
                                   std::vector<std::vector<double>> slope,
                                   std::vector<std::vector<double>> offset);
    /// entry(k,j) = coef[regime][k*cols+j] * x_k
    static CoefficientField geometric(int rows, int cols,
                                      std::vector<std::vector<double>> coef);
    /// entry(k,j) = coef[regime][k*cols+j] * sqrt(max(x_k, 0))
    static CoefficientField sqrt_power(int rows, int cols,
                                       std::vector<std::vector<double>> coef);
    /// values[regime] is node-major (last axis fastest), entry-minor.
    static CoefficientField table(int rows, int cols, TableAxes axes,
                                  std::vector<std::vector<double>> values);

    Family family() const noexcept { return family_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int dim() const noexcept { return dim_; }
    int regimes() const noexcept { return static_cast<int>(params_.size()); }
    const std::vector<double>& params(int regime) const { return params_.at(regime); }
    const TableAxes& table_axes() const noexcept { return axes_; }

    /// Writes rows*cols entries into `out`. Pure and allocation-free.
    void evaluate(std::span<const double> x, int regime, std::span<double> out) const;

    Eigen::MatrixXd operator()(const Eigen::VectorXd& x, int regime) const;

    bool identically_zero() const;

    /// Field on the face {x_j = 0 for j not in axes}, keeping rows `axes` and
    /// taking the surviving coordinates as input.
    CoefficientField restricted(std::span<const int> axes) const;

    /// Regime a of the result is regime order[a] of this field. `order` may
    /// select a subset.
    CoefficientField with_regime_order(std::span<const int> order) const;

private:
    CoefficientField(Family family, int rows, int cols, int dim,
                     std::vector<std::vector<double>> params, TableAxes axes = {});

    double table_entry(std::span<const double> x, int regime, int entry) const;

    Family family_;
    int rows_;
    int cols_;
    int dim_;
    std::vector<std::vector<double>> params_;
    TableAxes axes_;
};

std::string_view to_string(CoefficientField::Family family);
CoefficientField::Family family_from_string(std::string_view name);

}  // namespace ssc
