#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ssc {

/// Uniform tensor grid on [0, L_1] x ... x [0, L_n]. Nodes are numbered
/// lexicographically with the last axis fastest.
class Grid {
public:
    Grid(std::vector<double> upper, std::vector<int> nodes);
    static Grid uniform(int dim, double upper, int nodes);

    int dim() const noexcept { return static_cast<int>(upper_.size()); }
    double upper(int axis) const { return upper_.at(axis); }
    int nodes(int axis) const { return nodes_.at(axis); }
    double step(int axis) const { return step_.at(axis); }
    const std::vector<double>& uppers() const noexcept { return upper_; }
    const std::vector<int>& node_counts() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t stride(int axis) const { return stride_.at(axis); }

    int index_on_axis(std::size_t node, int axis) const {
        return static_cast<int>((node / stride_[axis]) % static_cast<std::size_t>(nodes_[axis]));
    }
    std::vector<int> multi_index(std::size_t node) const;
    std::size_t node(std::span<const int> index) const;
    double coordinate(std::size_t node, int axis) const;
    Eigen::VectorXd point(std::size_t node) const;

    bool at_lower(std::size_t node, int axis) const { return index_on_axis(node, axis) == 0; }
    bool at_upper(std::size_t node, int axis) const {
        return index_on_axis(node, axis) == nodes_[axis] - 1;
    }
    bool on_upper_face(std::size_t node) const;
    bool on_lower_face(std::size_t node) const;
    bool interior(std::size_t node) const { return !on_upper_face(node) && !on_lower_face(node); }

    /// Grid over the listed axes only.
    Grid restricted(std::span<const int> axes) const;

    bool operator==(const Grid& other) const {
        return upper_ == other.upper_ && nodes_ == other.nodes_;
    }

private:
    std::vector<double> upper_;
    std::vector<int> nodes_;
    std::vector<double> step_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 0;
};

/// Per-(node, regime) values, stored node-major and regime-minor.
class ValueField {
public:
    ValueField(Grid grid, int regimes);
    ValueField(Grid grid, int regimes, Eigen::VectorXd values);

    const Grid& grid() const noexcept { return grid_; }
    int regimes() const noexcept { return regimes_; }
    std::size_t unknown(std::size_t node, int regime) const {
        return node * static_cast<std::size_t>(regimes_) + static_cast<std::size_t>(regime);
    }
    double operator()(std::size_t node, int regime) const { return values_[unknown(node, regime)]; }
    double& operator()(std::size_t node, int regime) { return values_[unknown(node, regime)]; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    Eigen::VectorXd& values() noexcept { return values_; }

    /// Multilinear interpolation; points outside the grid are clamped to it.
    double interpolate(const Eigen::VectorXd& x, int regime) const;

private:
    Grid grid_;
    int regimes_;
    Eigen::VectorXd values_;
};

/// Calls fn(corner_node, weight) for the 2^n corners of the cell containing x
/// (clamped). Weights sum to one.
template <class Fn>
void for_each_corner(const Grid& grid, const Eigen::VectorXd& x, Fn&& fn);

}  // namespace ssc

#include "ssc/grid_impl.hpp"
