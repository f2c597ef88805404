#include "ssc/grid.hpp"

#include "ssc/errors.hpp"

#include <cmath>
#include <string>

namespace ssc {

Grid::Grid(std::vector<double> upper, std::vector<int> nodes)
    : upper_(std::move(upper)), nodes_(std::move(nodes)) {
    if (upper_.empty() || upper_.size() != nodes_.size())
        throw Error(ErrorCode::kInvalidArgument, "grid needs matching, nonempty axis lists");
    if (upper_.size() > 16) throw Error(ErrorCode::kInvalidArgument, "grid dimension too large");
    const int n = dim();
    step_.resize(n);
    stride_.resize(n);
    for (int k = 0; k < n; ++k) {
        if (!(upper_[k] > 0.0) || !std::isfinite(upper_[k]))
            throw Error(ErrorCode::kInvalidArgument, "grid upper bound must be positive");
        if (nodes_[k] < 3)
            throw Error(ErrorCode::kInvalidArgument,
                        "grid needs at least 3 nodes per axis, got " + std::to_string(nodes_[k]));
        step_[k] = upper_[k] / (nodes_[k] - 1);
    }
    std::size_t s = 1;
    for (int k = n - 1; k >= 0; --k) {
        stride_[k] = s;
        s *= static_cast<std::size_t>(nodes_[k]);
    }
    size_ = s;
}

Grid Grid::uniform(int dim, double upper, int nodes) {
    return Grid(std::vector<double>(dim, upper), std::vector<int>(dim, nodes));
}

std::vector<int> Grid::multi_index(std::size_t node) const {
    std::vector<int> out(dim());
    for (int k = 0; k < dim(); ++k) out[k] = index_on_axis(node, k);
    return out;
}

std::size_t Grid::node(std::span<const int> index) const {
    if (static_cast<int>(index.size()) != dim())
        throw Error(ErrorCode::kOutOfGrid, "multi-index has wrong length");
    std::size_t out = 0;
    for (int k = 0; k < dim(); ++k) {
        if (index[k] < 0 || index[k] >= nodes_[k])
            throw Error(ErrorCode::kOutOfGrid, "multi-index outside the grid");
        out += static_cast<std::size_t>(index[k]) * stride_[k];
    }
    return out;
}

double Grid::coordinate(std::size_t node, int axis) const {
    const int i = index_on_axis(node, axis);
    // The last node sits exactly on the upper bound.
    return i == nodes_[axis] - 1 ? upper_[axis] : i * step_[axis];
}

Eigen::VectorXd Grid::point(std::size_t node) const {
    if (node >= size_) throw Error(ErrorCode::kOutOfGrid, "node index outside the grid");
    Eigen::VectorXd x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = coordinate(node, k);
    return x;
}

bool Grid::on_upper_face(std::size_t node) const {
    for (int k = 0; k < dim(); ++k)
        if (at_upper(node, k)) return true;
    return false;
}

bool Grid::on_lower_face(std::size_t node) const {
    for (int k = 0; k < dim(); ++k)
        if (at_lower(node, k)) return true;
    return false;
}

Grid Grid::restricted(std::span<const int> axes) const {
    std::vector<double> upper;
    std::vector<int> nodes;
    for (int a : axes) {
        upper.push_back(upper_.at(a));
        nodes.push_back(nodes_.at(a));
    }
    return Grid(std::move(upper), std::move(nodes));
}

ValueField::ValueField(Grid grid, int regimes)
    : grid_(std::move(grid)), regimes_(regimes),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.size()) * regimes)) {
    if (regimes < 1) throw Error(ErrorCode::kInvalidArgument, "value field needs a regime");
}

ValueField::ValueField(Grid grid, int regimes, Eigen::VectorXd values)
    : grid_(std::move(grid)), regimes_(regimes), values_(std::move(values)) {
    if (regimes < 1) throw Error(ErrorCode::kInvalidArgument, "value field needs a regime");
    if (values_.size() != static_cast<Eigen::Index>(grid_.size()) * regimes)
        throw Error(ErrorCode::kInvalidArgument, "value vector size does not match grid");
}

double ValueField::interpolate(const Eigen::VectorXd& x, int regime) const {
    if (x.size() != grid_.dim()) throw Error(ErrorCode::kOutOfGrid, "point has wrong dimension");
    if (regime < 0 || regime >= regimes_) throw Error(ErrorCode::kOutOfGrid, "regime out of range");
    double acc = 0.0;
    for_each_corner(grid_, x, [&](std::size_t node, double w) {
        if (w != 0.0) acc += w * (*this)(node, regime);
    });
    return acc;
}

}  // namespace ssc
