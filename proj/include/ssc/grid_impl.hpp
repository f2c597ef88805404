#pragma once

#include <algorithm>
#include <array>

namespace ssc {

template <class Fn>
void for_each_corner(const Grid& grid, const Eigen::VectorXd& x, Fn&& fn) {
    const int n = grid.dim();
    std::array<int, 16> base{};
    std::array<double, 16> frac{};
    for (int k = 0; k < n; ++k) {
        const int cells = grid.nodes(k) - 1;
        const double t = std::clamp(x[k], 0.0, grid.upper(k)) / grid.step(k);
        const int i = std::min(static_cast<int>(t), cells - 1);
        base[k] = i;
        frac[k] = std::clamp(t - i, 0.0, 1.0);
    }
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
        double w = 1.0;
        std::size_t node = 0;
        for (int k = 0; k < n; ++k) {
            const bool up = (corner >> k) & 1u;
            w *= up ? frac[k] : 1.0 - frac[k];
            node += static_cast<std::size_t>(base[k] + (up ? 1 : 0)) * grid.stride(k);
        }
        fn(node, w);
    }
}

}  // namespace ssc
