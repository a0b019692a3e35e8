#ifndef GRADFLOW_GRID_HPP
#define GRADFLOW_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradflow {

enum class Topology { torus, interval };

/// Uniform 1-D grid on [0, L), cell i = [i*dx, (i+1)*dx).
struct Grid {
    std::size_t n_cells;
    double domain_length;
    Topology topology;

    Grid(std::size_t n, double length, Topology topo)
        : n_cells(n), domain_length(length), topology(topo) {
        if (n == 0) throw std::invalid_argument("grid needs at least one cell");
        if (!(length > 0.0)) throw std::invalid_argument("domain length must be positive");
    }

    double dx() const { return domain_length / static_cast<double>(n_cells); }
    double cell_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    double cell_left(std::size_t i) const { return static_cast<double>(i) * dx(); }

    std::vector<double> cell_centers() const {
        std::vector<double> xs(n_cells);
        for (std::size_t i = 0; i < n_cells; ++i) xs[i] = cell_center(i);
        return xs;
    }

    bool operator==(const Grid& other) const {
        return n_cells == other.n_cells && domain_length == other.domain_length &&
               topology == other.topology;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (a != b) throw std::invalid_argument("grid mismatch");
}

/// Cellwise values of a function on the grid (sampled at cell centers).
using GridFn = std::vector<double>;

} // namespace gradflow

#endif
