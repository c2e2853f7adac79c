#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pmi/dataset.hpp"

namespace pmi {

// Per-axis cell index into the grid.
struct CellIndex {
    std::vector<int> coords;

    bool operator==(const CellIndex&) const = default;
    auto operator<=>(const CellIndex&) const = default;
};

std::string to_string(const CellIndex& c);          // "12,87"
CellIndex cell_index_from_string(const std::string& s);

struct CellIndexHash {
    std::size_t operator()(const CellIndex& c) const noexcept;
};

// Axis-aligned decomposition of [0,1]^d into cells of side epsilon. Cells
// are never materialized; this is pure index arithmetic. When 1/epsilon is
// not integral the last cell per axis is truncated in measure but keeps the
// nominal volume epsilon^d in pooling (integral_grid flags this).
class GridPartition {
public:
    GridPartition(int dimension, double cell_side);

    int dimension() const { return dimension_; }
    double cell_side() const { return cell_side_; }
    long long cells_per_axis() const { return cells_per_axis_; }
    double cell_volume() const { return cell_volume_; }
    bool integral_grid() const { return integral_grid_; }

    // k^d as double; exact only while it fits, callers treat it as a size hint
    double total_cells() const;

    // floor(x_j / epsilon) per axis, with exact grid-line multiples assigned
    // to the higher-index cell and x_j = 1.0 clamped to the last cell
    CellIndex cell_of(std::span<const double> x) const;

    // (coords_j + 0.5) * epsilon, clipped to <= 1
    std::vector<double> center_of(const CellIndex& c) const;

    // closed cell box [lo, hi], hi clipped to the domain boundary
    void cell_box(const CellIndex& c, std::vector<double>& lo,
                  std::vector<double>& hi) const;

    bool in_bounds(const CellIndex& c) const;

private:
    int dimension_;
    double cell_side_;
    long long cells_per_axis_;
    double cell_volume_;
    bool integral_grid_;
};

// Every point lands in exactly one cell; cells absent from the map are
// empty. Ordered map so downstream iteration is deterministic.
std::map<CellIndex, std::vector<std::size_t>> group_points(const GridPartition& p,
                                                           const LabeledDataset& ds);

}  // namespace pmi
