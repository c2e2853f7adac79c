#pragma once

#include <utility>

#include "pmi/dataset.hpp"

namespace pmi {

// Separation of differently-labeled points, in L-infinity throughout.
// d_min is the raw minimum cross-class distance; r_hat = d_min / 2 follows
// the "at least 2r apart" convention. Both are surfaced because published
// figures sometimes report the raw minimum as the separation.
struct SeparationEstimate {
    double d_min = 0.0;
    double r_hat = 0.0;
    LabeledPoint witness_a;
    LabeledPoint witness_b;
};

enum class SeparationConvention { r_hat, d_min };

struct CellSizeCheck {
    bool ok = false;
    double max_admissible = 0.0;
};

double linf_distance(std::span<const double> a, std::span<const double> b);

// Exact minimum cross-class distance with the lexicographically smallest
// witness pair. The bucketed variant grids points at the current best
// distance and rescans with shrunken buckets until stable; both are exact
// and must agree. estimate_r picks the scan by size (pairwise up to 20000
// points).
std::pair<double, std::pair<std::size_t, std::size_t>> min_cross_distance_bruteforce(
    const LabeledDataset& ds);
std::pair<double, std::pair<std::size_t, std::size_t>> min_cross_distance_bucketed(
    const LabeledDataset& ds);

SeparationEstimate estimate_r(const LabeledDataset& ds);

// ok iff epsilon is strictly below the chosen separation value.
CellSizeCheck validate_cell_size(const SeparationEstimate& est, double epsilon,
                                 SeparationConvention convention = SeparationConvention::r_hat);

}  // namespace pmi
