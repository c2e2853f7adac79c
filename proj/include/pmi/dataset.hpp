#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pmi {

// A point in the unit hypercube [0,1]^d with a class label.
struct LabeledPoint {
    std::vector<double> x;
    int label = 0;
};

// Immutable after construction; the sole evidence source for the whole
// assessment. Class list is kept sorted ascending.
struct LabeledDataset {
    std::vector<LabeledPoint> points;
    int dimension = 0;
    std::vector<int> classes;
    std::string name;

    std::size_t size() const { return points.size(); }
    std::span<const double> coords(std::size_t i) const { return points[i].x; }
};

enum class SyntheticFamily { two_blob, sparse_ds1, dense_ds2 };

// Builds a dataset from points, deriving dimension and the sorted class
// list; enforces the type invariants (box membership, >= 2 classes).
LabeledDataset make_dataset(std::vector<LabeledPoint> points, std::string name);

// CSV: d coordinate columns then one integer label column, '.' decimal,
// optional header row (auto-detected by a non-numeric first row).
LabeledDataset load_dataset(const std::string& path);
void save_dataset(const LabeledDataset& ds, const std::string& path);

// Deterministic shuffle-split. Test size = ceil(n * test_fraction), clamped
// so neither side is empty. Returns (train, test).
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                double test_fraction,
                                                std::uint64_t seed);

// Two-class 2D mixture-of-Gaussians samplers, clipped to the unit square.
// Component means/sigmas are fixed constants (see README); families differ
// by spread and component count. Labels alternate so both classes are
// always present.
LabeledDataset generate_synthetic(SyntheticFamily family, std::size_t n,
                                  std::uint64_t seed);

SyntheticFamily synthetic_family_from_string(const std::string& s);
std::string to_string(SyntheticFamily family);

}  // namespace pmi
