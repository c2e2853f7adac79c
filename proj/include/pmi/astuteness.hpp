#pragma once

#include <cstdint>
#include <span>

#include "pmi/classifier.hpp"
#include "pmi/opmodel.hpp"
#include "pmi/partition.hpp"

namespace pmi {

enum class CellKind { normal, empty, cross_boundary };

// Ground-truth assignment of a cell. Normal cells carry the single label
// observed inside; empty cells carry the majority vote of model predictions
// on uniform samples, with the majority fraction as the margin; cells with
// mixed observed labels cross the decision boundary.
struct CellType {
    CellKind kind = CellKind::empty;
    int label = -1;          // meaningless for cross_boundary
    double vote_margin = 0.0;  // 1.0 for normal cells, majority fraction for empty
};

struct CellAstutenessEstimate {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t samples_used = 0;
    CellType cell_type;
};

// Per-cell record consumed by the assembly step.
struct CellAssessment {
    CellIndex index;
    CellType type;
    double lambda_mean = 0.0;
    double lambda_var = 0.0;
    std::size_t samples_used = 0;
    CellOpEstimate op;
};

const char* to_string(CellKind kind);

// vote_n must be odd (tie avoidance for two-class problems). The vote RNG
// stream is derived from (seed, cell index), so results are independent of
// the order cells are processed in.
CellType type_cell(std::span<const LabeledPoint> points_in_cell, const Classifier& model,
                   const GridPartition& p, const CellIndex& c, int vote_n,
                   std::uint64_t seed);

// Simple Monte Carlo estimate of the cell's misclassification fraction
// against `truth` under a uniform conditional profile over the cell box:
// mean is the sample fraction, variance the Bessel-corrected sample
// variance over n. Requires n >= 30 so the normal approximation applies.
CellAstutenessEstimate estimate_unastuteness(const Classifier& model,
                                             const GridPartition& p, const CellIndex& c,
                                             int truth, std::size_t n,
                                             std::uint64_t seed);

// Full per-cell assessment: typing, unastuteness (conservatively 1 with
// zero variance for cross-boundary cells), and the pooled OP estimate.
CellAssessment assess_cell(const Classifier& model,
                           std::span<const LabeledPoint> points_in_cell,
                           const GridPartition& p, const CellIndex& c,
                           const OpModel& op, std::size_t n, int vote_n,
                           std::uint64_t seed);

}  // namespace pmi
