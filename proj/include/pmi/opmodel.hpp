#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pmi/partition.hpp"

namespace pmi {

// Operational-profile mass of one cell: density at the cell center times
// the nominal cell volume, with a bootstrap variance.
struct CellOpEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double density_at_center = 0.0;
};

struct RankedCell {
    CellIndex index;
    CellOpEstimate op;
};

struct RankOutcome {
    std::vector<RankedCell> cells;  // descending pooled-OP mean
    double op_mass_covered = 0.0;   // pooled mass of the returned prefix
    double op_mass_total = 0.0;     // pooled mass of all enumerated cells
    std::size_t enumerated = 0;
};

// means-only ranking result; the variance side of the estimates is left to
// pooled_op so ranking never pays the bootstrap cost per enumerated cell
struct RankScan {
    std::vector<std::pair<double, CellIndex>> cells;  // (pooled mean, index)
    double op_mass_covered = 0.0;
    double op_mass_total = 0.0;
    std::size_t enumerated = 0;
};

// Gaussian-kernel density estimate of the operational profile, fitted from
// unlabeled coordinates. Multivariate form is a product kernel with one
// scalar bandwidth h and normalization 1/(n h^d). Bootstrap resample index
// sets (drawn once, seeded) provide the variance of the density at a point.
// Immutable after fitting; all queries are const and thread-safe.
class OpModel {
public:
    double density(std::span<const double> x) const;

    // sample variance over the B bootstrap-replica densities at x
    double density_variance(std::span<const double> x) const;

    // first-order plug-in variance f(x) * (2 sqrt(pi))^-d / (n h^d);
    // diagnostic cross-check only, the bootstrap is the primary estimate
    double density_variance_analytic(std::span<const double> x) const;

    // held-out log density, the cross-validation score ingredient
    double log_density(std::span<const double> x) const;

    // mean/variance of the cell's pooled OP; lazily cached per center
    CellOpEstimate pooled_op(const GridPartition& p, const CellIndex& c) const;

    // Cells sorted by descending pooled-OP mean (ties by index), cut at the
    // shortest prefix reaching threshold * total enumerated mass, then at
    // max_cells. For d <= 3 every grid cell is enumerated; above that, only
    // cells holding a training coordinate plus their axis neighbors are
    // considered (documented approximation).
    RankOutcome rank_cells_by_op(const GridPartition& p, double threshold,
                                 std::size_t max_cells) const;

    // the ordering/truncation half of rank_cells_by_op, without estimates
    RankScan rank_scan(const GridPartition& p, double threshold,
                       std::size_t max_cells) const;

    std::size_t size() const { return n_; }
    int dimension() const { return dim_; }
    double bandwidth() const { return bandwidth_; }
    bool bandwidth_was_auto() const { return bandwidth_auto_; }
    std::size_t replicas() const { return replicas_; }

    std::span<const double> point(std::size_t j) const {
        return {coords_.data() + j * dim_, static_cast<std::size_t>(dim_)};
    }

private:
    OpModel() = default;  // construct through fit_kde

    friend OpModel fit_kde(const std::vector<std::vector<double>>& coords,
                           std::optional<double> bandwidth, std::uint64_t seed,
                           std::size_t replicas);

    // unnormalized product-kernel values exp(-0.5 * |(x - X_j)/h|^2)
    void kernel_values(std::span<const double> x, std::vector<double>& out) const;
    double replica_variance(const std::vector<double>& kv) const;
    double norm_constant() const;

    std::size_t n_ = 0;
    int dim_ = 0;
    double bandwidth_ = 0.0;
    bool bandwidth_auto_ = false;
    std::size_t replicas_ = 0;
    std::vector<double> coords_;                // n x d row-major
    std::vector<std::uint32_t> resample_counts_;  // B x n multiplicities

    // idempotent fill keeps concurrent queries equivalent to serial ones
    struct CenterCache {
        std::mutex mutex;
        std::unordered_map<CellIndex, CellOpEstimate, CellIndexHash> entries;
    };
    mutable std::unique_ptr<CenterCache> cache_ = std::make_unique<CenterCache>();
};

// Fits the KDE. bandwidth = nullopt selects h by 5-fold cross-validated
// grid search maximizing held-out log density over 20 log-spaced values in
// [0.01, 1.0]. Draws `replicas` bootstrap resample index sets from seed.
OpModel fit_kde(const std::vector<std::vector<double>>& coords,
                std::optional<double> bandwidth, std::uint64_t seed,
                std::size_t replicas);

// sum of density(center) * cell volume over every grid cell (d <= 3)
double pooled_mass_total(const OpModel& m, const GridPartition& p);

}  // namespace pmi
