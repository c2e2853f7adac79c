#include "pmi/opmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pmi/accumulate.hpp"
#include "pmi/error.hpp"
#include "pmi/rng.hpp"

namespace pmi {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr std::size_t kMaxEnumerate = 20'000'000;

void check_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) throw Error(ErrorKind::argument, "query point not finite");
}

// lexicographic odometer over all k^d cells
template <typename Fn>
void for_each_cell(const GridPartition& p, Fn&& fn) {
    CellIndex c;
    c.coords.assign(p.dimension(), 0);
    const int k = static_cast<int>(p.cells_per_axis());
    while (true) {
        fn(c);
        int axis = p.dimension() - 1;
        while (axis >= 0 && c.coords[axis] == k - 1) c.coords[axis--] = 0;
        if (axis < 0) break;
        ++c.coords[axis];
    }
}

}  // namespace

double OpModel::norm_constant() const {
    return std::pow(kTwoPi, -0.5 * dim_) /
           (static_cast<double>(n_) * std::pow(bandwidth_, dim_));
}

void OpModel::kernel_values(std::span<const double> x, std::vector<double>& out) const {
    out.resize(n_);
    const double inv_h2 = 1.0 / (bandwidth_ * bandwidth_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double* pj = coords_.data() + j * dim_;
        double q = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double u = x[k] - pj[k];
            q += u * u;
        }
        out[j] = std::exp(-0.5 * q * inv_h2);
    }
}

double OpModel::density(std::span<const double> x) const {
    check_finite(x);
    if (static_cast<int>(x.size()) != dim_)
        throw Error(ErrorKind::argument, "query dimension mismatch");
    const double inv_h2 = 1.0 / (bandwidth_ * bandwidth_);
    double sum = 0.0;  // all-positive terms, plain summation is enough here
    for (std::size_t j = 0; j < n_; ++j) {
        const double* pj = coords_.data() + j * dim_;
        double q = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double u = x[k] - pj[k];
            q += u * u;
        }
        sum += std::exp(-0.5 * q * inv_h2);
    }
    return norm_constant() * sum;
}

double OpModel::log_density(std::span<const double> x) const {
    check_finite(x);
    const double inv_h2 = 1.0 / (bandwidth_ * bandwidth_);
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double* pj = coords_.data() + j * dim_;
        double q = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double u = x[k] - pj[k];
            q += u * u;
        }
        terms[j] = -0.5 * q * inv_h2;
        max_term = std::max(max_term, terms[j]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum) - std::log(static_cast<double>(n_)) -
           dim_ * std::log(bandwidth_) - 0.5 * dim_ * std::log(kTwoPi);
}

double OpModel::density_variance(std::span<const double> x) const {
    check_finite(x);
    std::vector<double> kv;
    kernel_values(x, kv);
    return replica_variance(kv);
}

// sample variance of bootstrap-replica densities given the kernel values
double OpModel::replica_variance(const std::vector<double>& kv) const {
    const double norm = norm_constant();
    std::vector<double> replica(replicas_);
    for (std::size_t b = 0; b < replicas_; ++b) {
        const std::uint32_t* counts = resample_counts_.data() + b * n_;
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j)
            s += static_cast<double>(counts[j]) * kv[j];
        replica[b] = norm * s;
    }
    CompensatedSum mean_sum;
    for (double r : replica) mean_sum.add(r);
    const double mean = mean_sum.value() / static_cast<double>(replicas_);
    CompensatedSum var_sum;
    for (double r : replica) var_sum.add((r - mean) * (r - mean));
    return var_sum.value() / static_cast<double>(replicas_ - 1);
}

double OpModel::density_variance_analytic(std::span<const double> x) const {
    // int K^2 over R^d for the product Gaussian kernel is (2 sqrt(pi))^-d
    const double k2 = std::pow(2.0 * std::sqrt(3.14159265358979323846), -dim_);
    return density(x) * k2 /
           (static_cast<double>(n_) * std::pow(bandwidth_, dim_));
}

CellOpEstimate OpModel::pooled_op(const GridPartition& p, const CellIndex& c) const {
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->entries.find(c); it != cache_->entries.end())
            return it->second;
    }
    const auto center = p.center_of(c);
    std::vector<double> kv;
    kernel_values(center, kv);
    double sum = 0.0;
    for (double k : kv) sum += k;

    CellOpEstimate est;
    est.density_at_center = norm_constant() * sum;
    est.mean = est.density_at_center * p.cell_volume();
    est.variance = p.cell_volume() * p.cell_volume() * replica_variance(kv);
    {
        std::lock_guard lock(cache_->mutex);
        cache_->entries.emplace(c, est);
    }
    return est;
}

RankScan OpModel::rank_scan(const GridPartition& p, double threshold,
                            std::size_t max_cells) const {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw Error(ErrorKind::argument, "threshold must be in (0,1]");
    if (p.dimension() != dim_)
        throw Error(ErrorKind::argument, "partition dimension mismatch");

    std::vector<std::pair<double, CellIndex>> pool;  // (mean, index)
    CompensatedSum total;
    auto consider = [&](const CellIndex& c) {
        const double mean = density(p.center_of(c)) * p.cell_volume();
        total.add(mean);
        pool.emplace_back(mean, c);
    };

    if (dim_ <= 3) {
        if (p.total_cells() > static_cast<double>(kMaxEnumerate))
            throw Error(ErrorKind::unsupported,
                        "cell enumeration exceeds budget; coarsen the grid");
        pool.reserve(static_cast<std::size_t>(p.total_cells()));
        for_each_cell(p, consider);
    } else {
        // occupied cells plus axis neighbors; far empty cells are skipped
        std::set<CellIndex> candidates;
        for (std::size_t j = 0; j < n_; ++j) {
            CellIndex c = p.cell_of(point(j));
            candidates.insert(c);
            for (int axis = 0; axis < dim_; ++axis) {
                for (int step : {-1, 1}) {
                    CellIndex nb = c;
                    nb.coords[axis] += step;
                    if (p.in_bounds(nb)) candidates.insert(nb);
                }
            }
        }
        pool.reserve(candidates.size());
        for (const auto& c : candidates) consider(c);
    }

    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    RankScan scan;
    scan.enumerated = pool.size();
    scan.op_mass_total = total.value();
    if (scan.op_mass_total <= 0.0) return scan;

    const double target = threshold * scan.op_mass_total;
    CompensatedSum covered;
    std::size_t taken = 0;
    for (const auto& entry : pool) {
        if (taken >= max_cells) break;
        if (covered.value() >= target) break;
        covered.add(entry.first);
        ++taken;
    }
    pool.resize(taken);
    scan.cells = std::move(pool);
    scan.op_mass_covered = covered.value();
    return scan;
}

RankOutcome OpModel::rank_cells_by_op(const GridPartition& p, double threshold,
                                      std::size_t max_cells) const {
    RankScan scan = rank_scan(p, threshold, max_cells);
    RankOutcome outcome;
    outcome.enumerated = scan.enumerated;
    outcome.op_mass_total = scan.op_mass_total;
    outcome.op_mass_covered = scan.op_mass_covered;
    outcome.cells.reserve(scan.cells.size());
    for (const auto& [mean, index] : scan.cells)
        outcome.cells.push_back({index, pooled_op(p, index)});
    return outcome;
}

OpModel fit_kde(const std::vector<std::vector<double>>& coords,
                std::optional<double> bandwidth, std::uint64_t seed,
                std::size_t replicas) {
    if (coords.size() < 2)
        throw Error(ErrorKind::argument, "KDE needs at least 2 points");
    if (replicas < 2)
        throw Error(ErrorKind::argument, "bootstrap needs at least 2 replicas");

    OpModel m;
    m.n_ = coords.size();
    m.dim_ = static_cast<int>(coords.front().size());
    if (m.dim_ < 1) throw Error(ErrorKind::argument, "KDE needs dimension >= 1");
    m.coords_.reserve(m.n_ * m.dim_);
    for (const auto& p : coords) {
        if (static_cast<int>(p.size()) != m.dim_)
            throw Error(ErrorKind::argument, "inconsistent coordinate dimensions");
        m.coords_.insert(m.coords_.end(), p.begin(), p.end());
    }

    if (bandwidth) {
        if (!(*bandwidth > 0.0))
            throw Error(ErrorKind::argument, "bandwidth must be > 0");
        m.bandwidth_ = *bandwidth;
    } else {
        bool all_identical = true;
        for (std::size_t j = 1; j < m.n_ && all_identical; ++j)
            for (int k = 0; k < m.dim_; ++k)
                if (m.coords_[j * m.dim_ + k] != m.coords_[k]) {
                    all_identical = false;
                    break;
                }
        if (all_identical)
            throw Error(ErrorKind::degenerate_density,
                        "cannot select a bandwidth: all points identical");

        // 5-fold CV over a 20-point log grid on [0.01, 1.0]; folds are a
        // seeded round-robin over a shuffled order; ties go to the smaller h
        const std::size_t folds = std::min<std::size_t>(5, m.n_);
        std::vector<std::size_t> order(m.n_);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(mix_seed(seed, 0xcfULL));
        for (std::size_t i = m.n_ - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.below(i + 1)]);

        double best_h = 0.0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < 20; ++gi) {
            const double h = 0.01 * std::pow(100.0, gi / 19.0);
            double score = 0.0;
            for (std::size_t f = 0; f < folds; ++f) {
                OpModel part;
                part.dim_ = m.dim_;
                part.bandwidth_ = h;
                for (std::size_t i = 0; i < m.n_; ++i) {
                    if (i % folds == f) continue;
                    const double* src = m.coords_.data() + order[i] * m.dim_;
                    part.coords_.insert(part.coords_.end(), src, src + m.dim_);
                }
                part.n_ = part.coords_.size() / m.dim_;
                for (std::size_t i = f; i < m.n_; i += folds) {
                    const double* src = m.coords_.data() + order[i] * m.dim_;
                    score += part.log_density({src, static_cast<std::size_t>(m.dim_)});
                }
            }
            if (score > best_score) {
                best_score = score;
                best_h = h;
            }
        }
        m.bandwidth_ = best_h;
        m.bandwidth_auto_ = true;
    }

    m.replicas_ = replicas;
    m.resample_counts_.assign(replicas * m.n_, 0);
    Rng boot_rng(mix_seed(seed, 0xb007ULL));
    for (std::size_t b = 0; b < replicas; ++b) {
        std::uint32_t* counts = m.resample_counts_.data() + b * m.n_;
        for (std::size_t i = 0; i < m.n_; ++i) ++counts[boot_rng.below(m.n_)];
    }
    return m;
}

double pooled_mass_total(const OpModel& m, const GridPartition& p) {
    if (p.dimension() > 3)
        throw Error(ErrorKind::unsupported, "mass enumeration supports d <= 3 only");
    if (p.total_cells() > static_cast<double>(kMaxEnumerate))
        throw Error(ErrorKind::unsupported,
                    "cell enumeration exceeds budget; coarsen the grid");
    CompensatedSum total;
    for_each_cell(p, [&](const CellIndex& c) {
        total.add(m.density(p.center_of(c)) * p.cell_volume());
    });
    return total.value();
}

}  // namespace pmi
