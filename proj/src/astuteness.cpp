#include "pmi/astuteness.hpp"

#include <algorithm>
#include <map>

#include "pmi/error.hpp"
#include "pmi/rng.hpp"

namespace pmi {

namespace {

constexpr std::uint64_t kVoteTag = 0x707eULL;
constexpr std::uint64_t kSampleTag = 0x3a4dULL;

void sample_in_box(Rng& rng, const std::vector<double>& lo, const std::vector<double>& hi,
                   std::vector<double>& out) {
    out.resize(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) out[j] = rng.uniform(lo[j], hi[j]);
}

}  // namespace

const char* to_string(CellKind kind) {
    switch (kind) {
        case CellKind::normal: return "normal";
        case CellKind::empty: return "empty";
        case CellKind::cross_boundary: return "cross_boundary";
    }
    return "unknown";
}

CellType type_cell(std::span<const LabeledPoint> points_in_cell, const Classifier& model,
                   const GridPartition& p, const CellIndex& c, int vote_n,
                   std::uint64_t seed) {
    if (vote_n < 1 || vote_n % 2 == 0)
        throw Error(ErrorKind::argument, "vote_n must be odd and >= 1");

    if (!points_in_cell.empty()) {
        const int first = points_in_cell.front().label;
        for (const auto& pt : points_in_cell)
            if (pt.label != first) return {CellKind::cross_boundary, -1, 0.0};
        return {CellKind::normal, first, 1.0};
    }

    std::vector<double> lo, hi, x;
    p.cell_box(c, lo, hi);
    Rng rng(mix_seed(seed, kVoteTag, c.coords));
    std::map<int, int> votes;  // ordered so ties resolve to the lowest label
    for (int i = 0; i < vote_n; ++i) {
        sample_in_box(rng, lo, hi, x);
        ++votes[model.predict(x)];
    }
    int best_label = -1, best_count = -1;
    for (const auto& [label, count] : votes)
        if (count > best_count) {
            best_label = label;
            best_count = count;
        }
    return {CellKind::empty, best_label,
            static_cast<double>(best_count) / static_cast<double>(vote_n)};
}

CellAstutenessEstimate estimate_unastuteness(const Classifier& model,
                                             const GridPartition& p, const CellIndex& c,
                                             int truth, std::size_t n,
                                             std::uint64_t seed) {
    if (n < 30)
        throw Error(ErrorKind::argument,
                    "unastuteness estimation needs n >= 30 samples");
    const auto& classes = model.classes();
    if (std::find(classes.begin(), classes.end(), truth) == classes.end())
        throw Error(ErrorKind::argument, "truth label not among classifier classes");

    std::vector<double> lo, hi, x;
    p.cell_box(c, lo, hi);
    Rng rng(mix_seed(seed, kSampleTag, c.coords));
    std::size_t misses = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sample_in_box(rng, lo, hi, x);
        if (model.predict(x) != truth) ++misses;
    }
    const double mean = static_cast<double>(misses) / static_cast<double>(n);
    // Bessel-corrected sample variance of the indicator, divided by n;
    // for 0/1 data the sum of squared deviations collapses to n*mu*(1-mu)
    const double variance = mean * (1.0 - mean) / static_cast<double>(n - 1);

    CellAstutenessEstimate est;
    est.mean = mean;
    est.variance = variance;
    est.samples_used = n;
    return est;
}

CellAssessment assess_cell(const Classifier& model,
                           std::span<const LabeledPoint> points_in_cell,
                           const GridPartition& p, const CellIndex& c,
                           const OpModel& op, std::size_t n, int vote_n,
                           std::uint64_t seed) {
    CellAssessment out;
    out.index = c;
    out.type = type_cell(points_in_cell, model, p, c, vote_n, seed);
    if (out.type.kind == CellKind::cross_boundary) {
        out.lambda_mean = 1.0;  // conservative: ground truth unknown
        out.lambda_var = 0.0;
        out.samples_used = 0;
    } else {
        auto est = estimate_unastuteness(model, p, c, out.type.label, n, seed);
        out.lambda_mean = est.mean;
        out.lambda_var = est.variance;
        out.samples_used = est.samples_used;
    }
    out.op = op.pooled_op(p, c);
    return out;
}

}  // namespace pmi
