#include "pmi/separation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "pmi/error.hpp"

namespace pmi {

double linf_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

namespace {

using WitnessPair = std::pair<std::size_t, std::size_t>;

std::string point_to_string(const LabeledPoint& p) {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < p.x.size(); ++j) {
        if (j) os << ',';
        os << p.x[j];
    }
    os << ")->" << p.label;
    return os.str();
}

// canonical witness: points ordered lexicographically by coordinates,
// falling back to index for exact duplicates
WitnessPair canonical(const LabeledDataset& ds, std::size_t i, std::size_t j) {
    const auto& a = ds.points[i].x;
    const auto& b = ds.points[j].x;
    if (a < b) return {i, j};
    if (b < a) return {j, i};
    return {std::min(i, j), std::max(i, j)};
}

bool pair_less(const LabeledDataset& ds, const WitnessPair& p, const WitnessPair& q) {
    const auto& pa = ds.points[p.first].x;
    const auto& pb = ds.points[p.second].x;
    const auto& qa = ds.points[q.first].x;
    const auto& qb = ds.points[q.second].x;
    if (pa != qa) return pa < qa;
    if (pb != qb) return pb < qb;
    return p < q;
}

struct Best {
    double d = std::numeric_limits<double>::infinity();
    WitnessPair witness{0, 0};

    void consider(const LabeledDataset& ds, std::size_t i, std::size_t j) {
        if (ds.points[i].label == ds.points[j].label) return;
        const double dist = linf_distance(ds.points[i].x, ds.points[j].x);
        if (dist == 0.0)
            throw Error(ErrorKind::label_conflict,
                        "point " + point_to_string(ds.points[i]) +
                            " duplicates a point with a different label");
        if (dist > d) return;
        WitnessPair cand = canonical(ds, i, j);
        if (dist < d || pair_less(ds, cand, witness)) {
            d = dist;
            witness = cand;
        }
    }
};

struct BucketKey {
    std::vector<long long> v;
    bool operator==(const BucketKey&) const = default;
};

struct BucketKeyHash {
    std::size_t operator()(const BucketKey& k) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (long long x : k.v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

// cheap upper bound: distance from each point to the most recent point of
// every other label, in dataset order
Best initial_bound(const LabeledDataset& ds) {
    Best best;
    std::unordered_map<int, std::size_t> last_seen;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (const auto& [label, j] : last_seen)
            if (label != ds.points[i].label) best.consider(ds, j, i);
        last_seen[ds.points[i].label] = i;
    }
    return best;
}

// one grid pass with bucket side = best.d: any cross pair closer than the
// current best must fall into the same or an adjacent bucket in L-infinity
Best bucket_pass(const LabeledDataset& ds, Best best) {
    const int d = ds.dimension;
    const double side = best.d;
    std::unordered_map<BucketKey, std::vector<std::size_t>, BucketKeyHash> buckets;
    auto key_of = [&](std::size_t i) {
        BucketKey k;
        k.v.resize(d);
        for (int j = 0; j < d; ++j)
            k.v[j] = static_cast<long long>(std::floor(ds.points[i].x[j] / side));
        return k;
    };
    for (std::size_t i = 0; i < ds.size(); ++i) buckets[key_of(i)].push_back(i);

    std::vector<long long> offset(d, -1);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const BucketKey home = key_of(i);
        std::fill(offset.begin(), offset.end(), -1);
        while (true) {
            BucketKey probe = home;
            for (int j = 0; j < d; ++j) probe.v[j] += offset[j];
            if (auto it = buckets.find(probe); it != buckets.end())
                for (std::size_t j : it->second)
                    if (j > i) best.consider(ds, i, j);
            int axis = 0;
            while (axis < d && offset[axis] == 1) offset[axis++] = -1;
            if (axis == d) break;
            ++offset[axis];
        }
    }
    return best;
}

}  // namespace

std::pair<double, WitnessPair> min_cross_distance_bruteforce(const LabeledDataset& ds) {
    Best best;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j) best.consider(ds, i, j);
    return {best.d, best.witness};
}

std::pair<double, WitnessPair> min_cross_distance_bucketed(const LabeledDataset& ds) {
    Best best = initial_bound(ds);
    while (true) {
        Best refined = bucket_pass(ds, best);
        if (refined.d == best.d) return {refined.d, refined.witness};
        best = refined;
    }
}

SeparationEstimate estimate_r(const LabeledDataset& ds) {
    constexpr std::size_t kPairwiseLimit = 20000;
    auto [d_min, witness] = ds.size() <= kPairwiseLimit ? min_cross_distance_bruteforce(ds)
                                                        : min_cross_distance_bucketed(ds);
    SeparationEstimate est;
    est.d_min = d_min;
    est.r_hat = d_min / 2.0;
    est.witness_a = ds.points[witness.first];
    est.witness_b = ds.points[witness.second];
    return est;
}

CellSizeCheck validate_cell_size(const SeparationEstimate& est, double epsilon,
                                 SeparationConvention convention) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::argument, "epsilon must be > 0");
    const double bound =
        convention == SeparationConvention::r_hat ? est.r_hat : est.d_min;
    return {epsilon < bound, bound};
}

}  // namespace pmi
