#include "pmi/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pmi/error.hpp"
#include "pmi/rng.hpp"

namespace pmi {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim spaces and a trailing CR from Windows line endings
        std::size_t b = field.find_first_not_of(" \t\r");
        std::size_t e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

bool parse_label(const std::string& s, int& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || v < 0) return false;
    out = static_cast<int>(v);
    return true;
}

void format_coord(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

}  // namespace

LabeledDataset make_dataset(std::vector<LabeledPoint> points, std::string name) {
    if (points.empty())
        throw Error(ErrorKind::degenerate_dataset, "dataset '" + name + "' is empty");
    const int d = static_cast<int>(points.front().x.size());
    std::set<int> labels;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (static_cast<int>(p.x.size()) != d)
            throw Error(ErrorKind::argument,
                        "point " + std::to_string(i) + " has dimension " +
                            std::to_string(p.x.size()) + ", expected " + std::to_string(d));
        for (double c : p.x)
            if (!(c >= 0.0 && c <= 1.0))
                throw Error(ErrorKind::domain, "point " + std::to_string(i) +
                                                   " has coordinate outside [0,1]");
        labels.insert(p.label);
    }
    if (labels.size() < 2)
        throw Error(ErrorKind::degenerate_dataset,
                    "dataset '" + name + "' has fewer than 2 classes");
    LabeledDataset ds;
    ds.points = std::move(points);
    ds.dimension = d;
    ds.classes.assign(labels.begin(), labels.end());
    ds.name = std::move(name);
    return ds;
}

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open dataset file: " + path);

    std::vector<LabeledPoint> points;
    std::string line;
    int line_no = 0;
    int dimension = -1;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_fields(line);

        if (first_content_row) {
            // header row detection: a non-numeric first field means header
            double probe;
            if (!parse_double(fields.front(), probe)) {
                first_content_row = false;
                continue;
            }
            first_content_row = false;
        }

        if (fields.size() < 2)
            throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                              ": expected coordinates and a label");
        if (dimension < 0) dimension = static_cast<int>(fields.size()) - 1;
        if (static_cast<int>(fields.size()) != dimension + 1)
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dimension + 1) + " columns, got " +
                            std::to_string(fields.size()));

        LabeledPoint p;
        p.x.resize(dimension);
        for (int j = 0; j < dimension; ++j) {
            if (!parse_double(fields[j], p.x[j]))
                throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                                  ": non-numeric coordinate '" + fields[j] + "'");
            if (!(p.x[j] >= 0.0 && p.x[j] <= 1.0))
                throw Error(ErrorKind::domain, path + ":" + std::to_string(line_no) +
                                                   ": coordinate " + fields[j] +
                                                   " outside [0,1]");
        }
        if (!parse_label(fields.back(), p.label))
            throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                              ": bad label '" + fields.back() + "'");
        points.push_back(std::move(p));
    }
    if (points.empty()) throw Error(ErrorKind::parse, path + ": no data rows");
    return make_dataset(std::move(points), std::filesystem::path(path).stem().string());
}

void save_dataset(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write dataset file: " + path);
    char buf[64];
    for (const auto& p : ds.points) {
        for (double c : p.x) {
            format_coord(buf, sizeof(buf), c);
            out << buf << ',';
        }
        out << p.label << '\n';
    }
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                double test_fraction,
                                                std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorKind::argument, "test_fraction must be in (0,1)");
    const std::size_t n = ds.size();
    if (n < 2)
        throw Error(ErrorKind::argument, "cannot split a dataset of fewer than 2 points");

    // ceil on the test side, clamped so neither split is empty; the 1e-9
    // nudge keeps exact products like 10*0.2 from ceiling up by an ulp
    std::size_t test_n = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * test_fraction - 1e-9));
    test_n = std::clamp<std::size_t>(test_n, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x5011fULL));
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);

    std::vector<LabeledPoint> test_pts, train_pts;
    test_pts.reserve(test_n);
    train_pts.reserve(n - test_n);
    for (std::size_t i = 0; i < n; ++i) {
        (i < test_n ? test_pts : train_pts).push_back(ds.points[order[i]]);
    }
    // a split side may end up single-class; the two-class invariant binds
    // the evidence dataset, not its partitions
    auto subset = [&](std::vector<LabeledPoint> pts, const char* suffix) {
        LabeledDataset out;
        std::set<int> labels;
        for (const auto& p : pts) labels.insert(p.label);
        out.points = std::move(pts);
        out.dimension = ds.dimension;
        out.classes.assign(labels.begin(), labels.end());
        out.name = ds.name + suffix;
        return out;
    };
    return {subset(std::move(train_pts), "-train"), subset(std::move(test_pts), "-test")};
}

namespace {

struct MixtureComponent {
    double mx, my, sigma;
};

// Family constants (see README for the table). sparse_ds1 keeps the class
// mixtures well apart; dense_ds2 interleaves tighter components so the
// nearest cross-class distance shrinks as data accumulates.
const MixtureComponent kTwoBlob[2][1] = {
    {{0.30, 0.35, 0.12}},
    {{0.70, 0.65, 0.12}},
};
const MixtureComponent kSparseDs1[2][2] = {
    {{0.22, 0.28, 0.13}, {0.30, 0.72, 0.13}},
    {{0.72, 0.30, 0.13}, {0.78, 0.70, 0.13}},
};
const MixtureComponent kDenseDs2[2][3] = {
    {{0.30, 0.30, 0.07}, {0.30, 0.70, 0.07}, {0.62, 0.50, 0.07}},
    {{0.50, 0.50, 0.07}, {0.70, 0.30, 0.07}, {0.70, 0.70, 0.07}},
};

}  // namespace

LabeledDataset generate_synthetic(SyntheticFamily family, std::size_t n,
                                  std::uint64_t seed) {
    if (n < 10) throw Error(ErrorKind::argument, "synthetic dataset needs n >= 10");

    Rng rng(mix_seed(seed, 0x5e3dULL + static_cast<std::uint64_t>(family)));
    std::vector<LabeledPoint> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const MixtureComponent* comp = nullptr;
        switch (family) {
            case SyntheticFamily::two_blob:
                comp = &kTwoBlob[label][0];
                break;
            case SyntheticFamily::sparse_ds1:
                comp = &kSparseDs1[label][rng.below(2)];
                break;
            case SyntheticFamily::dense_ds2:
                comp = &kDenseDs2[label][rng.below(3)];
                break;
        }
        LabeledPoint p;
        p.label = label;
        p.x = {std::clamp(rng.normal(comp->mx, comp->sigma), 0.0, 1.0),
               std::clamp(rng.normal(comp->my, comp->sigma), 0.0, 1.0)};
        points.push_back(std::move(p));
    }
    return make_dataset(std::move(points), to_string(family));
}

SyntheticFamily synthetic_family_from_string(const std::string& s) {
    if (s == "two_blob") return SyntheticFamily::two_blob;
    if (s == "sparse_ds1") return SyntheticFamily::sparse_ds1;
    if (s == "dense_ds2") return SyntheticFamily::dense_ds2;
    throw Error(ErrorKind::config, "unknown synthetic family: " + s);
}

std::string to_string(SyntheticFamily family) {
    switch (family) {
        case SyntheticFamily::two_blob: return "two_blob";
        case SyntheticFamily::sparse_ds1: return "sparse_ds1";
        case SyntheticFamily::dense_ds2: return "dense_ds2";
    }
    return "unknown";
}

}  // namespace pmi
