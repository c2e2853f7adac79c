#include "pmi/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmi/error.hpp"

namespace pmi {

namespace {
// Absolute snap tolerance on the quotient x/epsilon. Division noise is at
// most a few ulps (~1e-10 for quotients up to 10^6), while a genuine interior
// point would have to sit within 1e-9 * epsilon of a grid line to be
// misassigned. Snapping keeps decimal grid lines (0.5 / 0.004 = 125) on the
// mathematically correct side.
constexpr double kGridSnap = 1e-9;
}  // namespace

std::string to_string(const CellIndex& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < c.coords.size(); ++i) {
        if (i) os << ',';
        os << c.coords[i];
    }
    return os.str();
}

CellIndex cell_index_from_string(const std::string& s) {
    CellIndex c;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            c.coords.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw Error(ErrorKind::parse, "bad cell index: '" + s + "'");
        }
    }
    if (c.coords.empty()) throw Error(ErrorKind::parse, "empty cell index");
    return c;
}

std::size_t CellIndexHash::operator()(const CellIndex& c) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : c.coords) {
        h ^= static_cast<std::size_t>(static_cast<unsigned>(v)) + 0x9e3779b9ULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

GridPartition::GridPartition(int dimension, double cell_side)
    : dimension_(dimension), cell_side_(cell_side) {
    if (dimension < 1) throw Error(ErrorKind::argument, "dimension must be >= 1");
    if (!(cell_side > 0.0) || cell_side > 1.0)
        throw Error(ErrorKind::argument, "cell side must be in (0,1]");
    const double kf = 1.0 / cell_side;
    const double kr = std::round(kf);
    if (std::abs(kf - kr) <= kGridSnap * std::max(1.0, kf)) {
        cells_per_axis_ = static_cast<long long>(kr);
        integral_grid_ = true;
    } else {
        cells_per_axis_ = static_cast<long long>(std::ceil(kf));
        integral_grid_ = false;
    }
    cell_volume_ = std::pow(cell_side, dimension);
}

double GridPartition::total_cells() const {
    return std::pow(static_cast<double>(cells_per_axis_), dimension_);
}

CellIndex GridPartition::cell_of(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dimension_)
        throw Error(ErrorKind::argument, "point dimension mismatch");
    CellIndex c;
    c.coords.resize(dimension_);
    for (int j = 0; j < dimension_; ++j) {
        if (!(x[j] >= 0.0 && x[j] <= 1.0))
            throw Error(ErrorKind::domain, "point outside [0,1]^d");
        const double q = x[j] / cell_side_;
        const double qr = std::round(q);
        long long i = (std::abs(q - qr) <= kGridSnap) ? static_cast<long long>(qr)
                                                      : static_cast<long long>(std::floor(q));
        i = std::clamp(i, 0LL, cells_per_axis_ - 1);
        c.coords[j] = static_cast<int>(i);
    }
    return c;
}

std::vector<double> GridPartition::center_of(const CellIndex& c) const {
    if (!in_bounds(c)) throw Error(ErrorKind::argument, "cell index out of bounds");
    std::vector<double> center(dimension_);
    for (int j = 0; j < dimension_; ++j)
        center[j] = std::min(1.0, (c.coords[j] + 0.5) * cell_side_);
    return center;
}

void GridPartition::cell_box(const CellIndex& c, std::vector<double>& lo,
                             std::vector<double>& hi) const {
    if (!in_bounds(c)) throw Error(ErrorKind::argument, "cell index out of bounds");
    lo.resize(dimension_);
    hi.resize(dimension_);
    for (int j = 0; j < dimension_; ++j) {
        lo[j] = std::min(1.0, c.coords[j] * cell_side_);
        hi[j] = std::min(1.0, (c.coords[j] + 1) * cell_side_);
    }
}

bool GridPartition::in_bounds(const CellIndex& c) const {
    if (static_cast<int>(c.coords.size()) != dimension_) return false;
    for (int v : c.coords)
        if (v < 0 || v >= cells_per_axis_) return false;
    return true;
}

std::map<CellIndex, std::vector<std::size_t>> group_points(const GridPartition& p,
                                                           const LabeledDataset& ds) {
    if (ds.dimension != p.dimension())
        throw Error(ErrorKind::argument, "dataset dimension does not match partition");
    std::map<CellIndex, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.size(); ++i)
        groups[p.cell_of(ds.coords(i))].push_back(i);
    return groups;
}

}  // namespace pmi
