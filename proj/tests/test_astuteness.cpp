#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmi/astuteness.hpp"
#include "pmi/error.hpp"

using namespace pmi;

namespace {

OpModel tiny_opmodel() { return fit_kde({{0.3, 0.4}, {0.6, 0.5}}, 0.2, 1, 10); }

}  // namespace

TEST_CASE("cell typing") {
    GridPartition p(2, 0.1);
    const CellIndex c{{3, 4}};
    OracleClassifier constant_b(ConstantOracle{1}, 2, {0, 1});

    SUBCASE("uniformly labeled points make a normal cell") {
        std::vector<LabeledPoint> pts = {{{0.31, 0.41}, 0}, {{0.33, 0.44}, 0},
                                         {{0.39, 0.49}, 0}};
        const auto type = type_cell(pts, constant_b, p, c, 11, 1);
        CHECK(type.kind == CellKind::normal);
        CHECK(type.label == 0);
        CHECK(type.vote_margin == 1.0);
    }
    SUBCASE("mixed labels make a cross-boundary cell") {
        std::vector<LabeledPoint> pts = {{{0.31, 0.41}, 0}, {{0.33, 0.44}, 1}};
        CHECK(type_cell(pts, constant_b, p, c, 11, 1).kind == CellKind::cross_boundary);
    }
    SUBCASE("empty cell votes with the model") {
        const auto type = type_cell({}, constant_b, p, c, 101, 1);
        CHECK(type.kind == CellKind::empty);
        CHECK(type.label == 1);
        CHECK(type.vote_margin == 1.0);
    }
    SUBCASE("a bisecting model leaves a split vote, ties resolve low") {
        // halfplane through the cell center: votes split near 50/50
        OracleClassifier half(HalfplaneOracle{{1.0, 0.0}, 0.35}, 2, {0, 1});
        const auto type = type_cell({}, half, p, c, 101, 7);
        CHECK(type.kind == CellKind::empty);
        CHECK(type.vote_margin > 0.5 - 1e-12);
        CHECK(type.vote_margin < 0.7);
    }
    SUBCASE("even vote_n is rejected") {
        CHECK_THROWS_AS((void)type_cell({}, constant_b, p, c, 100, 1), Error);
    }
    SUBCASE("vote stream is independent of processing order") {
        const auto a = type_cell({}, constant_b, p, CellIndex{{7, 2}}, 101, 9);
        (void)type_cell({}, constant_b, p, CellIndex{{1, 1}}, 101, 9);
        const auto b = type_cell({}, constant_b, p, CellIndex{{7, 2}}, 101, 9);
        CHECK(a.vote_margin == b.vote_margin);
        CHECK(a.label == b.label);
    }
}

TEST_CASE("monte carlo unastuteness estimator") {
    GridPartition p(2, 0.1);
    const CellIndex c{{3, 4}};  // box [0.3,0.4] x [0.4,0.5]

    SUBCASE("perfect model in the cell") {
        OracleClassifier constant(ConstantOracle{0}, 2, {0, 1});
        const auto est = estimate_unastuteness(constant, p, c, 0, 1000, 5);
        CHECK(est.mean == 0.0);
        CHECK(est.variance == 0.0);
        CHECK(est.samples_used == 1000);
    }
    SUBCASE("bisecting halfplane lands near one half") {
        OracleClassifier half(HalfplaneOracle{{1.0, 0.0}, 0.35}, 2, {0, 1});
        const std::size_t n = 10000;
        const auto est = estimate_unastuteness(half, p, c, 0, n, 11);
        const double sigma = std::sqrt(0.25 / static_cast<double>(n));
        CHECK(std::abs(est.mean - 0.5) <= 3 * sigma);
        CHECK(est.variance == doctest::Approx(est.mean * (1 - est.mean) / (n - 1)));
    }
    SUBCASE("flipped sub-box of a tenth of the volume lands near 0.1") {
        OracleClassifier noisy(
            NoisyRegionOracle{ConstantOracle{0}, {0.30, 0.40}, {0.35, 0.42}, 1}, 2,
            {0, 1});
        const std::size_t n = 10000;
        const auto est = estimate_unastuteness(noisy, p, c, 0, n, 23);
        const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
        CHECK(std::abs(est.mean - 0.1) <= 3 * sigma);
    }
    SUBCASE("preconditions") {
        OracleClassifier constant(ConstantOracle{0}, 2, {0, 1});
        CHECK_THROWS_AS((void)estimate_unastuteness(constant, p, c, 0, 29, 1), Error);
        CHECK_THROWS_AS((void)estimate_unastuteness(constant, p, c, 9, 100, 1), Error);
    }
    SUBCASE("variance respects the Bernoulli bound") {
        OracleClassifier half(HalfplaneOracle{{1.0, 1.0}, 0.77}, 2, {0, 1});
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto est = estimate_unastuteness(half, p, c, 0, 500, seed);
            REQUIRE(est.mean >= 0.0);
            REQUIRE(est.mean <= 1.0);
            REQUIRE(est.variance <= 0.25 / 500 + 1e-6);
        }
    }
}

TEST_CASE("estimator calibration against the analytic half") {
    GridPartition p(2, 0.1);
    const CellIndex c{{3, 4}};
    OracleClassifier half(HalfplaneOracle{{1.0, 0.0}, 0.35}, 2, {0, 1});

    const int runs = 500;
    const std::size_t n = 1000;
    double mean_of_means = 0.0;
    double mean_reported_var = 0.0;
    std::vector<double> means;
    int covered = 0;
    for (int r = 0; r < runs; ++r) {
        const auto est = estimate_unastuteness(half, p, c, 0, n, 10'000 + r);
        means.push_back(est.mean);
        mean_of_means += est.mean;
        mean_reported_var += est.variance;
        if (std::abs(est.mean - 0.5) <= 1.96 * std::sqrt(est.variance)) ++covered;
    }
    mean_of_means /= runs;
    mean_reported_var /= runs;

    SUBCASE("unbiasedness") { CHECK(std::abs(mean_of_means - 0.5) < 0.01); }
    SUBCASE("reported variance tracks the empirical one") {
        double empirical = 0.0;
        for (double m : means) empirical += (m - mean_of_means) * (m - mean_of_means);
        empirical /= (runs - 1);
        CHECK(empirical < 1.5 * mean_reported_var);
        CHECK(empirical > mean_reported_var / 1.5);
    }
    SUBCASE("confidence interval coverage") {
        CHECK(covered >= static_cast<int>(0.90 * runs));
    }
}

TEST_CASE("1d cells match exhaustive quadrature") {
    GridPartition p(1, 0.25);
    OracleClassifier half(HalfplaneOracle{{1.0}, 0.6}, 1, {0, 1});
    // truth 0 everywhere: misclassified where x >= 0.6
    const double expected[4] = {0.0, 0.0, 0.6, 1.0};
    for (int cell = 0; cell < 4; ++cell) {
        const double lo = cell * 0.25, hi = (cell + 1) * 0.25;
        const double quad = oracles::fraction_where_1d(
            lo, hi, 100000, [](double x) { return x >= 0.6; });
        REQUIRE(quad == doctest::Approx(expected[cell]).epsilon(1e-4));
        const auto est =
            estimate_unastuteness(half, p, CellIndex{{cell}}, 0, 10000, 3);
        const double sigma =
            std::sqrt(std::max(1e-12, quad * (1 - quad)) / 10000.0);
        REQUIRE(std::abs(est.mean - quad) <= std::max(3 * sigma, 1e-3));
    }
}

TEST_CASE("full cell assessment") {
    GridPartition p(2, 0.1);
    const CellIndex c{{3, 4}};
    const auto op = tiny_opmodel();

    SUBCASE("cross-boundary is conservatively one") {
        OracleClassifier constant(ConstantOracle{0}, 2, {0, 1});
        std::vector<LabeledPoint> pts = {{{0.31, 0.41}, 0}, {{0.32, 0.42}, 1}};
        const auto cell = assess_cell(constant, pts, p, c, op, 100, 11, 1);
        CHECK(cell.type.kind == CellKind::cross_boundary);
        CHECK(cell.lambda_mean == 1.0);
        CHECK(cell.lambda_var == 0.0);
        CHECK(cell.samples_used == 0);
    }
    SUBCASE("normal cell with a perfect model") {
        OracleClassifier constant(ConstantOracle{0}, 2, {0, 1});
        std::vector<LabeledPoint> pts = {{{0.31, 0.41}, 0}};
        const auto cell = assess_cell(constant, pts, p, c, op, 100, 11, 1);
        CHECK(cell.type.kind == CellKind::normal);
        CHECK(cell.lambda_mean == 0.0);
        CHECK(cell.op.mean > 0.0);
    }
    SUBCASE("empty cell assessed against its own vote is consistent") {
        OracleClassifier constant(ConstantOracle{1}, 2, {0, 1});
        const auto cell = assess_cell(constant, {}, p, c, op, 100, 11, 1);
        CHECK(cell.type.kind == CellKind::empty);
        CHECK(cell.type.label == 1);
        CHECK(cell.lambda_mean == 0.0);
    }
    SUBCASE("deterministic regardless of assessment order") {
        OracleClassifier half(HalfplaneOracle{{1.0, 0.0}, 0.35}, 2, {0, 1});
        const auto a = assess_cell(half, {}, p, c, op, 500, 11, 42);
        (void)assess_cell(half, {}, p, CellIndex{{1, 2}}, op, 500, 11, 42);
        const auto b = assess_cell(half, {}, p, c, op, 500, 11, 42);
        CHECK(a.lambda_mean == b.lambda_mean);
        CHECK(a.lambda_var == b.lambda_var);
        CHECK(a.op.mean == b.op.mean);
        CHECK(a.op.variance == b.op.variance);
    }
}
