#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pmi/config.hpp"
#include "pmi/error.hpp"
#include "pmi/report.hpp"

using namespace pmi;
namespace fs = std::filesystem;

TEST_CASE("config json round-trip is lossless") {
    RunConfig c;
    c.dataset.family = SyntheticFamily::dense_ds2;
    c.dataset.n = 1234;
    c.test_fraction = 0.25;
    c.epsilon = 0.0123456789012345678;
    c.bandwidth = {};
    c.samples_per_cell = 777;
    c.vote_n = 51;
    c.bootstrap = 64;
    c.alpha = 0.0125;
    c.topk_threshold = 0.985;
    c.max_cells = 4242;
    c.remainder_policy = RemainderPolicy::empirical_mean;
    c.epsilon_convention = SeparationConvention::d_min;
    c.seed = 18446744073709551615ULL;  // uint64 max survives the trip
    c.threads = 3;
    c.out_dir = "elsewhere";

    const auto j1 = to_json(c);
    const auto c2 = config_from_json(j1);
    const auto j2 = to_json(c2);
    CHECK(j1 == j2);
    CHECK(c2.epsilon == c.epsilon);
    CHECK(c2.seed == c.seed);
    CHECK_FALSE(c2.bandwidth.has_value());
}

TEST_CASE("oracle specs round-trip") {
    for (const OracleSpec& spec :
         {OracleSpec{HalfplaneOracle{{0.5, -1.25}, 0.375}},
          OracleSpec{CheckerboardOracle{5}}, OracleSpec{ConstantOracle{2}},
          OracleSpec{NoisyRegionOracle{
              HalfplaneOracle{{1.0, 0.0}, 0.5}, {0.1, 0.1}, {0.2, 0.3}, 1}}}) {
        const auto j = oracle_to_json(spec);
        const auto back = oracle_from_json(j);
        CHECK(oracle_to_json(back) == j);
    }
}

TEST_CASE("config range checks") {
    RunConfig c;
    SUBCASE("alpha") {
        c.alpha = 0.5;
        CHECK_THROWS_AS(check_config(c), Error);
    }
    SUBCASE("vote_n parity") {
        c.vote_n = 100;
        CHECK_THROWS_AS(check_config(c), Error);
    }
    SUBCASE("samples floor") {
        c.samples_per_cell = 29;
        CHECK_THROWS_AS(check_config(c), Error);
    }
    SUBCASE("threshold") {
        c.topk_threshold = 0.0;
        CHECK_THROWS_AS(check_config(c), Error);
    }
    SUBCASE("epsilon accepts only a number or the auto keyword") {
        auto j = to_json(RunConfig{});
        j["epsilon"] = "automatic";
        CHECK_THROWS_AS((void)config_from_json(j), Error);
        j["epsilon"] = "auto";
        CHECK_FALSE(config_from_json(j).epsilon.has_value());
    }
    SUBCASE("error kind is config") {
        c.alpha = -1;
        try {
            check_config(c);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::config);
            CHECK(e.exit_code() == 2);
        }
    }
}

TEST_CASE("malformed config file") {
    const auto p = fs::temp_directory_path() / "bad_config.json";
    std::ofstream(p) << "{ not json";
    CHECK_THROWS_AS((void)load_config(p.string()), Error);
    try {
        (void)load_config(p.string());
    } catch (const Error& e) {
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("cells csv round-trip") {
    std::vector<CellAssessment> cells;
    CellAssessment a;
    a.index = CellIndex{{12, 87}};
    a.type = {CellKind::normal, 1, 1.0};
    a.lambda_mean = 0.12345678901234567;
    a.lambda_var = 1.2e-7;
    a.op.mean = 3.3e-5;
    a.op.variance = 4.4e-12;
    cells.push_back(a);
    CellAssessment b;
    b.index = CellIndex{{0, 3}};
    b.type = {CellKind::cross_boundary, -1, 0.0};
    b.lambda_mean = 1.0;
    b.op.mean = 0.5;
    cells.push_back(b);

    const auto path = (fs::temp_directory_path() / "cells_rt.csv").string();
    write_cells_csv(cells, path);
    const auto rows = read_cells_csv(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].index.coords == std::vector<int>{12, 87});
    CHECK(rows[0].type == "normal");
    CHECK(rows[0].truth == 1);
    CHECK(rows[0].lambda_mean == 0.12345678901234567);
    CHECK(rows[0].op_var == 4.4e-12);
    CHECK(rows[1].type == "cross_boundary");
    CHECK(rows[1].truth == -1);
    CHECK(rows[1].lambda_mean == 1.0);
}

TEST_CASE("report json carries a strippable timing block") {
    ReliabilityReport r;
    r.tool_version = "0.1.0";
    r.config = RunConfig{};
    r.wall_seconds = 123.456;
    auto j = report_to_json(r);
    REQUIRE(j.contains("timing"));
    j.erase("timing");

    ReliabilityReport r2 = r;
    r2.wall_seconds = 999.0;
    r2.seconds_per_cell = 77.0;
    r2.threads_used = 64;
    auto j2 = report_to_json(r2);
    j2.erase("timing");
    CHECK(j.dump(2) == j2.dump(2));
}
