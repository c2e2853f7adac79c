#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pmi/error.hpp"
#include "pmi/opmodel.hpp"
#include "pmi/partition.hpp"
#include "pmi/pipeline.hpp"

using namespace pmi;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string report_without_timing(const fs::path& p) {
    auto j = load_report_json(p.string());
    j.erase("timing");
    return j.dump(2);
}

RunConfig quick_config(std::uint64_t seed, const std::string& out) {
    RunConfig c;
    c.dataset.family = SyntheticFamily::two_blob;
    c.dataset.n = 400;
    c.classifier.mlp = {12, 60, 0.1};
    c.samples_per_cell = 100;
    c.vote_n = 11;
    c.bootstrap = 20;
    c.topk_threshold = 0.99;
    c.seed = seed;
    c.out_dir = out;
    return c;
}

}  // namespace

TEST_CASE("assess smoke: coverage and cell typing across seeds") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto dir = fresh_dir("pmi_smoke_" + std::to_string(seed));
        const auto result = run_assess(quick_config(seed, dir.string()));
        const auto& r = result.report;
        CHECK(r.op_mass_covered >= 0.95);
        CHECK(r.occupied_cross_boundary <= r.occupied_cells / 100);
        CHECK(r.estimate.upper_bound >= r.estimate.mean);
        CHECK(r.epsilon < r.r_hat);
        CHECK(fs::exists(result.report_path));
        CHECK(fs::exists(result.cells_path));
        CHECK(fs::exists(dir / "op_density.csv"));
    }
}

TEST_CASE("constant-majority oracle reproduces the grouped-cell closed form") {
    const auto dir = fresh_dir("pmi_oracle");
    RunConfig c = quick_config(5, dir.string());
    c.dataset.n = 300;
    c.classifier.kind = ClassifierSpec::Kind::oracle;
    c.classifier.oracle = ConstantOracle{0};
    c.epsilon = 0.05;
    c.bandwidth = 0.08;
    c.topk_threshold = 1.0;
    c.remainder_policy = RemainderPolicy::empirical_mean;
    const auto result = run_assess(c);

    // expected mean: pooled op of every cell whose truth cannot be 0
    const auto ds = generate_synthetic(SyntheticFamily::two_blob, 300, 5);
    GridPartition p(2, 0.05);
    std::vector<std::vector<double>> coords;
    for (const auto& pt : ds.points) coords.push_back(pt.x);
    const auto m = fit_kde(coords, 0.08, c.seed, c.bootstrap);
    double expected = 0.0;
    for (const auto& [cell, idxs] : group_points(p, ds)) {
        bool all_zero = true, mixed = false;
        const int first = ds.points[idxs.front()].label;
        for (std::size_t i : idxs) {
            if (ds.points[i].label != 0) all_zero = false;
            if (ds.points[i].label != first) mixed = true;
        }
        if (mixed || !all_zero) expected += m.pooled_op(p, cell).mean;
    }
    CHECK(result.report.estimate.mean ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("oversized epsilon proceeds with a flag and conservative cross cells") {
    const auto dir = fresh_dir("pmi_bigeps");
    RunConfig c = quick_config(21, dir.string());
    c.dataset.n = 600;
    c.epsilon = 0.2;  // far above the separation radius
    c.bandwidth = 0.08;
    const auto result = run_assess(c);
    CHECK_FALSE(result.report.epsilon_ok);
    CHECK(result.report.occupied_cross_boundary >= 1);
    bool found_conservative = false;
    for (const auto& cell : result.cells)
        if (cell.type.kind == CellKind::cross_boundary) {
            REQUIRE(cell.lambda_mean == 1.0);
            REQUIRE(cell.lambda_var == 0.0);
            found_conservative = true;
        }
    CHECK(found_conservative);
}

TEST_CASE("numeric output is independent of the thread count") {
    const auto dir1 = fresh_dir("pmi_t1");
    const auto dir4 = fresh_dir("pmi_t4");
    RunConfig c1 = quick_config(9, dir1.string());
    c1.dataset.n = 250;
    c1.threads = 1;
    RunConfig c4 = c1;
    c4.out_dir = dir4.string();
    c4.threads = 4;
    (void)run_assess(c1);
    (void)run_assess(c4);
    CHECK(slurp(dir1 / "cells.csv") == slurp(dir4 / "cells.csv"));

    auto j1 = load_report_json((dir1 / "report.json").string());
    auto j4 = load_report_json((dir4 / "report.json").string());
    j1.erase("timing");
    j4.erase("timing");
    // the echoed config differs only in the threads field, by construction
    j1.at("config").erase("threads");
    j4.at("config").erase("threads");
    j1.at("config").erase("out_dir");
    j4.at("config").erase("out_dir");
    CHECK(j1.dump(2) == j4.dump(2));
}

TEST_CASE("rerunning from the echoed config reproduces the report") {
    const auto dir1 = fresh_dir("pmi_echo1");
    const auto dir2 = fresh_dir("pmi_echo2");
    RunConfig c = quick_config(11, dir1.string());
    c.dataset.n = 250;
    (void)run_assess(c);

    auto echoed = config_from_json(
        load_report_json((dir1 / "report.json").string()).at("config"));
    echoed.out_dir = dir2.string();
    (void)run_assess(echoed);

    CHECK(slurp(dir1 / "cells.csv") == slurp(dir2 / "cells.csv"));
    auto j1 = load_report_json((dir1 / "report.json").string());
    auto j2 = load_report_json((dir2 / "report.json").string());
    j1.erase("timing");
    j2.erase("timing");
    j1.at("config").erase("out_dir");
    j2.at("config").erase("out_dir");
    CHECK(j1.dump(2) == j2.dump(2));
}

TEST_CASE("validate diagnostics") {
    SUBCASE("well-formed config summarizes ok") {
        RunConfig c = quick_config(3, "unused");
        const auto lines = run_validate(c);
        REQUIRE(!lines.empty());
        CHECK(lines.back() == "summary: ok");
    }
    SUBCASE("oversized epsilon warns with the admissible bound") {
        RunConfig c = quick_config(3, "unused");
        c.epsilon = 0.2;  // far above r_hat for this data
        const auto lines = run_validate(c);
        bool warned = false;
        for (const auto& l : lines)
            if (l.find("warning: epsilon") != std::string::npos &&
                l.find("max admissible") != std::string::npos)
                warned = true;
        CHECK(warned);
    }
    SUBCASE("high-dimensional grids trigger the cell-count warning") {
        // 8D two-point dataset, epsilon 0.1 -> 10^8 cells
        const auto dir = fresh_dir("pmi_highd");
        const auto csv = dir / "d8.csv";
        std::ofstream(csv) << "0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0\n"
                              "0.9,0.9,0.9,0.9,0.9,0.9,0.9,0.9,1\n"
                              "0.2,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0\n"
                              "0.8,0.9,0.9,0.9,0.9,0.9,0.9,0.9,1\n";
        RunConfig c;
        c.dataset.kind = DatasetSource::Kind::file;
        c.dataset.path = csv.string();
        c.test_fraction = 0.5;
        c.classifier.kind = ClassifierSpec::Kind::oracle;
        c.classifier.oracle = ConstantOracle{0};
        c.epsilon = 0.1;
        c.bandwidth = 0.2;
        const auto lines = run_validate(c);
        bool cell_warning = false;
        for (const auto& l : lines)
            if (l.find("exceeds the enumeration budget") != std::string::npos)
                cell_warning = true;
        CHECK(cell_warning);
    }
}

TEST_CASE("export-plots") {
    const auto dir = fresh_dir("pmi_plots");
    RunConfig c = quick_config(13, dir.string());
    c.dataset.n = 200;
    c.samples_per_cell = 50;
    (void)run_assess(c);

    SUBCASE("density grid matches fresh model queries bit-for-bit") {
        const auto exported = fresh_dir("pmi_plots_out");
        run_export_plots((dir / "report.json").string(), exported.string());
        CHECK(slurp(exported / "op_density.csv") == slurp(dir / "op_density.csv"));

        // one row per grid cell
        const auto j0 = load_report_json((dir / "report.json").string());
        const double total = j0.at("partition").at("total_cells").get<double>();
        const std::string grid = slurp(exported / "op_density.csv");
        const auto rows = std::count(grid.begin(), grid.end(), '\n') - 1;
        CHECK(static_cast<double>(rows) == total);

        // spot-check against direct density queries on a rebuilt model
        const auto j = load_report_json((dir / "report.json").string());
        const double eps = j.at("partition").at("epsilon").get<double>();
        const double h = j.at("opmodel").at("bandwidth").get<double>();
        const auto ds = generate_synthetic(SyntheticFamily::two_blob, 200, 13);
        std::vector<std::vector<double>> coords;
        for (const auto& pt : ds.points) coords.push_back(pt.x);
        const auto m = fit_kde(coords, h, 13, c.bootstrap);
        GridPartition p(2, eps);

        std::ifstream density_csv(exported / "op_density.csv");
        std::string line;
        std::getline(density_csv, line);  // header
        int checked = 0;
        while (std::getline(density_csv, line) && checked < 200) {
            std::stringstream ss(line);
            std::string f;
            std::getline(ss, f, ',');
            const int cx = std::stoi(f);
            std::getline(ss, f, ',');
            const int cy = std::stoi(f);
            std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            const double density = std::stod(f);
            REQUIRE(density == m.density(p.center_of(CellIndex{{cx, cy}})));
            ++checked;
        }
        CHECK(checked > 0);
    }
    SUBCASE("lambda heat values stay within [0,1]") {
        std::ifstream lambda_csv(dir / "lambda.csv");
        std::string line;
        std::getline(lambda_csv, line);
        int rows = 0;
        while (std::getline(lambda_csv, line)) {
            const auto pos = line.rfind(',');
            const double v = std::stod(line.substr(pos + 1));
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            ++rows;
        }
        CHECK(rows > 0);
    }
    SUBCASE("non-2d reports are rejected") {
        const auto dir1d = fresh_dir("pmi_1d");
        const auto csv = dir1d / "one.csv";
        std::ofstream out(csv);
        for (int i = 0; i < 20; ++i)
            out << 0.05 * i + 0.01 << ',' << (i < 10 ? 0 : 1) << '\n';
        out.close();
        RunConfig c1;
        c1.dataset.kind = DatasetSource::Kind::file;
        c1.dataset.path = csv.string();
        c1.classifier.kind = ClassifierSpec::Kind::oracle;
        c1.classifier.oracle = HalfplaneOracle{{1.0}, 0.51};
        c1.epsilon = 0.25;
        c1.bandwidth = 0.2;
        c1.samples_per_cell = 50;
        c1.vote_n = 11;
        c1.bootstrap = 10;
        c1.out_dir = (dir1d / "out").string();
        (void)run_assess(c1);
        try {
            run_export_plots((dir1d / "out" / "report.json").string());
            FAIL("expected unsupported-dimension error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::unsupported);
            CHECK(e.exit_code() == 2);
        }
    }
}

TEST_CASE("pipeline errors map to the documented exit codes") {
    SUBCASE("data errors exit 3") {
        RunConfig c;
        c.dataset.kind = DatasetSource::Kind::file;
        c.dataset.path = "/nonexistent/data.csv";
        try {
            (void)run_assess(c);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.exit_code() == 3);
            CHECK(std::string(e.what()).find("stage dataset") != std::string::npos);
        }
    }
    SUBCASE("config errors exit 2") {
        RunConfig c = quick_config(1, "unused");
        c.alpha = 0.9;
        try {
            (void)run_assess(c);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.exit_code() == 2);
        }
    }
    SUBCASE("numeric errors exit 4") {
        CHECK(Error(ErrorKind::divergence, "x").exit_code() == 4);
        CHECK(Error(ErrorKind::degenerate_density, "x").exit_code() == 4);
        CHECK(Error(ErrorKind::data_integrity, "x").exit_code() == 4);
    }
}
