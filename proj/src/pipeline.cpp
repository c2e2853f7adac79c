#include "pmi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pmi/astuteness.hpp"
#include "pmi/error.hpp"
#include "pmi/opmodel.hpp"
#include "pmi/partition.hpp"

namespace pmi {

const char* const kToolVersion = "0.1.0";

namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage ") + name + ": " + e.what());
    }
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    threads = std::min<int>(threads, static_cast<int>(count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    for (auto& th : pool) th.join();
}

LabeledDataset materialize_dataset(const RunConfig& config) {
    if (config.dataset.kind == DatasetSource::Kind::synthetic)
        return generate_synthetic(config.dataset.family, config.dataset.n, config.seed);
    return load_dataset(config.dataset.path);
}

std::vector<std::vector<double>> coordinates_of(const LabeledDataset& ds) {
    std::vector<std::vector<double>> coords;
    coords.reserve(ds.size());
    for (const auto& p : ds.points) coords.push_back(p.x);
    return coords;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Shared by assess, validate and export-plots: everything up to (and
// excluding) cell assessment.
struct ModelStack {
    LabeledDataset full;
    LabeledDataset train;
    LabeledDataset test;
    std::unique_ptr<Classifier> classifier;
    std::string classifier_kind;
    double train_error = 0.0;
    double test_error = 0.0;
    SeparationEstimate separation;
    double epsilon = 0.0;
    CellSizeCheck epsilon_check;
    std::unique_ptr<GridPartition> partition;
    std::unique_ptr<OpModel> opmodel;
};

ModelStack build_stack(const RunConfig& config, bool with_classifier,
                       std::optional<double> forced_epsilon = {},
                       std::optional<double> forced_bandwidth = {}) {
    ModelStack s;
    s.full = stage("dataset", [&] { return materialize_dataset(config); });
    auto parts = stage("split",
                       [&] { return split(s.full, config.test_fraction, config.seed); });
    s.train = std::move(parts.first);
    s.test = std::move(parts.second);

    if (with_classifier) {
        stage("train", [&] {
            if (config.classifier.kind == ClassifierSpec::Kind::mlp) {
                auto trained = train_mlp(s.train, config.classifier.mlp.hidden,
                                         config.classifier.mlp.epochs,
                                         config.classifier.mlp.learning_rate, config.seed);
                s.train_error = trained.train_error;
                s.classifier =
                    std::make_unique<MlpClassifier>(std::move(trained.model));
                s.classifier_kind = "mlp";
            } else {
                s.classifier = make_oracle_classifier(config.classifier.oracle,
                                                      s.full.dimension, s.full.classes);
                s.train_error = 1.0 - accuracy(*s.classifier, s.train);
                s.classifier_kind = "oracle";
            }
            s.test_error = 1.0 - accuracy(*s.classifier, s.test);
            return 0;
        });
    }

    s.separation = stage("separation", [&] { return estimate_r(s.full); });
    s.epsilon = config.epsilon ? *config.epsilon : resolve_epsilon(s.separation);
    if (forced_epsilon) s.epsilon = *forced_epsilon;
    s.epsilon_check =
        validate_cell_size(s.separation, s.epsilon, config.epsilon_convention);
    s.partition = stage("partition", [&] {
        return std::make_unique<GridPartition>(s.full.dimension, s.epsilon);
    });

    stage("opmodel", [&] {
        auto bw = forced_bandwidth ? forced_bandwidth : config.bandwidth;
        s.opmodel = std::make_unique<OpModel>(
            fit_kde(coordinates_of(s.full), bw, config.seed, config.bootstrap));
        return 0;
    });
    return s;
}

void write_plot_files(const GridPartition& p, const OpModel& m,
                      const std::vector<CellRow>& rows, const fs::path& dir) {
    {
        std::ofstream out(dir / "op_density.csv");
        if (!out) throw Error(ErrorKind::io, "cannot write op_density.csv");
        out << "cx,cy,center_x,center_y,density\n";
        const int k = static_cast<int>(p.cells_per_axis());
        CellIndex c;
        c.coords = {0, 0};
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                c.coords[0] = i;
                c.coords[1] = j;
                const auto center = p.center_of(c);
                out << i << ',' << j << ',' << fmt17(center[0]) << ',' << fmt17(center[1])
                    << ',' << fmt17(m.density(center)) << '\n';
            }
    }
    {
        std::ofstream out(dir / "lambda.csv");
        if (!out) throw Error(ErrorKind::io, "cannot write lambda.csv");
        out << "cx,cy,lambda_mean\n";
        for (const auto& row : rows)
            out << row.index.coords[0] << ',' << row.index.coords[1] << ','
                << fmt17(row.lambda_mean) << '\n';
    }
    {
        std::ofstream out(dir / "cell_types.csv");
        if (!out) throw Error(ErrorKind::io, "cannot write cell_types.csv");
        out << "cx,cy,type,truth\n";
        for (const auto& row : rows) {
            out << row.index.coords[0] << ',' << row.index.coords[1] << ',' << row.type
                << ',';
            if (row.truth >= 0) out << row.truth;
            out << '\n';
        }
    }
}

std::vector<CellRow> rows_from_assessments(const std::vector<CellAssessment>& cells) {
    std::vector<CellRow> rows;
    rows.reserve(cells.size());
    for (const auto& c : cells) {
        CellRow row;
        row.index = c.index;
        row.type = to_string(c.type.kind);
        row.truth = c.type.kind == CellKind::cross_boundary ? -1 : c.type.label;
        row.lambda_mean = c.lambda_mean;
        row.lambda_var = c.lambda_var;
        row.op_mean = c.op.mean;
        row.op_var = c.op.variance;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

double resolve_epsilon(const SeparationEstimate& est) {
    if (!(est.r_hat > 0.0))
        throw Error(ErrorKind::data_integrity, "separation radius is not positive");
    const double m = std::floor(1.0 / est.r_hat) + 1.0;
    return 1.0 / m;
}

std::unique_ptr<Classifier> make_oracle_classifier(
    const OracleSpec& spec, int dim, const std::vector<int>& dataset_classes) {
    std::set<int> classes(dataset_classes.begin(), dataset_classes.end());
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, ConstantOracle>) {
                classes.insert(o.label);
            } else if constexpr (std::is_same_v<T, NoisyRegionOracle>) {
                classes.insert(o.flip_label);
                if (const auto* c = std::get_if<ConstantOracle>(&o.base))
                    classes.insert(c->label);
                else
                    classes.insert({0, 1});
            } else {
                classes.insert({0, 1});
            }
        },
        spec);
    return std::make_unique<OracleClassifier>(
        spec, dim, std::vector<int>(classes.begin(), classes.end()));
}

AssessResult run_assess(const RunConfig& config) {
    check_config(config);
    const auto t_start = std::chrono::steady_clock::now();
    const int threads = resolve_threads(config.threads);

    ModelStack s = build_stack(config, /*with_classifier=*/true);
    const GridPartition& partition = *s.partition;
    const OpModel& opmodel = *s.opmodel;

    auto groups = stage("group", [&] { return group_points(partition, s.full); });

    // means-only ranking; each assessed cell pulls its full op estimate
    // (including the bootstrap variance) lazily in the parallel phase
    auto ranked = stage("rank", [&] {
        return opmodel.rank_scan(partition, config.topk_threshold, config.max_cells);
    });

    const auto t_assess = std::chrono::steady_clock::now();
    std::vector<CellAssessment> cells(ranked.cells.size());
    stage("assess", [&] {
        std::atomic<bool> failed{false};
        std::string first_error;
        ErrorKind first_kind = ErrorKind::data_integrity;
        std::mutex error_mutex;
        parallel_for(ranked.cells.size(), threads, [&](std::size_t i) {
            if (failed.load(std::memory_order_relaxed)) return;
            try {
                const CellIndex& c = ranked.cells[i].second;
                std::vector<LabeledPoint> in_cell;
                if (auto it = groups.find(c); it != groups.end())
                    for (std::size_t idx : it->second) in_cell.push_back(s.full.points[idx]);
                cells[i] = assess_cell(*s.classifier, in_cell, partition, c, opmodel,
                                       config.samples_per_cell, config.vote_n,
                                       config.seed);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) {
                    first_error = e.what();
                    if (const auto* err = dynamic_cast<const Error*>(&e))
                        first_kind = err->kind();
                }
            }
        });
        if (failed) throw Error(first_kind, first_error);
        return 0;
    });
    const double assess_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_assess)
            .count();

    const double remainder_mass =
        std::max(0.0, ranked.op_mass_total - ranked.op_mass_covered);
    auto estimate = stage("assemble", [&] {
        return assemble(cells, config.alpha, remainder_mass, config.remainder_policy);
    });

    ReliabilityReport r;
    r.tool_version = kToolVersion;
    r.config = config;
    r.dataset_name = s.full.name;
    r.n_points = s.full.size();
    r.dimension = s.full.dimension;
    r.classes = s.full.classes;
    r.train_size = s.train.size();
    r.test_size = s.test.size();
    r.classifier_kind = s.classifier_kind;
    r.train_error = s.train_error;
    r.test_error = s.test_error;
    r.d_min = s.separation.d_min;
    r.r_hat = s.separation.r_hat;
    r.witness_a = s.separation.witness_a.x;
    r.witness_b = s.separation.witness_b.x;
    r.witness_label_a = s.separation.witness_a.label;
    r.witness_label_b = s.separation.witness_b.label;
    r.epsilon_ok = s.epsilon_check.ok;
    r.max_admissible_epsilon = s.epsilon_check.max_admissible;
    r.epsilon = s.epsilon;
    r.cells_per_axis = partition.cells_per_axis();
    r.integral_grid = partition.integral_grid();
    r.cell_volume = partition.cell_volume();
    r.total_cells = partition.total_cells();
    r.bandwidth = opmodel.bandwidth();
    r.bandwidth_auto = opmodel.bandwidth_was_auto();
    r.bootstrap_replicas = opmodel.replicas();
    r.op_mass_total = ranked.op_mass_total;
    r.op_mass_covered = ranked.op_mass_covered;

    r.occupied_cells = groups.size();
    for (const auto& [cell, idxs] : groups) {
        const int first = s.full.points[idxs.front()].label;
        const bool mixed = std::any_of(idxs.begin(), idxs.end(), [&](std::size_t i) {
            return s.full.points[i].label != first;
        });
        mixed ? ++r.occupied_cross_boundary : ++r.occupied_normal;
    }
    r.assessed_cells = cells.size();
    for (const auto& c : cells) {
        switch (c.type.kind) {
            case CellKind::normal: ++r.assessed_normal; break;
            case CellKind::empty:
                ++r.assessed_empty;
                r.min_vote_margin = std::min(r.min_vote_margin, c.type.vote_margin);
                if (c.type.vote_margin <= 0.5) ++r.tied_votes;
                break;
            case CellKind::cross_boundary: ++r.assessed_cross_boundary; break;
        }
    }
    r.cells_csv = "cells.csv";
    r.estimate = estimate;
    r.comparison = compare_metrics(s.test_error, estimate);
    r.threads_used = threads;
    r.seconds_per_cell =
        assess_seconds / static_cast<double>(std::max<std::size_t>(1, cells.size()));

    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory: " + config.out_dir);

    AssessResult result;
    result.cells_path = (dir / "cells.csv").string();
    write_cells_csv(cells, result.cells_path);
    save_dataset(s.full, (dir / "dataset.csv").string());
    if (s.classifier_kind == "mlp")
        save_mlp(static_cast<const MlpClassifier&>(*s.classifier),
                 (dir / "model.txt").string());
    if (s.full.dimension == 2)
        write_plot_files(partition, opmodel, rows_from_assessments(cells), dir);

    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.report_path = (dir / "report.json").string();
    write_report(r, result.report_path);
    result.report = std::move(r);
    result.cells = std::move(cells);
    return result;
}

std::vector<std::string> run_validate(const RunConfig& config) {
    check_config(config);
    std::vector<std::string> lines;
    auto ok = [&](const std::string& m) { lines.push_back("ok: " + m); };
    auto warn = [&](const std::string& m) { lines.push_back("warning: " + m); };

    ModelStack s = build_stack(config, /*with_classifier=*/false);
    std::ostringstream os;
    os << "dataset '" << s.full.name << "': " << s.full.size() << " points, d="
       << s.full.dimension << ", " << s.full.classes.size() << " classes";
    ok(os.str());
    ok("split: " + std::to_string(s.train.size()) + " train / " +
       std::to_string(s.test.size()) + " test");
    ok("separation: d_min=" + fmt17(s.separation.d_min) +
       ", r_hat=" + fmt17(s.separation.r_hat));

    if (s.epsilon_check.ok) {
        ok("epsilon " + fmt17(s.epsilon) + " < " + fmt17(s.epsilon_check.max_admissible));
    } else {
        warn("epsilon " + fmt17(s.epsilon) + " is too large; max admissible is " +
             fmt17(s.epsilon_check.max_admissible) +
             " (cross-boundary cells become likely)");
    }

    const GridPartition& p = *s.partition;
    os.str("");
    os << "grid: " << p.cells_per_axis() << " cells per axis, " << p.total_cells()
       << " total";
    ok(os.str());
    if (!p.integral_grid())
        warn("1/epsilon is not integral; the last cell per axis is truncated");
    constexpr double kCellBudget = 1e7;
    if (p.total_cells() > kCellBudget) {
        os.str("");
        os << "projected cell count " << p.total_cells() << " exceeds the enumeration budget "
           << kCellBudget << "; only occupied cells and their neighbors would be ranked";
        warn(os.str());
    }

    ok("bandwidth: " + fmt17(s.opmodel->bandwidth()) +
       (s.opmodel->bandwidth_was_auto() ? " (cross-validated)" : " (explicit)"));

    if (s.full.dimension <= 3 && p.total_cells() <= kCellBudget) {
        const double mass = pooled_mass_total(*s.opmodel, p);
        if (mass < 0.95 || mass > 1.01)
            warn("pooled OP mass over the grid is " + fmt17(mass) +
                 "; expected [0.95, 1.01] for well-contained data");
        else
            ok("pooled OP mass over the grid: " + fmt17(mass));

        auto ranked = s.opmodel->rank_scan(p, config.topk_threshold, config.max_cells);
        os.str("");
        os << "top-k assessment would touch " << ranked.cells.size() << " cells ("
           << fmt17(ranked.op_mass_covered) << " of " << fmt17(ranked.op_mass_total)
           << " pooled mass), about "
           << static_cast<double>(ranked.cells.size()) *
                  static_cast<double>(config.samples_per_cell)
           << " model queries";
        ok(os.str());
    } else {
        warn("skipping KDE mass and ranking preview (dimension or grid too large)");
    }

    std::size_t warning_count = 0;
    for (const auto& l : lines)
        if (l.rfind("warning:", 0) == 0) ++warning_count;
    lines.push_back(warning_count == 0 ? "summary: ok"
                                       : "summary: " + std::to_string(warning_count) +
                                             " warning(s)");
    return lines;
}

void run_export_plots(const std::string& report_path, const std::string& out_dir) {
    const auto j = load_report_json(report_path);
    RunConfig config;
    double epsilon = 0.0, bandwidth = 0.0;
    int dimension = 0;
    try {
        config = config_from_json(j.at("config"));
        epsilon = j.at("partition").at("epsilon").get<double>();
        bandwidth = j.at("opmodel").at("bandwidth").get<double>();
        dimension = j.at("dataset").at("dimension").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse,
                    report_path + ": missing report fields: " + e.what());
    }
    if (dimension != 2)
        throw Error(ErrorKind::unsupported,
                    "plot export supports 2D runs only (report has d=" +
                        std::to_string(dimension) + ")");

    const fs::path report_dir = fs::path(report_path).parent_path();
    const fs::path cells_path =
        report_dir / j.at("cells").at("csv").get<std::string>();
    auto rows = read_cells_csv(cells_path.string());

    // deterministic rebuild of the fitted model at the resolved parameters
    ModelStack s = build_stack(config, /*with_classifier=*/false, epsilon, bandwidth);

    fs::path dir = out_dir.empty() ? report_dir : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory: " + dir.string());
    write_plot_files(*s.partition, *s.opmodel, rows, dir);
}

}  // namespace pmi
