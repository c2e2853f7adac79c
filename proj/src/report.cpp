#include "pmi/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmi/error.hpp"

namespace pmi {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

json report_to_json(const ReliabilityReport& r) {
    json j;
    j["tool"] = {{"name", "pmi"}, {"version", r.tool_version}};
    j["config"] = to_json(r.config);
    j["dataset"] = {{"name", r.dataset_name},   {"points", r.n_points},
                    {"dimension", r.dimension}, {"classes", r.classes},
                    {"train_size", r.train_size}, {"test_size", r.test_size}};
    j["classifier"] = {{"kind", r.classifier_kind},
                       {"train_error", r.train_error},
                       {"test_error", r.test_error}};
    j["separation"] = {{"d_min", r.d_min},
                       {"r_hat", r.r_hat},
                       {"witness", {r.witness_a, r.witness_b}},
                       {"witness_labels", {r.witness_label_a, r.witness_label_b}},
                       {"epsilon_ok", r.epsilon_ok},
                       {"max_admissible_epsilon", r.max_admissible_epsilon}};
    j["partition"] = {{"epsilon", r.epsilon},
                      {"cells_per_axis", r.cells_per_axis},
                      {"integral_grid", r.integral_grid},
                      {"cell_volume", r.cell_volume},
                      {"total_cells", r.total_cells}};
    j["opmodel"] = {{"bandwidth", r.bandwidth},
                    {"bandwidth_auto", r.bandwidth_auto},
                    {"bootstrap_replicas", r.bootstrap_replicas},
                    {"op_mass_total", r.op_mass_total},
                    {"op_mass_covered", r.op_mass_covered}};
    j["cells"] = {{"occupied", r.occupied_cells},
                  {"occupied_normal", r.occupied_normal},
                  {"occupied_cross_boundary", r.occupied_cross_boundary},
                  {"assessed", r.assessed_cells},
                  {"assessed_normal", r.assessed_normal},
                  {"assessed_empty", r.assessed_empty},
                  {"assessed_cross_boundary", r.assessed_cross_boundary},
                  {"min_vote_margin", r.min_vote_margin},
                  {"tied_votes", r.tied_votes},
                  {"csv", r.cells_csv}};
    j["estimate"] = {{"mean", r.estimate.mean},
                     {"variance", r.estimate.variance},
                     {"upper_bound", r.estimate.upper_bound},
                     {"alpha", r.estimate.alpha},
                     {"acu", r.estimate.acu},
                     {"cells_assessed", r.estimate.cells_assessed},
                     {"op_mass_covered", r.estimate.op_mass_covered},
                     {"remainder_mass", r.estimate.remainder_mass},
                     {"remainder_policy", to_string(r.estimate.remainder_policy)}};
    j["comparison"] = {{"test_error", r.comparison.test_error},
                       {"acu", r.comparison.acu},
                       {"mean", r.comparison.mean},
                       {"variance", r.comparison.variance},
                       {"upper_bound", r.comparison.upper_bound},
                       {"acu_below_test_error", r.comparison.acu_below_test_error},
                       {"mean_above_acu", r.comparison.mean_above_acu},
                       {"mean_below_test_error", r.comparison.mean_below_test_error},
                       {"mean_between", r.comparison.mean_between}};
    j["timing"] = {{"wall_seconds", r.wall_seconds},
                   {"seconds_per_cell", r.seconds_per_cell},
                   {"threads", r.threads_used}};
    return j;
}

void write_report(const ReliabilityReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write report: " + path);
    out << report_to_json(report).dump(2) << '\n';
}

json load_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open report: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, path + ": " + e.what());
    }
    return j;
}

void write_cells_csv(const std::vector<CellAssessment>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write cell table: " + path);
    out << "cell_index,type,truth,lambda_mean,lambda_var,op_mean,op_var\n";
    for (const auto& cell : cells) {
        out << '"' << to_string(cell.index) << "\"," << to_string(cell.type.kind) << ',';
        if (cell.type.kind != CellKind::cross_boundary) out << cell.type.label;
        out << ',' << fmt17(cell.lambda_mean) << ',' << fmt17(cell.lambda_var) << ','
            << fmt17(cell.op.mean) << ',' << fmt17(cell.op.variance) << '\n';
    }
}

std::vector<CellRow> read_cells_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open cell table: " + path);
    std::vector<CellRow> rows;
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() != '"')
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(line_no) + ": missing cell index");
        const std::size_t close = line.find('"', 1);
        if (close == std::string::npos)
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(line_no) + ": unterminated index");
        CellRow row;
        row.index = cell_index_from_string(line.substr(1, close - 1));
        std::stringstream rest(line.substr(close + 2));
        std::string f;
        std::getline(rest, row.type, ',');
        std::getline(rest, f, ',');
        row.truth = f.empty() ? -1 : std::stoi(f);
        std::getline(rest, f, ',');
        row.lambda_mean = std::stod(f);
        std::getline(rest, f, ',');
        row.lambda_var = std::stod(f);
        std::getline(rest, f, ',');
        row.op_mean = std::stod(f);
        std::getline(rest, f, ',');
        row.op_var = std::stod(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace pmi
