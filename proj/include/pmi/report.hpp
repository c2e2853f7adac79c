#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pmi/assembly.hpp"
#include "pmi/config.hpp"
#include "pmi/separation.hpp"

namespace pmi {

// Everything a run produces, a superset of the usual results-table columns.
// The echoed config plus the seed make the numeric content reproducible
// bit-for-bit; wall-clock figures live in a separate "timing" object so
// reproducibility checks can strip them.
struct ReliabilityReport {
    std::string tool_version;
    RunConfig config;

    std::string dataset_name;
    std::size_t n_points = 0;
    int dimension = 0;
    std::vector<int> classes;
    std::size_t train_size = 0;
    std::size_t test_size = 0;

    std::string classifier_kind;
    double train_error = 0.0;
    double test_error = 0.0;

    double d_min = 0.0;
    double r_hat = 0.0;
    std::vector<double> witness_a, witness_b;
    int witness_label_a = 0, witness_label_b = 0;
    bool epsilon_ok = false;
    double max_admissible_epsilon = 0.0;

    double epsilon = 0.0;
    long long cells_per_axis = 0;
    bool integral_grid = true;
    double cell_volume = 0.0;
    double total_cells = 0.0;

    double bandwidth = 0.0;
    bool bandwidth_auto = false;
    std::size_t bootstrap_replicas = 0;
    double op_mass_total = 0.0;
    double op_mass_covered = 0.0;

    std::size_t occupied_cells = 0;
    std::size_t occupied_normal = 0;
    std::size_t occupied_cross_boundary = 0;
    std::size_t assessed_cells = 0;
    std::size_t assessed_normal = 0;
    std::size_t assessed_empty = 0;
    std::size_t assessed_cross_boundary = 0;
    double min_vote_margin = 1.0;
    std::size_t tied_votes = 0;
    std::string cells_csv;

    ReliabilityEstimate estimate;
    ComparisonRow comparison;

    double wall_seconds = 0.0;
    double seconds_per_cell = 0.0;
    int threads_used = 1;
};

nlohmann::json report_to_json(const ReliabilityReport& report);

void write_report(const ReliabilityReport& report, const std::string& path);
nlohmann::json load_report_json(const std::string& path);

// cells.csv schema: cell_index,type,truth,lambda_mean,lambda_var,op_mean,op_var
// (the index is a quoted comma-joined tuple)
void write_cells_csv(const std::vector<CellAssessment>& cells, const std::string& path);

struct CellRow {
    CellIndex index;
    std::string type;
    int truth = -1;  // -1 when the cell has no assigned ground truth
    double lambda_mean = 0.0;
    double lambda_var = 0.0;
    double op_mean = 0.0;
    double op_var = 0.0;
};
std::vector<CellRow> read_cells_csv(const std::string& path);

}  // namespace pmi
