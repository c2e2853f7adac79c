#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pmi/config.hpp"
#include "pmi/report.hpp"

namespace pmi {

struct AssessResult {
    ReliabilityReport report;
    std::vector<CellAssessment> cells;
    std::string report_path;
    std::string cells_path;
};

// Full pipeline: dataset -> split -> classifier -> separation -> partition
// -> KDE -> rank -> per-cell assessment (parallel) -> assembly -> files.
// Cell assessments use per-cell RNG streams, so the numeric output is
// independent of the thread count.
AssessResult run_assess(const RunConfig& config);

// Dry-run diagnostics: epsilon vs the separation estimate, projected cell
// counts, KDE mass coverage, sampling budget. Returns printable lines,
// never throws for mere findings.
std::vector<std::string> run_validate(const RunConfig& config);

// Re-derives the density grid from the report's echoed config and dumps
// 2D plot data (density heat, lambda means, cell types) next to the report
// or into out_dir when given.
void run_export_plots(const std::string& report_path, const std::string& out_dir = "");

// the auto rule: largest 1/m strictly below the separation radius
double resolve_epsilon(const SeparationEstimate& est);

std::unique_ptr<Classifier> make_oracle_classifier(const OracleSpec& spec, int dim,
                                                   const std::vector<int>& dataset_classes);

extern const char* const kToolVersion;

}  // namespace pmi
