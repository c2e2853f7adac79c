// pmi — reliability assessment for classifiers: estimates the probability
// of misclassification per input with mean, variance and an upper
// confidence bound. Subcommands: assess, validate, export-plots.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pmi/error.hpp"
#include "pmi/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

pmi::RunConfig effective_config(const CommonArgs& args) {
    pmi::RunConfig config = pmi::load_config(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.threads >= 0) config.threads = args.threads;
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* config_opt =
        cmd->add_option("--config", args.config_path, "run configuration file (JSON)");
    if (needs_config) config_opt->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "global seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical reliability estimate (pmi) for a trained classifier"};
    app.require_subcommand(1);

    CommonArgs assess_args, validate_args;
    std::string report_path, plots_out;

    auto* assess = app.add_subcommand("assess", "run the full assessment pipeline");
    add_common(assess, assess_args, true);

    auto* validate = app.add_subcommand("validate", "dry-run configuration diagnostics");
    add_common(validate, validate_args, true);

    auto* export_plots =
        app.add_subcommand("export-plots", "regenerate 2D plot data from a report");
    export_plots->add_option("--report", report_path, "path to report.json")->required();
    export_plots->add_option("--out", plots_out, "output directory (default: report dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (assess->parsed()) {
            const auto result = pmi::run_assess(effective_config(assess_args));
            const auto& r = result.report;
            std::cout << "pmi mean:        " << r.estimate.mean << "\n"
                      << "pmi variance:    " << r.estimate.variance << "\n"
                      << "upper bound:     " << r.estimate.upper_bound << " (alpha="
                      << r.estimate.alpha << ")\n"
                      << "ACU:             " << r.estimate.acu << "\n"
                      << "test error:      " << r.test_error << "\n"
                      << "cells assessed:  " << r.assessed_cells << " ("
                      << r.estimate.op_mass_covered << " pooled OP mass)\n"
                      << "report:          " << result.report_path << "\n";
            if (!r.epsilon_ok)
                std::cerr << "warning: epsilon " << r.epsilon
                          << " exceeds the validated bound "
                          << r.max_admissible_epsilon << "\n";
        } else if (validate->parsed()) {
            for (const auto& line : pmi::run_validate(effective_config(validate_args)))
                std::cout << line << "\n";
        } else if (export_plots->parsed()) {
            pmi::run_export_plots(report_path, plots_out);
            std::cout << "plot data written\n";
        }
    } catch (const pmi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
