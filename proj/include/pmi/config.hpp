#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pmi/assembly.hpp"
#include "pmi/classifier.hpp"
#include "pmi/dataset.hpp"
#include "pmi/separation.hpp"

namespace pmi {

struct DatasetSource {
    enum class Kind { synthetic, file };
    Kind kind = Kind::synthetic;
    SyntheticFamily family = SyntheticFamily::two_blob;
    std::size_t n = 1000;
    std::string path;  // file source only
};

struct MlpSpec {
    int hidden = 16;
    int epochs = 200;
    double learning_rate = 0.05;
};

struct ClassifierSpec {
    enum class Kind { mlp, oracle };
    Kind kind = Kind::mlp;
    MlpSpec mlp;
    OracleSpec oracle = ConstantOracle{0};
};

// Every pipeline parameter in one declarative structure; round-trips
// through JSON losslessly. epsilon/bandwidth empty means auto-resolution
// (largest grid-friendly value under r_hat, cross-validated h).
struct RunConfig {
    DatasetSource dataset;
    double test_fraction = 0.2;
    ClassifierSpec classifier;
    std::optional<double> epsilon;
    std::optional<double> bandwidth;
    std::size_t samples_per_cell = 10000;
    int vote_n = 101;
    std::size_t bootstrap = 100;
    double alpha = 0.025;
    double topk_threshold = 0.99;
    std::size_t max_cells = 200000;
    RemainderPolicy remainder_policy = RemainderPolicy::worst_case;
    SeparationConvention epsilon_convention = SeparationConvention::r_hat;
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = all available cores
    std::string out_dir = "out";
};

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// range checks on every numeric field; throws a config error
void check_config(const RunConfig& config);

nlohmann::json oracle_to_json(const OracleSpec& spec);
OracleSpec oracle_from_json(const nlohmann::json& j);

}  // namespace pmi
