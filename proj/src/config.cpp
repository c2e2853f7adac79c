#include "pmi/config.hpp"

#include <fstream>

#include "pmi/error.hpp"

namespace pmi {

using nlohmann::json;

namespace {

json base_oracle_to_json(const BaseOracle& base) {
    return std::visit(
        [](const auto& o) -> json {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, HalfplaneOracle>) {
                return {{"kind", "halfplane"}, {"normal", o.normal}, {"offset", o.offset}};
            } else if constexpr (std::is_same_v<T, CheckerboardOracle>) {
                return {{"kind", "checkerboard"}, {"tiles", o.tiles}};
            } else {
                return {{"kind", "constant"}, {"label", o.label}};
            }
        },
        base);
}

BaseOracle base_oracle_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "halfplane")
        return HalfplaneOracle{j.at("normal").get<std::vector<double>>(),
                               j.at("offset").get<double>()};
    if (kind == "checkerboard") return CheckerboardOracle{j.at("tiles").get<int>()};
    if (kind == "constant") return ConstantOracle{j.at("label").get<int>()};
    throw Error(ErrorKind::config, "unknown oracle kind: " + kind);
}

template <typename T>
T field(const json& j, const char* name, T fallback) {
    if (auto it = j.find(name); it != j.end()) return it->get<T>();
    return fallback;
}

}  // namespace

json oracle_to_json(const OracleSpec& spec) {
    if (const auto* noisy = std::get_if<NoisyRegionOracle>(&spec)) {
        return {{"kind", "noisy_region"},
                {"base", base_oracle_to_json(noisy->base)},
                {"box_lo", noisy->box_lo},
                {"box_hi", noisy->box_hi},
                {"flip_label", noisy->flip_label}};
    }
    return std::visit(
        [](const auto& o) -> json {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, NoisyRegionOracle>) {
                return json{};  // unreachable
            } else {
                return base_oracle_to_json(BaseOracle{o});
            }
        },
        spec);
}

OracleSpec oracle_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "noisy_region") {
        NoisyRegionOracle o;
        o.base = base_oracle_from_json(j.at("base"));
        o.box_lo = j.at("box_lo").get<std::vector<double>>();
        o.box_hi = j.at("box_hi").get<std::vector<double>>();
        o.flip_label = j.at("flip_label").get<int>();
        return o;
    }
    BaseOracle base = base_oracle_from_json(j);
    return std::visit([](auto o) -> OracleSpec { return o; }, base);
}

json to_json(const RunConfig& c) {
    json dataset;
    if (c.dataset.kind == DatasetSource::Kind::synthetic) {
        dataset = {{"source", "synthetic"},
                   {"family", to_string(c.dataset.family)},
                   {"n", c.dataset.n}};
    } else {
        dataset = {{"source", "file"}, {"path", c.dataset.path}};
    }

    json classifier;
    if (c.classifier.kind == ClassifierSpec::Kind::mlp) {
        classifier = {{"kind", "mlp"},
                      {"hidden", c.classifier.mlp.hidden},
                      {"epochs", c.classifier.mlp.epochs},
                      {"learning_rate", c.classifier.mlp.learning_rate}};
    } else {
        classifier = {{"kind", "oracle"}, {"oracle", oracle_to_json(c.classifier.oracle)}};
    }

    return {{"dataset", dataset},
            {"test_fraction", c.test_fraction},
            {"classifier", classifier},
            {"epsilon", c.epsilon ? json(*c.epsilon) : json("auto")},
            {"bandwidth", c.bandwidth ? json(*c.bandwidth) : json("auto")},
            {"samples_per_cell", c.samples_per_cell},
            {"vote_n", c.vote_n},
            {"bootstrap", c.bootstrap},
            {"alpha", c.alpha},
            {"top_k", {{"threshold", c.topk_threshold}, {"max_cells", c.max_cells}}},
            {"remainder_policy", to_string(c.remainder_policy)},
            {"validate_epsilon_against",
             c.epsilon_convention == SeparationConvention::r_hat ? "r_hat" : "d_min"},
            {"seed", c.seed},
            {"threads", c.threads},
            {"out_dir", c.out_dir}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    try {
        const json& ds = j.at("dataset");
        const std::string source = ds.at("source").get<std::string>();
        if (source == "synthetic") {
            c.dataset.kind = DatasetSource::Kind::synthetic;
            c.dataset.family =
                synthetic_family_from_string(ds.at("family").get<std::string>());
            c.dataset.n = ds.at("n").get<std::size_t>();
        } else if (source == "file") {
            c.dataset.kind = DatasetSource::Kind::file;
            c.dataset.path = ds.at("path").get<std::string>();
        } else {
            throw Error(ErrorKind::config, "unknown dataset source: " + source);
        }

        c.test_fraction = field(j, "test_fraction", c.test_fraction);

        if (auto it = j.find("classifier"); it != j.end()) {
            const std::string kind = it->at("kind").get<std::string>();
            if (kind == "mlp") {
                c.classifier.kind = ClassifierSpec::Kind::mlp;
                c.classifier.mlp.hidden = field(*it, "hidden", c.classifier.mlp.hidden);
                c.classifier.mlp.epochs = field(*it, "epochs", c.classifier.mlp.epochs);
                c.classifier.mlp.learning_rate =
                    field(*it, "learning_rate", c.classifier.mlp.learning_rate);
            } else if (kind == "oracle") {
                c.classifier.kind = ClassifierSpec::Kind::oracle;
                c.classifier.oracle = oracle_from_json(it->at("oracle"));
            } else {
                throw Error(ErrorKind::config, "unknown classifier kind: " + kind);
            }
        }

        auto auto_or_number = [](const json& v, const char* name) -> std::optional<double> {
            if (v.is_string()) {
                if (v.get<std::string>() != "auto")
                    throw Error(ErrorKind::config,
                                std::string(name) + " must be a number or \"auto\"");
                return std::nullopt;
            }
            return v.get<double>();
        };
        if (auto it = j.find("epsilon"); it != j.end())
            c.epsilon = auto_or_number(*it, "epsilon");
        if (auto it = j.find("bandwidth"); it != j.end())
            c.bandwidth = auto_or_number(*it, "bandwidth");

        c.samples_per_cell = field(j, "samples_per_cell", c.samples_per_cell);
        c.vote_n = field(j, "vote_n", c.vote_n);
        c.bootstrap = field(j, "bootstrap", c.bootstrap);
        c.alpha = field(j, "alpha", c.alpha);
        if (auto it = j.find("top_k"); it != j.end()) {
            c.topk_threshold = field(*it, "threshold", c.topk_threshold);
            c.max_cells = field(*it, "max_cells", c.max_cells);
        }
        if (auto it = j.find("remainder_policy"); it != j.end())
            c.remainder_policy = remainder_policy_from_string(it->get<std::string>());
        if (auto it = j.find("validate_epsilon_against"); it != j.end()) {
            const std::string v = it->get<std::string>();
            if (v == "r_hat")
                c.epsilon_convention = SeparationConvention::r_hat;
            else if (v == "d_min")
                c.epsilon_convention = SeparationConvention::d_min;
            else
                throw Error(ErrorKind::config, "unknown epsilon convention: " + v);
        }
        c.seed = field(j, "seed", c.seed);
        c.threads = field(j, "threads", c.threads);
        c.out_dir = field(j, "out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
    }
    check_config(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config, path + ": " + e.what());
    }
    return config_from_json(j);
}

void check_config(const RunConfig& c) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    if (c.dataset.kind == DatasetSource::Kind::synthetic && c.dataset.n < 10)
        fail("dataset.n must be >= 10");
    if (c.dataset.kind == DatasetSource::Kind::file && c.dataset.path.empty())
        fail("dataset.path must be set for a file source");
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
        fail("test_fraction must be in (0,1)");
    if (c.classifier.kind == ClassifierSpec::Kind::mlp) {
        if (c.classifier.mlp.hidden < 2) fail("classifier.hidden must be >= 2");
        if (c.classifier.mlp.epochs < 1) fail("classifier.epochs must be >= 1");
        if (!(c.classifier.mlp.learning_rate > 0.0))
            fail("classifier.learning_rate must be > 0");
    }
    if (c.epsilon && !(*c.epsilon > 0.0 && *c.epsilon <= 1.0))
        fail("epsilon must be in (0,1]");
    if (c.bandwidth && !(*c.bandwidth > 0.0)) fail("bandwidth must be > 0");
    if (c.samples_per_cell < 30) fail("samples_per_cell must be >= 30");
    if (c.vote_n < 1 || c.vote_n % 2 == 0) fail("vote_n must be odd and >= 1");
    if (c.bootstrap < 2) fail("bootstrap must be >= 2");
    if (!(c.alpha > 0.0 && c.alpha < 0.5)) fail("alpha must be in (0, 0.5)");
    if (!(c.topk_threshold > 0.0 && c.topk_threshold <= 1.0))
        fail("top_k.threshold must be in (0,1]");
    if (c.max_cells < 1) fail("top_k.max_cells must be >= 1");
    if (c.threads < 0) fail("threads must be >= 0");
    if (c.out_dir.empty()) fail("out_dir must be set");
}

}  // namespace pmi
