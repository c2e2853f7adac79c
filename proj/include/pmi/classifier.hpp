#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pmi/dataset.hpp"

namespace pmi {

// Model-agnostic prediction interface. Implementations must be
// deterministic, total over [0,1]^d, and safe for concurrent prediction.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int predict(std::span<const double> x) const = 0;
    virtual int dimension() const = 0;
    virtual const std::vector<int>& classes() const = 0;
};

// One-hidden-layer rectifier network with argmax readout. Ties at the
// argmax resolve to the lowest class index so predict is a function.
class MlpClassifier : public Classifier {
public:
    MlpClassifier(int dim, int hidden, std::vector<int> classes);

    int predict(std::span<const double> x) const override;
    int dimension() const override { return dim_; }
    const std::vector<int>& classes() const override { return classes_; }

    int hidden() const { return hidden_; }
    std::vector<double> scores(std::span<const double> x) const;

    // flat parameter access, layout [w1 | b1 | w2 | b2]
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    friend class MlpTrainer;
    friend bool gradient_check(const MlpClassifier&, std::span<const double>, double);
    friend void save_mlp(const MlpClassifier&, const std::string&);
    friend MlpClassifier load_mlp(const std::string&);

private:
    // views into params_
    std::span<const double> w1() const;  // hidden x dim, row-major
    std::span<const double> b1() const;
    std::span<const double> w2() const;  // classes x hidden, row-major
    std::span<const double> b2() const;

    void forward(std::span<const double> x, std::vector<double>& pre_hidden,
                 std::vector<double>& hidden, std::vector<double>& out) const;

    int dim_;
    int hidden_;
    std::vector<int> classes_;
    std::vector<double> params_;
};

struct TrainResult {
    MlpClassifier model;
    double train_error;
    double final_loss;
};

// Mini-batch SGD on softmax cross-entropy, deterministic under seed (fixed
// Gaussian init with scale 1/sqrt(fan-in), fixed shuffle order). Throws a
// divergence error naming the epoch if the loss goes non-finite.
TrainResult train_mlp(const LabeledDataset& train, int hidden, int epochs,
                      double learning_rate, std::uint64_t seed);

// Compares backpropagated loss gradients at x against central finite
// differences (step 1e-5) on a fixed sample of >= 50 weights; true iff the
// max relative error stays below tolerance.
bool gradient_check(const MlpClassifier& m, std::span<const double> x, double tolerance);

double accuracy(const Classifier& c, const LabeledDataset& ds);

// Versioned text model format: header line, dimension line, class ids,
// then whitespace-separated weights at 17 significant digits.
void save_mlp(const MlpClassifier& m, const std::string& path);
MlpClassifier load_mlp(const std::string& path);

// Closed-form classifiers with analytically integrable decision regions,
// used to verify the statistical estimators.
struct HalfplaneOracle {
    std::vector<double> normal;
    double offset;
};
struct CheckerboardOracle {
    int tiles;  // tiles per axis; label = parity of tile coordinates
};
struct ConstantOracle {
    int label;
};
using BaseOracle = std::variant<HalfplaneOracle, CheckerboardOracle, ConstantOracle>;

// Base oracle, except inside [box_lo, box_hi] where the output is flipped
// to a fixed label.
struct NoisyRegionOracle {
    BaseOracle base;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
    int flip_label;
};
using OracleSpec = std::variant<HalfplaneOracle, CheckerboardOracle, ConstantOracle,
                                NoisyRegionOracle>;

class OracleClassifier : public Classifier {
public:
    OracleClassifier(OracleSpec spec, int dim, std::vector<int> classes);

    int predict(std::span<const double> x) const override;
    int dimension() const override { return dim_; }
    const std::vector<int>& classes() const override { return classes_; }

    const OracleSpec& spec() const { return spec_; }

private:
    OracleSpec spec_;
    int dim_;
    std::vector<int> classes_;
};

}  // namespace pmi
