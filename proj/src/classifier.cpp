#include "pmi/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pmi/error.hpp"
#include "pmi/rng.hpp"

namespace pmi {

// ---------------------------------------------------------------------------
// MlpClassifier

MlpClassifier::MlpClassifier(int dim, int hidden, std::vector<int> classes)
    : dim_(dim), hidden_(hidden), classes_(std::move(classes)) {
    if (dim < 1) throw Error(ErrorKind::argument, "mlp dimension must be >= 1");
    if (hidden < 2) throw Error(ErrorKind::argument, "mlp hidden size must be >= 2");
    if (classes_.size() < 2)
        throw Error(ErrorKind::argument, "mlp needs at least 2 classes");
    const int c = static_cast<int>(classes_.size());
    params_.assign(static_cast<std::size_t>(hidden) * dim + hidden +
                       static_cast<std::size_t>(c) * hidden + c,
                   0.0);
}

std::span<const double> MlpClassifier::w1() const {
    return {params_.data(), static_cast<std::size_t>(hidden_) * dim_};
}
std::span<const double> MlpClassifier::b1() const {
    return {params_.data() + hidden_ * dim_, static_cast<std::size_t>(hidden_)};
}
std::span<const double> MlpClassifier::w2() const {
    const int c = static_cast<int>(classes_.size());
    return {params_.data() + hidden_ * dim_ + hidden_,
            static_cast<std::size_t>(c) * hidden_};
}
std::span<const double> MlpClassifier::b2() const {
    const int c = static_cast<int>(classes_.size());
    return {params_.data() + hidden_ * dim_ + hidden_ + c * hidden_,
            static_cast<std::size_t>(c)};
}

void MlpClassifier::forward(std::span<const double> x, std::vector<double>& pre_hidden,
                            std::vector<double>& hidden, std::vector<double>& out) const {
    const int c = static_cast<int>(classes_.size());
    pre_hidden.assign(hidden_, 0.0);
    hidden.assign(hidden_, 0.0);
    out.assign(c, 0.0);
    const auto w1v = w1();
    const auto b1v = b1();
    for (int i = 0; i < hidden_; ++i) {
        double z = b1v[i];
        for (int j = 0; j < dim_; ++j) z += w1v[i * dim_ + j] * x[j];
        pre_hidden[i] = z;
        hidden[i] = z > 0.0 ? z : 0.0;
    }
    const auto w2v = w2();
    const auto b2v = b2();
    for (int k = 0; k < c; ++k) {
        double s = b2v[k];
        for (int i = 0; i < hidden_; ++i) s += w2v[k * hidden_ + i] * hidden[i];
        out[k] = s;
    }
}

std::vector<double> MlpClassifier::scores(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw Error(ErrorKind::argument, "input dimension mismatch");
    std::vector<double> z, h, out;
    forward(x, z, h, out);
    return out;
}

int MlpClassifier::predict(std::span<const double> x) const {
    const auto out = scores(x);
    // max_element keeps the first maximum, so ties resolve low
    const auto it = std::max_element(out.begin(), out.end());
    return classes_[static_cast<std::size_t>(it - out.begin())];
}

// ---------------------------------------------------------------------------
// Training

namespace {

// stable softmax cross-entropy; returns loss, fills dscores = p - onehot
double softmax_ce(const std::vector<double>& scores, int target,
                  std::vector<double>& dscores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    dscores.resize(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        dscores[k] = std::exp(scores[k] - m);
        sum += dscores[k];
    }
    const double loss = -(scores[target] - m) + std::log(sum);
    for (std::size_t k = 0; k < scores.size(); ++k) {
        dscores[k] /= sum;
        if (static_cast<int>(k) == target) dscores[k] -= 1.0;
    }
    return loss;
}

}  // namespace

class MlpTrainer {
public:
    static TrainResult run(const LabeledDataset& train, int hidden, int epochs,
                           double learning_rate, std::uint64_t seed) {
        if (epochs < 1) throw Error(ErrorKind::argument, "epochs must be >= 1");
        if (!(learning_rate > 0.0))
            throw Error(ErrorKind::argument, "learning rate must be > 0");

        MlpClassifier m(train.dimension, hidden, train.classes);
        const int d = m.dim_;
        const int h = m.hidden_;
        const int c = static_cast<int>(m.classes_.size());
        auto& params = m.params_;

        Rng rng(mix_seed(seed, 0x7241ULL));
        // Gaussian init scaled by 1/sqrt(fan-in); biases stay zero
        const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
        for (int i = 0; i < h * d; ++i) params[i] = rng.normal(0.0, s1);
        const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
        for (int i = 0; i < c * h; ++i) params[h * d + h + i] = rng.normal(0.0, s2);

        std::vector<int> label_to_output(1 + *std::max_element(train.classes.begin(),
                                                               train.classes.end()),
                                         -1);
        for (std::size_t k = 0; k < train.classes.size(); ++k)
            label_to_output[train.classes[k]] = static_cast<int>(k);

        const std::size_t n = train.size();
        constexpr std::size_t kBatch = 32;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);

        std::vector<double> grad(params.size());
        std::vector<double> z, hid, out, dscore, dhid;
        double epoch_loss = 0.0;

        for (int epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[rng.below(i + 1)]);

            double loss_sum = 0.0;
            for (std::size_t start = 0; start < n; start += kBatch) {
                const std::size_t stop = std::min(n, start + kBatch);
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t bi = start; bi < stop; ++bi) {
                    const auto& p = train.points[order[bi]];
                    const int target = label_to_output[p.label];
                    m.forward(p.x, z, hid, out);
                    loss_sum += softmax_ce(out, target, dscore);
                    accumulate(m, p.x, z, hid, dscore, dhid, grad);
                }
                const double step = learning_rate / static_cast<double>(stop - start);
                for (std::size_t j = 0; j < params.size(); ++j)
                    params[j] -= step * grad[j];
            }
            epoch_loss = loss_sum / static_cast<double>(n);
            if (!std::isfinite(epoch_loss))
                throw Error(ErrorKind::divergence, "training diverged at epoch " +
                                                       std::to_string(epoch + 1) +
                                                       " (non-finite loss)");
        }
        for (double v : params)
            if (!std::isfinite(v))
                throw Error(ErrorKind::divergence,
                            "training produced non-finite weights");

        TrainResult result{std::move(m), 0.0, epoch_loss};
        result.train_error = 1.0 - accuracy(result.model, train);
        return result;
    }

    // gradient of the per-sample loss wrt [w1 | b1 | w2 | b2], added into grad
    static void accumulate(const MlpClassifier& m, std::span<const double> x,
                           const std::vector<double>& z, const std::vector<double>& hid,
                           const std::vector<double>& dscore, std::vector<double>& dhid,
                           std::vector<double>& grad) {
        const int d = m.dim_;
        const int h = m.hidden_;
        const int c = static_cast<int>(m.classes_.size());
        const auto w2v = m.w2();
        double* gw1 = grad.data();
        double* gb1 = grad.data() + h * d;
        double* gw2 = grad.data() + h * d + h;
        double* gb2 = grad.data() + h * d + h + c * h;

        dhid.assign(h, 0.0);
        for (int k = 0; k < c; ++k) {
            const double g = dscore[k];
            gb2[k] += g;
            for (int i = 0; i < h; ++i) {
                gw2[k * h + i] += g * hid[i];
                dhid[i] += g * w2v[k * h + i];
            }
        }
        for (int i = 0; i < h; ++i) {
            if (z[i] <= 0.0) continue;  // rectifier gate, derivative 0 at the kink
            const double g = dhid[i];
            gb1[i] += g;
            for (int j = 0; j < d; ++j) gw1[i * d + j] += g * x[j];
        }
    }
};

TrainResult train_mlp(const LabeledDataset& train, int hidden, int epochs,
                      double learning_rate, std::uint64_t seed) {
    return MlpTrainer::run(train, hidden, epochs, learning_rate, seed);
}

bool gradient_check(const MlpClassifier& m, std::span<const double> x, double tolerance) {
    if (tolerance < 0.0) throw Error(ErrorKind::argument, "tolerance must be >= 0");
    MlpClassifier probe = m;
    const int target_label = probe.predict(x);
    const int target = static_cast<int>(
        std::find(probe.classes_.begin(), probe.classes_.end(), target_label) -
        probe.classes_.begin());

    std::vector<double> z, hid, out, dscore, dhid;
    probe.forward(x, z, hid, out);
    std::vector<double> analytic(probe.params_.size(), 0.0);
    softmax_ce(out, target, dscore);
    MlpTrainer::accumulate(probe, x, z, hid, dscore, dhid, analytic);

    // fixed sample of parameter slots so the check is deterministic
    std::vector<std::size_t> idx(probe.params_.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(0x9c0ffeeULL);
    const std::size_t sample = std::min<std::size_t>(idx.size(), 50);
    for (std::size_t i = 0; i < sample; ++i)
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);

    constexpr double kStep = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < sample; ++i) {
        const std::size_t j = idx[i];
        const double saved = probe.params_[j];
        probe.params_[j] = saved + kStep;
        probe.forward(x, z, hid, out);
        const double lp = softmax_ce(out, target, dscore);
        probe.params_[j] = saved - kStep;
        probe.forward(x, z, hid, out);
        const double lm = softmax_ce(out, target, dscore);
        probe.params_[j] = saved;
        const double numeric = (lp - lm) / (2.0 * kStep);
        // 1e-5 floor: below it both sides are finite-difference noise
        const double denom = std::max({std::abs(analytic[j]), std::abs(numeric), 1e-5});
        max_rel = std::max(max_rel, std::abs(analytic[j] - numeric) / denom);
    }
    return max_rel < tolerance;
}

double accuracy(const Classifier& c, const LabeledDataset& ds) {
    if (ds.points.empty())
        throw Error(ErrorKind::argument, "accuracy needs a non-empty dataset");
    if (c.dimension() != ds.dimension)
        throw Error(ErrorKind::argument, "classifier/dataset dimension mismatch");
    std::size_t hits = 0;
    for (const auto& p : ds.points)
        if (c.predict(p.x) == p.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------
// Model text format

void save_mlp(const MlpClassifier& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write model file: " + path);
    out << "pmi-mlp 1\n";
    out << m.dim_ << ' ' << m.hidden_ << ' ' << m.classes_.size() << '\n';
    for (std::size_t i = 0; i < m.classes_.size(); ++i)
        out << m.classes_[i] << (i + 1 < m.classes_.size() ? ' ' : '\n');
    char buf[64];
    for (std::size_t i = 0; i < m.params_.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", m.params_[i]);
        out << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
    }
    out << '\n';
}

MlpClassifier load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open model file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "pmi-mlp" || version != 1)
        throw Error(ErrorKind::parse, path + ": not a pmi-mlp v1 model file");
    int d = 0, h = 0, c = 0;
    in >> d >> h >> c;
    if (!in || d < 1 || h < 2 || c < 2)
        throw Error(ErrorKind::parse, path + ": bad model dimensions");
    std::vector<int> classes(c);
    for (int& v : classes) in >> v;
    MlpClassifier m(d, h, classes);
    for (auto& v : m.params_) in >> v;
    if (!in) throw Error(ErrorKind::parse, path + ": truncated weight block");
    return m;
}

// ---------------------------------------------------------------------------
// OracleClassifier

namespace {

int predict_base(const BaseOracle& base, std::span<const double> x) {
    return std::visit(
        [&](const auto& o) -> int {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, HalfplaneOracle>) {
                double dot = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) dot += o.normal[j] * x[j];
                return dot >= o.offset ? 1 : 0;
            } else if constexpr (std::is_same_v<T, CheckerboardOracle>) {
                long long parity = 0;
                for (double c : x) {
                    long long t = static_cast<long long>(std::floor(c * o.tiles));
                    parity += std::min<long long>(t, o.tiles - 1);
                }
                return static_cast<int>(parity & 1);
            } else {
                return o.label;
            }
        },
        base);
}

}  // namespace

OracleClassifier::OracleClassifier(OracleSpec spec, int dim, std::vector<int> classes)
    : spec_(std::move(spec)), dim_(dim), classes_(std::move(classes)) {
    if (dim_ < 1) throw Error(ErrorKind::argument, "oracle dimension must be >= 1");
    if (classes_.empty()) throw Error(ErrorKind::argument, "oracle needs a class list");
}

int OracleClassifier::predict(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw Error(ErrorKind::argument, "input dimension mismatch");
    if (const auto* noisy = std::get_if<NoisyRegionOracle>(&spec_)) {
        bool inside = true;
        for (int j = 0; j < dim_; ++j)
            if (x[j] < noisy->box_lo[j] || x[j] > noisy->box_hi[j]) {
                inside = false;
                break;
            }
        return inside ? noisy->flip_label : predict_base(noisy->base, x);
    }
    return std::visit(
        [&](const auto& o) -> int {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, NoisyRegionOracle>) {
                return 0;  // unreachable, handled above
            } else {
                return predict_base(BaseOracle{o}, x);
            }
        },
        spec_);
}

}  // namespace pmi
