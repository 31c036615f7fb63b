#pragma once

// From-scratch classifiers over the two program representations.
//
//   bag-fnn:  bag vector (D) -> dense(H) -> ReLU -> dense(C) -> softmax
//   seq-mean: sequence matrix (L x V) -> embedding (V x M) -> mean over
//             positions -> dense(H) -> ReLU -> dense(C) -> softmax
//
// Targets are soft label vectors (mixup produces two-hot mixtures), so the
// loss is soft-target cross-entropy computed from logits via log-sum-exp.
// Optimization is plain mini-batch SGD; every random decision (init, batch
// order) derives from the training seed, making runs bit-reproducible.
// Checkpoints are JSON with shortest round-trip decimals: loading a saved
// model reproduces its predictions exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixcode/represent.hpp"
#include "mixcode/rng.hpp"

namespace mixcode::model {

using represent::Features;
using represent::LabelVector;
using represent::ReprKind;

struct InvalidDimsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
using represent::ShapeMismatchError;

// Row-major matrix of doubles; rows = input dimension of the map.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

enum class ModelKind { BagFnn, SeqMean };

inline std::string model_kind_name(ModelKind k) {
    return k == ModelKind::BagFnn ? "bag-fnn" : "seq-mean";
}

inline ModelKind model_kind_from_name(const std::string& name) {
    if (name == "bag-fnn") return ModelKind::BagFnn;
    if (name == "seq-mean") return ModelKind::SeqMean;
    throw ModelFormatError("unknown model kind: " + name);
}

inline constexpr std::size_t kDefaultHiddenDim = 64;
inline constexpr std::size_t kDefaultEmbedDim = 32;
// Calibrated so a bag model reaches its accuracy plateau within the default
// 50-epoch budget on the bundled generator's corpus; 0.1 leaves the model
// visibly undertrained there and 2.0 diverges.
inline constexpr double kDefaultBagLr = 0.5;
inline constexpr double kDefaultSeqLr = 0.05;
inline constexpr double kDefaultLrFinalFraction = 0.1;
inline constexpr std::size_t kDefaultTailAverageEpochs = 1;
inline constexpr std::size_t kDefaultBatchSize = 32;
inline constexpr std::size_t kDefaultEpochs = 50;

struct Classifier {
    ModelKind kind = ModelKind::BagFnn;
    std::size_t input_dim = 0;   // bag dimension, or vocabulary size for seq
    std::size_t hidden_dim = kDefaultHiddenDim;
    std::size_t embed_dim = kDefaultEmbedDim;  // seq only
    std::size_t num_classes = 0;
    std::uint64_t seed = 0;

    Matrix embedding;  // input_dim x embed_dim (seq only)
    Matrix w1;         // (bag: input_dim, seq: embed_dim) x hidden_dim
    std::vector<double> b1;
    Matrix w2;  // hidden_dim x num_classes
    std::vector<double> b2;

    std::size_t parameter_count() const {
        std::size_t n = w1.a.size() + b1.size() + w2.a.size() + b2.size();
        if (kind == ModelKind::SeqMean) n += embedding.a.size();
        return n;
    }

    bool operator==(const Classifier&) const = default;
};

namespace detail {

// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)), the usual scaled
// initialization for ReLU-free shallow nets; biases stay zero.
inline void fill_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : m.a) v = -s + rng.uniform01() * 2.0 * s;
}

}  // namespace detail

inline Classifier init_model(ModelKind kind, std::size_t input_dim, std::size_t num_classes,
                             std::uint64_t seed, std::size_t hidden_dim = kDefaultHiddenDim,
                             std::size_t embed_dim = kDefaultEmbedDim) {
    if (input_dim == 0 || num_classes == 0 || hidden_dim == 0 || embed_dim == 0) {
        throw InvalidDimsError("model dimensions must be positive");
    }
    Classifier m;
    m.kind = kind;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.embed_dim = embed_dim;
    m.num_classes = num_classes;
    m.seed = seed;
    Rng rng(seed);
    const std::size_t dense_in = kind == ModelKind::BagFnn ? input_dim : embed_dim;
    if (kind == ModelKind::SeqMean) {
        m.embedding = Matrix(input_dim, embed_dim);
        detail::fill_uniform(m.embedding, input_dim, embed_dim, rng);
    }
    m.w1 = Matrix(dense_in, hidden_dim);
    detail::fill_uniform(m.w1, dense_in, hidden_dim, rng);
    m.b1.assign(hidden_dim, 0.0);
    m.w2 = Matrix(hidden_dim, num_classes);
    detail::fill_uniform(m.w2, hidden_dim, num_classes, rng);
    m.b2.assign(num_classes, 0.0);
    return m;
}

namespace detail {

struct ForwardPass {
    std::vector<double> dense_in;  // bag vector or mean embedding
    std::vector<double> mean;      // seq only: column means of the input matrix
    std::vector<double> pre1;
    std::vector<double> hidden;
    std::vector<double> logits;
    std::vector<double> probs;
};

inline void softmax_from_logits(const std::vector<double>& z, std::vector<double>& p) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double denom = 0.0;
    p.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        denom += p[i];
    }
    for (double& v : p) v /= denom;
}

inline ForwardPass forward_pass(const Classifier& m, const Features& x) {
    ForwardPass f;
    if (m.kind == ModelKind::BagFnn) {
        if (x.kind != ReprKind::Bag || x.vec.values.size() != m.input_dim) {
            throw ShapeMismatchError("bag-fnn expects a bag vector of the model's dimension");
        }
        f.dense_in = x.vec.values;
    } else {
        if (x.kind != ReprKind::Seq || x.seq.vocab_size != m.input_dim) {
            throw ShapeMismatchError("seq-mean expects a sequence matrix over the vocabulary");
        }
        const auto& seq = x.seq;
        f.mean.assign(m.input_dim, 0.0);
        for (std::size_t l = 0; l < seq.length; ++l) {
            for (std::size_t v = 0; v < seq.vocab_size; ++v) {
                f.mean[v] += seq.at(l, v);
            }
        }
        const double inv_len = 1.0 / static_cast<double>(seq.length);
        for (double& v : f.mean) v *= inv_len;
        f.dense_in.assign(m.embed_dim, 0.0);
        for (std::size_t v = 0; v < m.input_dim; ++v) {
            const double mv = f.mean[v];
            if (mv == 0.0) continue;
            for (std::size_t j = 0; j < m.embed_dim; ++j) {
                f.dense_in[j] += mv * m.embedding.at(v, j);
            }
        }
    }
    f.pre1.assign(m.hidden_dim, 0.0);
    for (std::size_t d = 0; d < f.dense_in.size(); ++d) {
        const double xv = f.dense_in[d];
        if (xv == 0.0) continue;
        for (std::size_t h = 0; h < m.hidden_dim; ++h) {
            f.pre1[h] += xv * m.w1.at(d, h);
        }
    }
    f.hidden.resize(m.hidden_dim);
    for (std::size_t h = 0; h < m.hidden_dim; ++h) {
        f.pre1[h] += m.b1[h];
        f.hidden[h] = f.pre1[h] > 0.0 ? f.pre1[h] : 0.0;
    }
    f.logits = m.b2;
    for (std::size_t h = 0; h < m.hidden_dim; ++h) {
        const double hv = f.hidden[h];
        if (hv == 0.0) continue;
        for (std::size_t c = 0; c < m.num_classes; ++c) {
            f.logits[c] += hv * m.w2.at(h, c);
        }
    }
    softmax_from_logits(f.logits, f.probs);
    return f;
}

}  // namespace detail

// Class probabilities for one encoded program (positive, summing to 1).
inline std::vector<double> forward(const Classifier& m, const Features& x) {
    return detail::forward_pass(m, x).probs;
}

// Soft-target cross-entropy from logits, computed via log-sum-exp so that
// large logits cannot overflow: loss = logsumexp(z) - sum_i t_i z_i.
inline double loss_from_logits(const std::vector<double>& logits,
                               const std::vector<double>& target) {
    if (logits.size() != target.size()) {
        throw ShapeMismatchError("logits and target disagree in dimension");
    }
    double zmax = logits[0];
    for (double z : logits) zmax = std::max(zmax, z);
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double lse = zmax + std::log(sum);
    double dot = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) dot += target[i] * logits[i];
    return lse - dot;
}

// Soft-target cross-entropy over probabilities: -sum_i t_i log p_i.
inline double loss(const std::vector<double>& probs, const LabelVector& target) {
    if (probs.size() != target.values.size()) {
        throw ShapeMismatchError("probabilities and target disagree in dimension");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (target.values[i] != 0.0) total -= target.values[i] * std::log(probs[i]);
    }
    return total;
}

// Predicted class: argmax probability, ties resolved to the lower index.
inline std::size_t predict(const Classifier& m, const Features& x) {
    const std::vector<double> p = forward(m, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return best;
}

// --- Training ---

struct TrainingExample {
    Features features;
    LabelVector label;
};

struct TrainConfig {
    std::size_t epochs = kDefaultEpochs;
    std::size_t batch_size = kDefaultBatchSize;
    double lr = kDefaultBagLr;
    // The step size anneals linearly from `lr` to `lr * lr_final_fraction`
    // over the epochs.  Augmentation strategies resample their training set
    // every epoch, so without small late steps one unlucky final epoch can
    // wreck an already-converged model; annealing makes the last iterate
    // stable for every strategy.  1.0 keeps the step size constant.
    double lr_final_fraction = kDefaultLrFinalFraction;
    // The returned weights are the average of the last `tail_average_epochs`
    // end-of-epoch iterates rather than the final iterate alone.  With
    // per-epoch resampling the individual late iterates still jitter around
    // the converged point; their average is a steadier model.  0 and 1 both
    // keep the plain final iterate.
    std::size_t tail_average_epochs = kDefaultTailAverageEpochs;
    std::uint64_t seed = 0;
};

inline double default_lr(ModelKind kind) {
    return kind == ModelKind::BagFnn ? kDefaultBagLr : kDefaultSeqLr;
}

struct TrainTrace {
    std::vector<double> epoch_loss;         // mean per epoch
    std::vector<double> heldout_accuracy;   // NaN when no held-out set given
};

// Labeled, already-encoded evaluation set.
using EncodedExample = std::pair<Features, std::size_t>;

namespace detail {

struct Gradients {
    Matrix d_embedding;
    Matrix d_w1;
    std::vector<double> d_b1;
    Matrix d_w2;
    std::vector<double> d_b2;

    explicit Gradients(const Classifier& m)
        : d_embedding(m.kind == ModelKind::SeqMean ? m.embedding.rows : 0,
                      m.kind == ModelKind::SeqMean ? m.embedding.cols : 0),
          d_w1(m.w1.rows, m.w1.cols),
          d_b1(m.b1.size(), 0.0),
          d_w2(m.w2.rows, m.w2.cols),
          d_b2(m.b2.size(), 0.0) {}

    void reset() {
        std::fill(d_embedding.a.begin(), d_embedding.a.end(), 0.0);
        std::fill(d_w1.a.begin(), d_w1.a.end(), 0.0);
        std::fill(d_b1.begin(), d_b1.end(), 0.0);
        std::fill(d_w2.a.begin(), d_w2.a.end(), 0.0);
        std::fill(d_b2.begin(), d_b2.end(), 0.0);
    }
};

// Accumulates one sample's gradients; returns its loss.
inline double backward_accumulate(const Classifier& m, const TrainingExample& ex,
                                  Gradients& g) {
    if (ex.label.values.size() != m.num_classes) {
        throw ShapeMismatchError("label dimension disagrees with the model");
    }
    const ForwardPass f = forward_pass(m, ex.features);
    const double sample_loss = loss_from_logits(f.logits, ex.label.values);

    std::vector<double> dz(m.num_classes);
    for (std::size_t c = 0; c < m.num_classes; ++c) dz[c] = f.probs[c] - ex.label.values[c];

    for (std::size_t c = 0; c < m.num_classes; ++c) g.d_b2[c] += dz[c];
    std::vector<double> dh(m.hidden_dim, 0.0);
    for (std::size_t h = 0; h < m.hidden_dim; ++h) {
        const double hv = f.hidden[h];
        for (std::size_t c = 0; c < m.num_classes; ++c) {
            if (hv != 0.0) g.d_w2.at(h, c) += hv * dz[c];
            dh[h] += m.w2.at(h, c) * dz[c];
        }
    }
    std::vector<double> dpre(m.hidden_dim);
    for (std::size_t h = 0; h < m.hidden_dim; ++h) {
        dpre[h] = f.pre1[h] > 0.0 ? dh[h] : 0.0;
        g.d_b1[h] += dpre[h];
    }
    for (std::size_t d = 0; d < f.dense_in.size(); ++d) {
        const double xv = f.dense_in[d];
        if (xv == 0.0) continue;
        for (std::size_t h = 0; h < m.hidden_dim; ++h) {
            g.d_w1.at(d, h) += xv * dpre[h];
        }
    }
    if (m.kind == ModelKind::SeqMean) {
        std::vector<double> de(m.embed_dim, 0.0);
        for (std::size_t j = 0; j < m.embed_dim; ++j) {
            for (std::size_t h = 0; h < m.hidden_dim; ++h) {
                de[j] += m.w1.at(j, h) * dpre[h];
            }
        }
        for (std::size_t v = 0; v < m.input_dim; ++v) {
            const double mv = f.mean[v];
            if (mv == 0.0) continue;
            for (std::size_t j = 0; j < m.embed_dim; ++j) {
                g.d_embedding.at(v, j) += mv * de[j];
            }
        }
    }
    return sample_loss;
}

inline void sgd_step(Classifier& m, const Gradients& g, double lr, double inv_batch) {
    const double scale = lr * inv_batch;
    if (m.kind == ModelKind::SeqMean) {
        for (std::size_t i = 0; i < m.embedding.a.size(); ++i) {
            m.embedding.a[i] -= scale * g.d_embedding.a[i];
        }
    }
    for (std::size_t i = 0; i < m.w1.a.size(); ++i) m.w1.a[i] -= scale * g.d_w1.a[i];
    for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= scale * g.d_b1[i];
    for (std::size_t i = 0; i < m.w2.a.size(); ++i) m.w2.a[i] -= scale * g.d_w2.a[i];
    for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= scale * g.d_b2[i];
}

// `acc += m`, weights only (metadata is left untouched).
inline void add_weights(Classifier& acc, const Classifier& m) {
    for (std::size_t i = 0; i < m.embedding.a.size(); ++i) acc.embedding.a[i] += m.embedding.a[i];
    for (std::size_t i = 0; i < m.w1.a.size(); ++i) acc.w1.a[i] += m.w1.a[i];
    for (std::size_t i = 0; i < m.b1.size(); ++i) acc.b1[i] += m.b1[i];
    for (std::size_t i = 0; i < m.w2.a.size(); ++i) acc.w2.a[i] += m.w2.a[i];
    for (std::size_t i = 0; i < m.b2.size(); ++i) acc.b2[i] += m.b2[i];
}

inline void scale_weights(Classifier& m, double s) {
    for (double& v : m.embedding.a) v *= s;
    for (double& v : m.w1.a) v *= s;
    for (double& v : m.b1) v *= s;
    for (double& v : m.w2.a) v *= s;
    for (double& v : m.b2) v *= s;
}

}  // namespace detail

// Provider of one epoch's training set; called once per epoch with the epoch
// index so augmentation strategies can resample fresh data.
using DatasetProvider = std::function<std::vector<TrainingExample>(std::size_t epoch)>;

// Trains in place.  Batch order is shuffled per epoch from cfg.seed; two fits
// with the same provider output, config, and initial weights are bit-equal.
// Throws DivergedError when the epoch loss stops being finite.
inline TrainTrace fit(Classifier& m, const DatasetProvider& provider, const TrainConfig& cfg,
                      const std::vector<EncodedExample>* heldout = nullptr) {
    if (cfg.epochs == 0 || cfg.batch_size == 0) {
        throw InvalidDimsError("epochs and batch size must be positive");
    }
    TrainTrace trace;
    detail::Gradients grads(m);
    const std::size_t tail = std::min(std::max<std::size_t>(cfg.tail_average_epochs, 1),
                                      cfg.epochs);
    const std::size_t tail_start = cfg.epochs - tail;
    Classifier tail_sum;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<TrainingExample> data = provider(epoch);
        if (data.empty()) throw InvalidDimsError("training epoch has no samples");
        std::vector<std::size_t> order(data.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng batch_rng(seed_split(cfg.seed, "batch-epoch-" + std::to_string(epoch)));
        batch_rng.shuffle(order);

        const double progress =
            cfg.epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1) : 0.0;
        const double lr = cfg.lr * (1.0 - (1.0 - cfg.lr_final_fraction) * progress);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            grads.reset();
            for (std::size_t i = start; i < end; ++i) {
                epoch_loss += detail::backward_accumulate(m, data[order[i]], grads);
            }
            detail::sgd_step(m, grads, lr, 1.0 / static_cast<double>(end - start));
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss)) {
            throw DivergedError("training loss became non-finite at epoch " +
                                std::to_string(epoch));
        }
        trace.epoch_loss.push_back(epoch_loss);
        if (epoch >= tail_start) {
            if (epoch == tail_start) {
                tail_sum = m;
            } else {
                detail::add_weights(tail_sum, m);
            }
        }
        if (heldout != nullptr && !heldout->empty()) {
            std::size_t correct = 0;
            for (const auto& [features, label] : *heldout) {
                if (predict(m, features) == label) ++correct;
            }
            trace.heldout_accuracy.push_back(static_cast<double>(correct) /
                                             static_cast<double>(heldout->size()));
        } else {
            trace.heldout_accuracy.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    if (tail > 1) {
        detail::scale_weights(tail_sum, 1.0 / static_cast<double>(tail));
        m = tail_sum;
    }
    return trace;
}

// --- Checkpoints ---

inline constexpr int kCheckpointFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                               const std::string& name) {
    if (!j.is_array() || j.size() != rows) {
        throw ModelFormatError("checkpoint field '" + name + "' has the wrong row count");
    }
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ModelFormatError("checkpoint field '" + name + "' has the wrong column count");
        }
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline std::vector<double> vector_from_json(const nlohmann::json& j, std::size_t n,
                                            const std::string& name) {
    if (!j.is_array() || j.size() != n) {
        throw ModelFormatError("checkpoint field '" + name + "' has the wrong length");
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace detail

inline void save_model(const Classifier& m, const std::string& path) {
    nlohmann::json doc;
    doc["format_version"] = kCheckpointFormatVersion;
    doc["kind"] = model_kind_name(m.kind);
    doc["dims"] = {{"input_dim", m.input_dim},
                   {"hidden_dim", m.hidden_dim},
                   {"embed_dim", m.embed_dim}};
    doc["num_classes"] = m.num_classes;
    doc["seed"] = m.seed;
    nlohmann::json weights;
    if (m.kind == ModelKind::SeqMean) weights["embedding"] = detail::matrix_to_json(m.embedding);
    weights["w1"] = detail::matrix_to_json(m.w1);
    weights["b1"] = m.b1;
    weights["w2"] = detail::matrix_to_json(m.w2);
    weights["b2"] = m.b2;
    doc["weights"] = std::move(weights);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFormatError("cannot write checkpoint: " + path);
    out << doc.dump(2) << '\n';
}

inline Classifier load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot read checkpoint: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ModelFormatError(std::string("checkpoint is not valid JSON: ") + err.what());
    }
    try {
        if (doc.at("format_version").get<int>() != kCheckpointFormatVersion) {
            throw ModelFormatError("unsupported checkpoint format version");
        }
        Classifier m;
        m.kind = model_kind_from_name(doc.at("kind").get<std::string>());
        m.input_dim = doc.at("dims").at("input_dim").get<std::size_t>();
        m.hidden_dim = doc.at("dims").at("hidden_dim").get<std::size_t>();
        m.embed_dim = doc.at("dims").at("embed_dim").get<std::size_t>();
        m.num_classes = doc.at("num_classes").get<std::size_t>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        const auto& weights = doc.at("weights");
        const std::size_t dense_in = m.kind == ModelKind::BagFnn ? m.input_dim : m.embed_dim;
        if (m.kind == ModelKind::SeqMean) {
            m.embedding = detail::matrix_from_json(weights.at("embedding"), m.input_dim,
                                                   m.embed_dim, "embedding");
        }
        m.w1 = detail::matrix_from_json(weights.at("w1"), dense_in, m.hidden_dim, "w1");
        m.b1 = detail::vector_from_json(weights.at("b1"), m.hidden_dim, "b1");
        m.w2 = detail::matrix_from_json(weights.at("w2"), m.hidden_dim, m.num_classes, "w2");
        m.b2 = detail::vector_from_json(weights.at("b2"), m.num_classes, "b2");
        return m;
    } catch (const nlohmann::json::exception& err) {
        throw ModelFormatError(std::string("checkpoint is missing fields: ") + err.what());
    }
}

}  // namespace mixcode::model
