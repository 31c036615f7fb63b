#pragma once

// Mixup-based augmentation over program representations.
//
// A mixed sample interpolates two encoded programs and their one-hot labels
// with a single weight drawn from Beta(alpha, alpha):
//
//     features = lambda * a + (1 - lambda) * b
//     label    = lambda * y_a + (1 - lambda) * y_b
//
// Lambda is drawn per pair and never clamped or folded.  Partner selection
// follows the epoch recipe in build_epoch_dataset: refactor every program,
// shuffle the originals, and pair positionally, so each epoch sees a fresh
// random pairing and fresh refactorings.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcode/lang.hpp"
#include "mixcode/refactor.hpp"
#include "mixcode/represent.hpp"
#include "mixcode/rng.hpp"

namespace mixcode::mixup {

using represent::FeatureVector;
using represent::Features;
using represent::LabelVector;
using represent::SeqMatrix;
using represent::ShapeMismatchError;

struct InvalidAlphaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- Beta sampling ---

namespace detail {

// Johnk's method in log space, exact for small alpha where U^(1/alpha)
// underflows: accept when log(exp(x) + exp(y)) <= 0 with x = log(U)/alpha.
inline double beta_johnk(double alpha, Rng& rng) {
    for (;;) {
        const double u = rng.uniform01();
        const double v = rng.uniform01();
        if (u == 0.0 || v == 0.0) continue;
        const double x = std::log(u) / alpha;
        const double y = std::log(v) / alpha;
        const double m = x > y ? x : y;
        const double log_sum = m + std::log(std::exp(x - m) + std::exp(y - m));
        if (log_sum <= 0.0) return std::exp(x - log_sum);
    }
}

// Marsaglia-Tsang squeeze for Gamma(alpha, 1), alpha >= 1.
inline double gamma_marsaglia_tsang(double alpha, Rng& rng) {
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal01();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform01();
        if (u == 0.0) continue;
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

}  // namespace detail

// Draws lambda ~ Beta(alpha, alpha).  Johnk's method for alpha <= 1 (exact
// for the small-alpha regime this toolkit runs in), gamma-ratio construction
// for alpha > 1.
inline double sample_lambda(double alpha, Rng& rng) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InvalidAlphaError("alpha must be a positive finite number");
    }
    if (alpha <= 1.0) return detail::beta_johnk(alpha, rng);
    const double g1 = detail::gamma_marsaglia_tsang(alpha, rng);
    const double g2 = detail::gamma_marsaglia_tsang(alpha, rng);
    return g1 / (g1 + g2);
}

// --- Interpolation ---

inline FeatureVector mix_features(const FeatureVector& a, const FeatureVector& b, double lambda) {
    if (a.kind != b.kind || a.values.size() != b.values.size()) {
        throw ShapeMismatchError("feature vectors disagree in kind or dimension");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in [0, 1]");
    }
    FeatureVector out;
    out.kind = a.kind;
    out.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = lambda * a.values[i] + (1.0 - lambda) * b.values[i];
    }
    return out;
}

inline SeqMatrix mix_features(const SeqMatrix& a, const SeqMatrix& b, double lambda) {
    if (a.length != b.length || a.vocab_size != b.vocab_size) {
        throw ShapeMismatchError("sequence matrices disagree in shape");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in [0, 1]");
    }
    SeqMatrix out;
    out.length = a.length;
    out.vocab_size = a.vocab_size;
    out.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = lambda * a.values[i] + (1.0 - lambda) * b.values[i];
    }
    return out;
}

inline Features mix_features(const Features& a, const Features& b, double lambda) {
    if (a.kind != b.kind) throw ShapeMismatchError("features disagree in representation kind");
    Features out;
    out.kind = a.kind;
    if (a.kind == represent::ReprKind::Bag) {
        out.vec = mix_features(a.vec, b.vec, lambda);
    } else {
        out.seq = mix_features(a.seq, b.seq, lambda);
    }
    return out;
}

inline LabelVector mix_labels(const LabelVector& a, const LabelVector& b, double lambda) {
    if (a.values.size() != b.values.size()) {
        throw ShapeMismatchError("label vectors disagree in dimension");
    }
    LabelVector out;
    out.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = lambda * a.values[i] + (1.0 - lambda) * b.values[i];
    }
    return out;
}

// --- Epoch construction ---

// Which program pair feeds each mixed sample.
enum class PairStrategy {
    OriOri,  // shuffled originals with unshuffled originals
    OriRef,  // shuffled originals with refactored copies
    RefRef,  // refactored shuffled copies with refactored copies
};

inline std::string pair_strategy_name(PairStrategy s) {
    switch (s) {
        case PairStrategy::OriOri: return "ori-ori";
        case PairStrategy::OriRef: return "ori-ref";
        case PairStrategy::RefRef: return "ref-ref";
    }
    return "?";
}

inline PairStrategy pair_strategy_from_name(const std::string& name) {
    if (name == "ori-ori") return PairStrategy::OriOri;
    if (name == "ori-ref") return PairStrategy::OriRef;
    if (name == "ref-ref") return PairStrategy::RefRef;
    throw std::invalid_argument("unknown mix strategy: " + name);
}

inline constexpr double kDefaultAlpha = 0.1;

struct MixPolicy {
    double alpha = kDefaultAlpha;
    PairStrategy strategy = PairStrategy::OriRef;
    std::vector<refactor::Method> methods = refactor::all_methods();
    // Testing hook: when set, every pair uses this weight and the Beta draw
    // is skipped (used to verify the lambda = 1 collapse to plain training).
    std::optional<double> lambda_override;
};

struct MixedSample {
    Features features;
    LabelVector label;
    double lambda_used = 0.0;
};

// Builds one training epoch of mixed samples.
//
// Deterministic sub-streams of `rng` (fork tags "refactor", "shuffle",
// "lambda") keep the shuffle permutation reproducible independently of how
// many draws the refactorings consume.  Order of operations:
//   1. refactor each program in dataset order (skipped for ori-ori)
//   2. Fisher-Yates shuffle of the original indices
//   3. for ref-ref only: refactor the shuffled copies
//   4. per pair: draw lambda, encode both partners, interpolate
// Programs with no applicable method pass through unchanged (identity).
inline std::vector<MixedSample> build_epoch_dataset(
    const std::vector<lang::Program>& programs, const std::vector<std::size_t>& labels,
    std::size_t num_classes, const MixPolicy& policy, const represent::EncoderConfig& encoder,
    Rng& rng) {
    if (programs.size() != labels.size()) {
        throw ShapeMismatchError("programs and labels disagree in length");
    }
    if (programs.size() < 2) {
        throw DegenerateDatasetError("mixup needs at least two samples");
    }
    const std::size_t n = programs.size();
    Rng refactor_rng = rng.fork("refactor");
    Rng shuffle_rng = rng.fork("shuffle");
    Rng lambda_rng = rng.fork("lambda");

    // Partner 2: refactored copies in dataset order (or the originals).
    std::vector<Features> partner2(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (policy.strategy == PairStrategy::OriOri) {
            partner2[i] = encoder.encode(programs[i]);
        } else {
            partner2[i] = encoder.encode(
                refactor::random_refactor_or_identity(programs[i], policy.methods, refactor_rng)
                    .program);
        }
    }

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    shuffle_rng.shuffle(perm);

    std::vector<MixedSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Features first;
        if (policy.strategy == PairStrategy::RefRef) {
            first = encoder.encode(
                refactor::random_refactor_or_identity(programs[perm[i]], policy.methods,
                                                      refactor_rng)
                    .program);
        } else {
            first = encoder.encode(programs[perm[i]]);
        }
        const double lambda = policy.lambda_override ? *policy.lambda_override
                                                     : sample_lambda(policy.alpha, lambda_rng);
        MixedSample sample;
        sample.lambda_used = lambda;
        sample.features = mix_features(first, partner2[i], lambda);
        sample.label = mix_labels(represent::encode_label(labels[perm[i]], num_classes),
                                  represent::encode_label(labels[i], num_classes), lambda);
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace mixcode::mixup
