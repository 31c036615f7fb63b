#pragma once

// Evaluation and the experiment harness.
//
// Metrics: test accuracy, and robustness — accuracy over a test set expanded
// by K random refactoring variants per sample.  The harness trains one model
// per (cell, seed), where a cell fixes {model kind, training strategy, mixing
// pairing, alpha, method subset}, and reports mean ± population std over the
// seeds.  Every random stream derives from the run seed and a fixed tag, so
// results are independent of scheduling (--jobs) and bit-reproducible.
//
// Reported percentages round half-to-even to two decimals.

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mixcode/corpus.hpp"
#include "mixcode/mixup.hpp"
#include "mixcode/model.hpp"
#include "mixcode/refactor.hpp"
#include "mixcode/represent.hpp"
#include "mixcode/rng.hpp"

namespace mixcode::eval {

struct EmptyTestSetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultClassificationK = 5;
inline constexpr std::size_t kDefaultBugDetectionK = 10;

inline std::size_t default_robustness_k(const std::string& task) {
    return task == corpus::kTaskBugDetection ? kDefaultBugDetectionK : kDefaultClassificationK;
}

// --- Context: a dataset prepared for training/evaluation ---

// Programs, labels, and the vocabulary (built from the training programs
// only, so test tokens can fall to the unknown id).  Immutable once built;
// shared read-only across worker threads.
struct EvalContext {
    std::string task;
    std::size_t num_classes = 0;
    std::vector<lang::Program> train_programs;
    std::vector<std::size_t> train_labels;
    std::vector<lang::Program> test_programs;
    std::vector<std::size_t> test_labels;
    represent::Vocabulary vocab;
};

inline EvalContext make_context(const corpus::Dataset& train, const corpus::Dataset& test,
                                std::size_t max_vocab = represent::kDefaultMaxVocab) {
    if (train.task != test.task || train.num_classes != test.num_classes) {
        throw SpecError("train and test sets disagree on task or class count");
    }
    if (train.samples.empty() || test.samples.empty()) {
        throw EmptyTestSetError("train and test sets must be non-empty");
    }
    EvalContext ctx;
    ctx.task = train.task;
    ctx.num_classes = train.num_classes;
    for (const corpus::Sample& s : train.samples) {
        ctx.train_programs.push_back(s.program);
        ctx.train_labels.push_back(s.label);
    }
    for (const corpus::Sample& s : test.samples) {
        ctx.test_programs.push_back(s.program);
        ctx.test_labels.push_back(s.label);
    }
    ctx.vocab = represent::build_vocab(ctx.train_programs, max_vocab);
    return ctx;
}

// Convenience: split one dataset with the standard stratified rule.
inline EvalContext make_context(const corpus::Dataset& ds,
                                std::size_t max_vocab = represent::kDefaultMaxVocab) {
    const corpus::SplitIndices split = corpus::split_dataset(ds);
    corpus::Dataset train{ds.task, ds.num_classes, {}};
    corpus::Dataset test{ds.task, ds.num_classes, {}};
    for (std::size_t i : split.train) train.samples.push_back(ds.samples[i]);
    for (std::size_t i : split.test) test.samples.push_back(ds.samples[i]);
    return make_context(train, test, max_vocab);
}

// --- Metrics ---

inline double accuracy(const model::Classifier& m,
                       const std::vector<model::EncodedExample>& test) {
    if (test.empty()) throw EmptyTestSetError("accuracy over an empty test set");
    std::size_t correct = 0;
    for (const auto& [features, label] : test) {
        if (model::predict(m, features) == label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

inline std::vector<model::EncodedExample> encode_examples(
    const std::vector<lang::Program>& programs, const std::vector<std::size_t>& labels,
    const represent::EncoderConfig& enc) {
    std::vector<model::EncodedExample> out;
    out.reserve(programs.size());
    for (std::size_t i = 0; i < programs.size(); ++i) {
        out.emplace_back(enc.encode(programs[i]), labels[i]);
    }
    return out;
}

struct RobustnessResult {
    double value = 0.0;  // fraction correct over the K * |test| variants
    // Per selected transform: {correct, total} and the resulting fraction.
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;

    std::map<std::string, double> per_method() const {
        std::map<std::string, double> out;
        for (const auto& [name, ct] : counts) {
            out[name] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
        }
        return out;
    }
};

// Robustness: each test program contributes K variants, each produced by one
// randomly selected applicable method (untouched copy when none applies);
// the score is accuracy over the expanded set.
inline RobustnessResult robustness(const model::Classifier& m,
                                   const std::vector<lang::Program>& test_programs,
                                   const std::vector<std::size_t>& test_labels,
                                   const std::vector<refactor::Method>& methods, std::size_t k,
                                   Rng& rng, const represent::EncoderConfig& enc) {
    if (test_programs.empty()) throw EmptyTestSetError("robustness over an empty test set");
    if (k == 0) throw SpecError("robustness requires K >= 1");
    RobustnessResult result;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_programs.size(); ++i) {
        for (std::size_t v = 0; v < k; ++v) {
            const refactor::RefactorOutcome out =
                refactor::random_refactor_or_identity(test_programs[i], methods, rng);
            const std::string key =
                out.method ? refactor::method_name(*out.method) : std::string("identity");
            const bool ok = model::predict(m, enc.encode(out.program)) == test_labels[i];
            auto& ct = result.counts[key];
            ct.first += ok ? 1 : 0;
            ct.second += 1;
            correct += ok ? 1 : 0;
        }
    }
    result.value =
        static_cast<double>(correct) / static_cast<double>(test_programs.size() * k);
    return result;
}

// --- Training strategies ---
//
// All per-epoch augmentation randomness comes from a stream derived only
// from (run seed, epoch), never from consumption order, so any epoch's
// transforms can be reconstructed independently.

inline Rng augmentation_rng(std::uint64_t run_seed, std::size_t epoch) {
    return Rng(seed_split(run_seed, "augment-epoch-" + std::to_string(epoch)));
}

// Plain training on the original programs, identical every epoch.
inline model::DatasetProvider make_standard_provider(const EvalContext& ctx,
                                                     const represent::EncoderConfig& enc) {
    auto data = std::make_shared<std::vector<model::TrainingExample>>();
    for (std::size_t i = 0; i < ctx.train_programs.size(); ++i) {
        data->push_back({enc.encode(ctx.train_programs[i]),
                         represent::encode_label(ctx.train_labels[i], ctx.num_classes)});
    }
    return [data](std::size_t) { return *data; };
}

// Baseline augmentation: every epoch, each program is replaced by one random
// refactoring of itself (copied untouched when no method applies).
inline model::DatasetProvider make_basic_provider(const EvalContext& ctx,
                                                  const represent::EncoderConfig& enc,
                                                  std::vector<refactor::Method> methods,
                                                  std::uint64_t run_seed) {
    const EvalContext* c = &ctx;
    const represent::EncoderConfig* e = &enc;
    return [c, e, methods = std::move(methods), run_seed](std::size_t epoch) {
        Rng rng = augmentation_rng(run_seed, epoch);
        std::vector<model::TrainingExample> out;
        out.reserve(c->train_programs.size());
        for (std::size_t i = 0; i < c->train_programs.size(); ++i) {
            const auto ref = refactor::random_refactor_or_identity(c->train_programs[i],
                                                                   methods, rng);
            out.push_back({e->encode(ref.program),
                           represent::encode_label(c->train_labels[i], c->num_classes)});
        }
        return out;
    };
}

// Mixed augmentation: every epoch, refactor all programs, pair them per the
// policy, and blend features and labels with a fresh lambda per pair.
inline model::DatasetProvider make_mixed_provider(const EvalContext& ctx,
                                                  const represent::EncoderConfig& enc,
                                                  mixup::MixPolicy policy,
                                                  std::uint64_t run_seed) {
    const EvalContext* c = &ctx;
    const represent::EncoderConfig* e = &enc;
    return [c, e, policy = std::move(policy), run_seed](std::size_t epoch) {
        Rng rng = augmentation_rng(run_seed, epoch);
        const std::vector<mixup::MixedSample> mixed = mixup::build_epoch_dataset(
            c->train_programs, c->train_labels, c->num_classes, policy, *e, rng);
        std::vector<model::TrainingExample> out;
        out.reserve(mixed.size());
        for (const mixup::MixedSample& s : mixed) out.push_back({s.features, s.label});
        return out;
    };
}

inline const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names = {"standard", "basic", "mixcode"};
    return names;
}

// --- Experiment grid ---

struct TrainParams {
    std::size_t epochs = model::kDefaultEpochs;
    std::size_t batch_size = model::kDefaultBatchSize;
    std::optional<double> lr;                 // unset: per-kind default
    std::optional<double> lr_final_fraction;  // unset: model default
    std::optional<std::size_t> tail_average_epochs;  // unset: model default
    std::size_t hidden_dim = model::kDefaultHiddenDim;
};

struct CellSpec {
    model::ModelKind model = model::ModelKind::BagFnn;
    std::string strategy = "standard";  // standard | basic | mixcode
    mixup::PairStrategy pairing = mixup::PairStrategy::OriRef;  // mixcode only
    double alpha = mixup::kDefaultAlpha;                        // mixcode only
    std::string subset_name = "all";  // all | good | poor | <method> ("" for standard)
    std::vector<refactor::Method> methods;  // resolved subset (augmentation pool)
};

// CSV strategy label; non-default pairings are suffixed so rows stay unique.
inline std::string cell_strategy_label(const CellSpec& cell) {
    if (cell.strategy != "mixcode" || cell.pairing == mixup::PairStrategy::OriRef) {
        return cell.strategy;
    }
    return "mixcode-" + mixup::pair_strategy_name(cell.pairing);
}

struct ExperimentSpec {
    std::string dataset_name = "dataset";
    std::vector<CellSpec> cells;
    std::size_t robustness_k = 0;  // 0: default for the task
    std::vector<std::uint64_t> seeds;
    TrainParams train;
    std::size_t seq_len = represent::kDefaultSeqLen;
    std::size_t jobs = 1;
};

struct CellResult {
    CellSpec cell;
    std::string status = "ok";  // "ok" or "failed:<reason>"
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;   // fractions, one per completed run
    std::vector<double> robustness_values;
    std::vector<model::TrainTrace> traces;
    RobustnessResult aggregate_robustness;  // counts summed over runs

    bool failed() const { return status != "ok"; }
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

namespace detail {

inline model::DatasetProvider provider_for(const CellSpec& cell, const EvalContext& ctx,
                                           const represent::EncoderConfig& enc,
                                           std::uint64_t run_seed) {
    if (cell.strategy == "standard") return make_standard_provider(ctx, enc);
    if (cell.strategy == "basic") {
        return make_basic_provider(ctx, enc, cell.methods, run_seed);
    }
    if (cell.strategy == "mixcode") {
        mixup::MixPolicy policy;
        policy.alpha = cell.alpha;
        policy.strategy = cell.pairing;
        policy.methods = cell.methods;
        return make_mixed_provider(ctx, enc, policy, run_seed);
    }
    throw SpecError("unknown strategy: " + cell.strategy);
}

struct SharedState {
    const EvalContext* ctx;
    std::map<model::ModelKind, represent::EncoderConfig> encoders;
    std::map<model::ModelKind, std::vector<model::EncodedExample>> encoded_tests;
    std::vector<refactor::Method> robustness_methods;
    std::size_t k = 0;
};

inline CellResult run_cell(const CellSpec& cell, const SharedState& shared,
                           const ExperimentSpec& spec) {
    CellResult result;
    result.cell = cell;
    result.seeds = spec.seeds;
    const EvalContext& ctx = *shared.ctx;
    const represent::EncoderConfig& enc = shared.encoders.at(cell.model);
    const auto& encoded_test = shared.encoded_tests.at(cell.model);
    for (const std::uint64_t run_seed : spec.seeds) {
        try {
            model::Classifier m =
                model::init_model(cell.model, ctx.vocab.size(), ctx.num_classes,
                                  seed_split(run_seed, "init"), spec.train.hidden_dim);
            model::TrainConfig cfg;
            cfg.epochs = spec.train.epochs;
            cfg.batch_size = spec.train.batch_size;
            cfg.lr = spec.train.lr.value_or(model::default_lr(cell.model));
            cfg.lr_final_fraction =
                spec.train.lr_final_fraction.value_or(model::kDefaultLrFinalFraction);
            cfg.tail_average_epochs =
                spec.train.tail_average_epochs.value_or(model::kDefaultTailAverageEpochs);
            cfg.seed = seed_split(run_seed, "train");
            const model::DatasetProvider provider = provider_for(cell, ctx, enc, run_seed);
            result.traces.push_back(model::fit(m, provider, cfg, &encoded_test));
            result.accuracies.push_back(accuracy(m, encoded_test));
            Rng rrng(seed_split(run_seed, "robust"));
            const RobustnessResult rob =
                robustness(m, ctx.test_programs, ctx.test_labels, shared.robustness_methods,
                           shared.k, rrng, enc);
            result.robustness_values.push_back(rob.value);
            for (const auto& [name, ct] : rob.counts) {
                auto& agg = result.aggregate_robustness.counts[name];
                agg.first += ct.first;
                agg.second += ct.second;
            }
        } catch (const model::DivergedError& err) {
            result.status = std::string("failed:diverged");
            break;
        } catch (const std::exception& err) {
            result.status = std::string("failed:") + err.what();
            break;
        }
    }
    if (!result.failed() && !result.robustness_values.empty()) {
        result.aggregate_robustness.value = mean_of(result.robustness_values);
    }
    return result;
}

}  // namespace detail

// Runs every cell over every seed.  Cells are independent; with jobs > 1 they
// run on a small thread pool, and results are identical to the serial order.
inline std::vector<CellResult> run_experiment(const ExperimentSpec& spec,
                                              const EvalContext& ctx) {
    if (spec.cells.empty()) throw SpecError("experiment has no cells");
    if (spec.seeds.empty()) throw SpecError("experiment needs at least one seed");
    {
        std::set<std::uint64_t> distinct(spec.seeds.begin(), spec.seeds.end());
        if (distinct.size() != spec.seeds.size()) throw SpecError("seeds must be distinct");
    }
    detail::SharedState shared;
    shared.ctx = &ctx;
    shared.k = spec.robustness_k != 0 ? spec.robustness_k : default_robustness_k(ctx.task);
    shared.robustness_methods = refactor::semantic_preserving_methods();
    std::set<model::ModelKind> kinds;
    for (const CellSpec& c : spec.cells) kinds.insert(c.model);
    for (model::ModelKind kind : kinds) {
        represent::EncoderConfig enc;
        enc.kind = kind == model::ModelKind::BagFnn ? represent::ReprKind::Bag
                                                    : represent::ReprKind::Seq;
        enc.vocab = &ctx.vocab;
        enc.seq_len = spec.seq_len;
        shared.encoders[kind] = enc;
    }
    for (model::ModelKind kind : kinds) {
        shared.encoded_tests[kind] =
            encode_examples(ctx.test_programs, ctx.test_labels, shared.encoders.at(kind));
    }

    std::vector<CellResult> results(spec.cells.size());
    const std::size_t jobs = std::max<std::size_t>(1, spec.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < spec.cells.size(); ++i) {
            results[i] = detail::run_cell(spec.cells[i], shared, spec);
        }
    } else {
        std::mutex mu;
        std::size_t next = 0;
        auto worker = [&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= spec.cells.size()) return;
                    i = next++;
                }
                results[i] = detail::run_cell(spec.cells[i], shared, spec);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(jobs, spec.cells.size()); ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) t.join();
    }
    return results;
}

// --- Method ranking ---

// Sorts methods by their single-method accuracy (descending, ties broken by
// name) and splits into halves: the better half plus any odd extra, then the
// rest.
inline std::pair<std::vector<refactor::Method>, std::vector<refactor::Method>> rank_methods(
    const std::vector<std::pair<refactor::Method, double>>& per_method_accuracy) {
    std::vector<std::pair<refactor::Method, double>> ranked = per_method_accuracy;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return refactor::method_name(a.first) < refactor::method_name(b.first);
    });
    const std::size_t good_n = (ranked.size() + 1) / 2;
    std::pair<std::vector<refactor::Method>, std::vector<refactor::Method>> out;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        (i < good_n ? out.first : out.second).push_back(ranked[i].first);
    }
    return out;
}

// --- Reporting ---

// Percent with two decimals, rounding half to even (banker's rounding).
inline double percent_2dp(double fraction) {
    const int prev = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double out = std::nearbyint(fraction * 10000.0) / 100.0;
    std::fesetround(prev);
    return out;
}

inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", percent_2dp(fraction));
    return buf;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_safe(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

inline constexpr const char* kResultsCsvHeader =
    "dataset,task,model,strategy,alpha,method_subset,runs,acc_mean,acc_std,rob_mean,rob_std,"
    "status";

inline void write_results_csv(std::ostream& out, const std::string& dataset_name,
                              const std::string& task,
                              const std::vector<CellResult>& results) {
    out << kResultsCsvHeader << '\n';
    for (const CellResult& r : results) {
        out << csv_safe(dataset_name) << ',' << csv_safe(task) << ','
            << model::model_kind_name(r.cell.model) << ','
            << cell_strategy_label(r.cell) << ',';
        if (r.cell.strategy == "mixcode") {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", r.cell.alpha);
            out << buf;
        }
        out << ',' << (r.cell.strategy == "standard" ? "" : csv_safe(r.cell.subset_name)) << ','
            << r.seeds.size() << ',';
        if (r.failed()) {
            out << ",,,," << csv_safe(r.status) << '\n';
            continue;
        }
        out << format_percent(mean_of(r.accuracies)) << ','
            << format_percent(population_std(r.accuracies)) << ','
            << format_percent(mean_of(r.robustness_values)) << ','
            << format_percent(population_std(r.robustness_values)) << ','
            << r.status << '\n';
    }
}

inline constexpr const char* kTraceCsvHeader = "run,epoch,loss,heldout_acc";

inline void write_trace_csv(std::ostream& out, const CellResult& result) {
    out << kTraceCsvHeader << '\n';
    for (std::size_t run = 0; run < result.traces.size(); ++run) {
        const model::TrainTrace& trace = result.traces[run];
        for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e) {
            out << result.seeds[run] << ',' << e << ',' << format_double(trace.epoch_loss[e])
                << ',' << format_double(trace.heldout_accuracy[e]) << '\n';
        }
    }
}

// File name stem identifying a cell inside an output directory.
inline std::string cell_slug(const CellSpec& cell) {
    std::string s = model::model_kind_name(cell.model) + "_" + cell_strategy_label(cell);
    if (cell.strategy == "mixcode") {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", cell.alpha);
        s += std::string("_a") + buf;
    }
    if (cell.strategy != "standard") s += "_" + cell.subset_name;
    return s;
}

}  // namespace mixcode::eval
