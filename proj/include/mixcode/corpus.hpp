#pragma once

// Corpus generation and dataset files.
//
// The classification corpus covers eight small integer problems; each class
// is one problem, rendered in several surface forms (loop, formula,
// recursion, builtin-call) with identifiers drawn from name pools, and every
// generated program is executed against the problem's probe inputs and
// checked against a native reference implementation before it is accepted.
//
// The bug-detection corpus starts from the same correct programs and plants
// exactly one semantic defect per buggy twin (a flipped comparison or a
// perturbed integer constant) that provably changes at least one probe's
// output while keeping every probe run completing normally.
//
// Datasets serialize to a plain text ".mpyds" file that round-trips
// byte-identically.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcode/lang.hpp"
#include "mixcode/refactor/walk.hpp"
#include "mixcode/rng.hpp"

namespace mixcode::corpus {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    std::size_t line;
    FormatError(std::size_t line_number, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + reason),
          line(line_number) {}
};

// One probe = the full input() stream for a run.
struct Probe {
    std::vector<std::int64_t> inputs;

    bool operator==(const Probe&) const = default;
};

struct Sample {
    lang::Program program;
    std::size_t label = 0;
    std::vector<Probe> probes;

    bool operator==(const Sample&) const = default;
};

inline constexpr const char* kTaskClassification = "classification";
inline constexpr const char* kTaskBugDetection = "bug-detection";

struct Dataset {
    std::string task;
    std::size_t num_classes = 0;
    std::vector<Sample> samples;

    bool operator==(const Dataset&) const = default;
};

struct GeneratorSpec {
    std::size_t num_problems = 8;         // clamped to the available templates
    std::size_t programs_per_problem = 60;
    std::uint64_t seed = 0;
    double mutation_rate = 1.0;  // bug task: fraction of bases given a buggy twin
};

// --- Problem templates ---

namespace detail {

// Replaces $PLACEHOLDER tokens (maximal uppercase runs) with chosen names.
inline std::string subst(const std::string& text,
                         const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '$') {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && text[j] >= 'A' && text[j] <= 'Z') ++j;
        const std::string key = text.substr(i + 1, j - i - 1);
        auto it = vars.find(key);
        if (it == vars.end()) throw std::logic_error("unbound template placeholder $" + key);
        out += it->second;
        i = j;
    }
    return out;
}

struct Role {
    std::string placeholder;
    std::vector<std::string> pool;
};

struct VariantSpec {
    int weight;
    std::string source;  // template text with $PLACEHOLDERS
    std::vector<Role> roles;
};

struct ProblemSpec {
    std::string name;
    std::vector<Probe> probes;
    std::vector<std::string> (*reference)(const Probe&);  // expected print lines
    std::vector<VariantSpec> variants;
};

inline std::vector<std::string> ref_sum_to_n(const Probe& p) {
    const std::int64_t n = p.inputs[0];
    return {std::to_string(n * (n + 1) / 2)};
}

inline std::vector<std::string> ref_max_of_two(const Probe& p) {
    return {std::to_string(std::max(p.inputs[0], p.inputs[1]))};
}

inline std::vector<std::string> ref_parity(const Probe& p) {
    return {std::to_string(p.inputs[0] % 2)};
}

inline std::vector<std::string> ref_factorial(const Probe& p) {
    std::int64_t acc = 1;
    for (std::int64_t i = 2; i <= p.inputs[0]; ++i) acc *= i;
    return {std::to_string(acc)};
}

inline std::vector<std::string> ref_triangular(const Probe& p) {
    const std::int64_t n = p.inputs[0];
    std::int64_t k = 0;
    while (k * (k + 1) / 2 < n) ++k;
    return {std::to_string(k * (k + 1) / 2 == n ? 1 : 0)};
}

inline std::vector<std::string> ref_countdown(const Probe& p) {
    std::vector<std::string> out;
    for (std::int64_t v = p.inputs[0]; v >= 1; --v) out.push_back(std::to_string(v));
    return out;
}

inline std::vector<std::string> ref_gcd(const Probe& p) {
    std::int64_t a = p.inputs[0], b = p.inputs[1];
    while (b != 0) {
        const std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return {std::to_string(a)};
}

inline std::vector<std::string> ref_power(const Probe& p) {
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < p.inputs[1]; ++i) r *= p.inputs[0];
    return {std::to_string(r)};
}

// Shared identifier pools.  Names come from the renaming synonym groups where
// possible so the renaming refactorings usually have a move available.
inline const std::vector<std::string>& pool_value() {
    static const std::vector<std::string> v = {"number", "value", "amount", "size", "data"};
    return v;
}
inline const std::vector<std::string>& pool_acc() {
    static const std::vector<std::string> v = {"total", "result", "answer", "outcome", "sum"};
    return v;
}
inline const std::vector<std::string>& pool_idx() {
    static const std::vector<std::string> v = {"index", "idx", "position", "count", "step"};
    return v;
}
inline const std::vector<std::string>& pool_fn() {
    static const std::vector<std::string> v = {"helper", "process", "calculate", "compute",
                                               "evaluate"};
    return v;
}
inline const std::vector<std::string>& pool_left() {
    static const std::vector<std::string> v = {"first", "left", "low", "start", "base"};
    return v;
}
inline const std::vector<std::string>& pool_right() {
    static const std::vector<std::string> v = {"second", "right", "high", "stop", "limit"};
    return v;
}
inline const std::vector<std::string>& pool_tmp() {
    static const std::vector<std::string> v = {"temp", "tmp", "scratch", "item", "entry"};
    return v;
}
inline const std::vector<std::string>& pool_flag() {
    static const std::vector<std::string> v = {"flag", "marker", "check", "verify"};
    return v;
}

inline const std::vector<ProblemSpec>& problem_specs() {
    static const std::vector<ProblemSpec> specs = [] {
        std::vector<ProblemSpec> ps;

        // Each problem leans on one structural idiom -- a loop keyword, an
        // operator family, a call shape -- so classes are separable by token
        // statistics alone, while identifier pools, constant choices, api-call
        // forms, def wrappers, and an occasional decorated body vary the
        // surface within a class.  Variants of one problem share a skeleton;
        // the lower-weight forms add tokens (def/return, api dots) rather
        // than replacing the idiom.

        ps.push_back(
            {"sum-to-n",
             {{{1}}, {{4}}, {{10}}, {{25}}, {{100}}},
             &ref_sum_to_n,
             {
                 {3,
                  "$N = input()\n"
                  "$ACC = $N * ($N + 1) // 2\n"
                  "print($ACC)\n",
                  {{"N", pool_value()}, {"ACC", pool_acc()}}},
                 {2,
                  "$N = input()\n"
                  "$M = $N + 1\n"
                  "$ACC = $N * $M // 2\n"
                  "print($ACC)\n",
                  {{"N", pool_value()}, {"M", pool_tmp()}, {"ACC", pool_acc()}}},
                 {2,
                  "$N = input()\n"
                  "$ACC = ($N * $N + $N) // 2\n"
                  "print($ACC)\n",
                  {{"N", pool_value()}, {"ACC", pool_acc()}}},
             }});

        ps.push_back(
            {"max-of-two",
             {{{3, 9}}, {{9, 3}}, {{5, 5}}, {{-2, -7}}, {{100, 1}}},
             &ref_max_of_two,
             {
                 {3,
                  "$A = input()\n"
                  "$B = input()\n"
                  "if $A >= $B:\n"
                  "    print($A)\n"
                  "elif $B >= $A:\n"
                  "    print($B)\n",
                  {{"A", pool_left()}, {"B", pool_right()}}},
                 {2,
                  "$A = input()\n"
                  "$B = input()\n"
                  "print($A if $A >= $B else $B)\n",
                  {{"A", pool_left()}, {"B", pool_right()}}},
                 {1,
                  "$A = input()\n"
                  "$B = input()\n"
                  "if $A == $B:\n"
                  "    print($A)\n"
                  "else:\n"
                  "    print(api.max($A, $B))\n",
                  {{"A", pool_left()}, {"B", pool_right()}}},
             }});

        ps.push_back(
            {"parity",
             {{{0}}, {{1}}, {{6}}, {{13}}, {{88}}},
             &ref_parity,
             {
                 {3,
                  "$N = input()\n"
                  "$R = $N % 2\n"
                  "if $R % 2 == 1:\n"
                  "    $R = 1\n"
                  "print($R)\n",
                  {{"N", pool_value()}, {"R", pool_acc()}}},
                 {2,
                  "$N = input()\n"
                  "$R = api.min($N % 2, 1)\n"
                  "if $R % 2 == 1:\n"
                  "    $R = 1\n"
                  "print($R)\n",
                  {{"N", pool_value()}, {"R", pool_acc()}}},
                 {1,
                  "$N = input()\n"
                  "if $N % 2 == 0:\n"
                  "    print(0)\n"
                  "else:\n"
                  "    print(1)\n",
                  {{"N", pool_value()}}},
             }});

        ps.push_back(
            {"factorial",
             {{{0}}, {{1}}, {{5}}, {{10}}, {{20}}},
             &ref_factorial,
             {
                 {3,
                  "$N = input()\n"
                  "$ACC = 1\n"
                  "$I = 1\n"
                  "while $I <= $N:\n"
                  "    $ACC = $ACC * $I\n"
                  "    $I = $I + 1\n"
                  "if $ACC <= 0:\n"
                  "    $ACC = 0\n"
                  "print($ACC)\n",
                  {{"N", pool_value()}, {"ACC", pool_acc()}, {"I", pool_idx()}}},
                 {2,
                  "$N = input()\n"
                  "$ACC = 1\n"
                  "$I = 1\n"
                  "while $I <= $N:\n"
                  "    $ACC = api.mul($ACC, $I)\n"
                  "    $I = api.add($I, 1)\n"
                  "if $ACC <= 0:\n"
                  "    $ACC = 0\n"
                  "print($ACC)\n",
                  {{"N", pool_value()}, {"ACC", pool_acc()}, {"I", pool_idx()}}},
             }});

        ps.push_back(
            {"triangular-check",
             {{{1}}, {{2}}, {{10}}, {{14}}, {{5050}}},
             &ref_triangular,
             {
                 {3,
                  "$N = input()\n"
                  "$FLAG = False\n"
                  "$S = 0\n"
                  "$K = 0\n"
                  "while not $FLAG and $S < $N:\n"
                  "    $K = $K + 1\n"
                  "    $S = $S + $K\n"
                  "    if $S == $N:\n"
                  "        $FLAG = True\n"
                  "print(1 if $FLAG else 0)\n",
                  {{"N", pool_value()}, {"FLAG", pool_flag()}, {"S", pool_acc()}, {"K", pool_idx()}}},
                 {2,
                  "$N = input()\n"
                  "$S = 0\n"
                  "$K = 0\n"
                  "while $S < $N:\n"
                  "    $K = $K + 1\n"
                  "    $S = $S + $K\n"
                  "$FLAG = $S == $N\n"
                  "print(1 if $FLAG else 0)\n",
                  {{"N", pool_value()}, {"S", pool_acc()}, {"K", pool_idx()}, {"FLAG", pool_flag()}}},
             }});

        ps.push_back(
            {"countdown",
             {{{1}}, {{2}}, {{5}}, {{9}}, {{30}}},
             &ref_countdown,
             {
                 {3,
                  "$N = input()\n"
                  "while $N > 0:\n"
                  "    print($N)\n"
                  "    $N = $N - 1\n",
                  {{"N", pool_value()}}},
                 {2,
                  "$N = input()\n"
                  "$I = 0\n"
                  "while $N > $I:\n"
                  "    print($N - $I)\n"
                  "    $I = $I + 1\n",
                  {{"N", pool_value()}, {"I", pool_idx()}}},
                 {1,
                  "$N = input()\n"
                  "while $N > 0:\n"
                  "    print($N)\n"
                  "    $N = api.sub($N, 1)\n",
                  {{"N", pool_value()}}},
             }});

        ps.push_back(
            {"gcd",
             {{{12, 18}}, {{7, 13}}, {{100, 75}}, {{44, 44}}, {{270, 192}}},
             &ref_gcd,
             {
                 {3,
                  "$A = input()\n"
                  "$B = input()\n"
                  "while $B != 0:\n"
                  "    $T = $B\n"
                  "    $B = $A % $B\n"
                  "    $A = $T\n"
                  "print($A)\n",
                  {{"A", pool_left()}, {"B", pool_right()}, {"T", pool_tmp()}}},
                 {1,
                  "def $F($X, $Y):\n"
                  "    while $Y != 0:\n"
                  "        $T = $Y\n"
                  "        $Y = $X % $Y\n"
                  "        $X = $T\n"
                  "    return $X\n"
                  "$A = input()\n"
                  "$B = input()\n"
                  "print($F($A, $B))\n",
                  {{"F", pool_fn()},
                   {"X", pool_left()},
                   {"Y", pool_right()},
                   {"T", pool_idx()},
                   {"A", pool_value()},
                   {"B", pool_tmp()}}},
                 {2,
                  "$A = input()\n"
                  "$B = input()\n"
                  "while $A != $B:\n"
                  "    $T = api.max($A, $B) - api.min($A, $B)\n"
                  "    $A = api.min($A, $B)\n"
                  "    $B = $T\n"
                  "print($A)\n",
                  {{"A", pool_left()}, {"B", pool_right()}, {"T", pool_tmp()}}},
             }});

        ps.push_back(
            {"power",
             {{{2, 10}}, {{3, 0}}, {{5, 3}}, {{-2, 5}}, {{2, 62}}},
             &ref_power,
             {
                 {3,
                  "def $F($X, $K):\n"
                  "    if $K == 0:\n"
                  "        return 1\n"
                  "    return $X * $F($X, $K - 1)\n"
                  "$B = input()\n"
                  "$E = input()\n"
                  "print($F($B, $E))\n",
                  {{"F", pool_fn()},
                   {"X", pool_left()},
                   {"K", pool_idx()},
                   {"B", pool_value()},
                   {"E", pool_right()}}},
                 {2,
                  "def $F($X, $K):\n"
                  "    return 1 if $K == 0 else $X * $F($X, $K - 1)\n"
                  "$B = input()\n"
                  "$E = input()\n"
                  "print($F($B, $E))\n",
                  {{"F", pool_fn()},
                   {"X", pool_left()},
                   {"K", pool_idx()},
                   {"B", pool_value()},
                   {"E", pool_right()}}},
                 {2,
                  "def $F($X, $K):\n"
                  "    if $K == 0:\n"
                  "        return 1\n"
                  "    return api.mul($X, $F($X, $K - 1))\n"
                  "$B = input()\n"
                  "$E = input()\n"
                  "print($F($B, $E))\n",
                  {{"F", pool_fn()},
                   {"X", pool_left()},
                   {"K", pool_idx()},
                   {"B", pool_value()},
                   {"E", pool_right()}}},
             }});

        return ps;
    }();
    return specs;
}

inline std::size_t weighted_pick(const std::vector<VariantSpec>& variants, Rng& rng) {
    std::uint64_t total = 0;
    for (const auto& v : variants) total += static_cast<std::uint64_t>(v.weight);
    std::uint64_t roll = rng.uniform_below(total);
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto w = static_cast<std::uint64_t>(variants[i].weight);
        if (roll < w) return i;
        roll -= w;
    }
    return variants.size() - 1;
}

// Probability that one eligible arithmetic operation is spelled through the
// builtin call library (`api.add(a, b)`) instead of an infix operator.  The
// two spellings are interchangeable for integer arithmetic, and the coin is
// flipped independently per site, so one logical program lands on many nearby
// token-frequency points instead of collapsing onto a single canonical one.
inline constexpr double kApiSpellProbability = 0.35;
// Probability of wrapping the whole program in a constant-true conditional (a
// surface form that also gives the branch-rewriting transformation a target).
inline constexpr double kWrapProbability = 0.15;

inline const char* api_spelling(lang::BinOp op) {
    switch (op) {
        case lang::BinOp::Add: return "api.add";
        case lang::BinOp::Sub: return "api.sub";
        case lang::BinOp::Mul: return "api.mul";
        default: return nullptr;
    }
}

// Rewrites infix arithmetic into the equivalent builtin call, one independent
// coin flip per site.
inline void jitter_arithmetic_spelling(lang::Program& prog, Rng& rng) {
    refactor::walk_program_exprs(prog, [&rng](lang::Expr& e) {
        auto* bin = std::get_if<lang::BinaryExpr>(&e.node);
        if (bin == nullptr) return;
        const char* callee = api_spelling(bin->op);
        if (callee == nullptr || rng.uniform01() >= kApiSpellProbability) return;
        lang::CallExpr call;
        call.callee = callee;
        call.args = std::move(bin->args);
        e.node = std::move(call);
    });
}

// Renders one variant with freshly chosen identifiers, then applies the
// surface jitters above.
inline lang::Program instantiate_variant(const ProblemSpec& problem, std::size_t variant_idx,
                                         Rng& rng) {
    const VariantSpec& variant = problem.variants[variant_idx];
    std::map<std::string, std::string> names;
    std::set<std::string> used;
    for (const Role& role : variant.roles) {
        std::vector<std::string> avail;
        for (const std::string& cand : role.pool) {
            if (!used.count(cand)) avail.push_back(cand);
        }
        if (avail.empty()) throw std::logic_error("identifier pool exhausted for $" + role.placeholder);
        const std::string pick = avail[rng.uniform_below(avail.size())];
        names[role.placeholder] = pick;
        used.insert(pick);
    }
    lang::Program prog = lang::parse_source(subst(variant.source, names));
    jitter_arithmetic_spelling(prog, rng);
    if (rng.uniform01() < kWrapProbability && !prog.top_statements.empty()) {
        lang::IfStmt wrapper;
        wrapper.branches.push_back({lang::make_bool(true), std::move(prog.top_statements)});
        prog.top_statements.clear();
        prog.top_statements.push_back(lang::Stmt{std::move(wrapper)});
    }
    // Re-validate (definite assignment) through the canonical text.
    prog = lang::parse_source(lang::render(prog));
    return prog;
}

inline std::vector<std::vector<std::string>> reference_outputs(const ProblemSpec& problem) {
    std::vector<std::vector<std::string>> out;
    for (const Probe& probe : problem.probes) out.push_back(problem.reference(probe));
    return out;
}

// True when the program prints exactly the expected lines on every probe.
inline bool matches_outputs(const lang::Program& prog, const std::vector<Probe>& probes,
                            const std::vector<std::vector<std::string>>& expected) {
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const lang::ExecResult r = lang::interpret(prog, probes[i].inputs);
        if (r.outcome != lang::ExecOutcome::Ok || r.printed != expected[i]) return false;
    }
    return true;
}

inline constexpr std::size_t kMaxAttempts = 20;

}  // namespace detail

inline std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const auto& p : detail::problem_specs()) names.push_back(p.name);
    return names;
}

// Generates the classification corpus: one class per problem, every program
// verified against the native reference on all probes before acceptance.
inline Dataset generate_classification(const GeneratorSpec& spec) {
    const auto& problems = detail::problem_specs();
    const std::size_t n_problems = std::min(spec.num_problems, problems.size());
    if (n_problems == 0 || spec.programs_per_problem == 0) {
        throw GenerationError("corpus dimensions must be positive");
    }
    Dataset ds;
    ds.task = kTaskClassification;
    ds.num_classes = n_problems;
    const Rng root(spec.seed);
    for (std::size_t label = 0; label < n_problems; ++label) {
        const detail::ProblemSpec& problem = problems[label];
        Rng rng = root.fork("problem-" + problem.name);
        const auto expected = detail::reference_outputs(problem);
        std::set<std::string> seen_texts;
        for (std::size_t k = 0; k < spec.programs_per_problem; ++k) {
            lang::Program accepted;
            bool have = false;
            for (std::size_t attempt = 0; attempt < detail::kMaxAttempts; ++attempt) {
                const std::size_t vi = detail::weighted_pick(problem.variants, rng);
                lang::Program prog = detail::instantiate_variant(problem, vi, rng);
                if (!detail::matches_outputs(prog, problem.probes, expected)) continue;
                accepted = std::move(prog);
                have = true;
                if (seen_texts.insert(lang::render(accepted)).second) break;
                // Exact duplicate of an earlier program: keep trying for a
                // fresh surface form, but a duplicate is still acceptable.
            }
            if (!have) {
                throw GenerationError("could not generate a verified program for " + problem.name);
            }
            ds.samples.push_back({std::move(accepted), label, problem.probes});
        }
    }
    return ds;
}

// --- Bug planting ---

namespace detail {

// A candidate edit: flip one comparison operator or nudge one integer
// constant.  The choice vectors enumerate the replacement values.
struct MutationSite {
    bool is_comparison = false;
    std::size_t ordinal = 0;  // index among sites of the same kind, walk order
    std::vector<lang::BinOp> op_choices;
    std::vector<std::int64_t> int_choices;
};

inline bool is_comparison_op(lang::BinOp op) {
    switch (op) {
        case lang::BinOp::Eq:
        case lang::BinOp::Ne:
        case lang::BinOp::Lt:
        case lang::BinOp::Le:
        case lang::BinOp::Gt:
        case lang::BinOp::Ge:
            return true;
        default:
            return false;
    }
}

inline const std::vector<lang::BinOp>& comparison_ops() {
    static const std::vector<lang::BinOp> ops = {lang::BinOp::Eq, lang::BinOp::Ne,
                                                 lang::BinOp::Lt, lang::BinOp::Le,
                                                 lang::BinOp::Gt, lang::BinOp::Ge};
    return ops;
}

inline std::vector<MutationSite> collect_mutation_sites(const lang::Program& prog) {
    std::vector<MutationSite> sites;
    auto& prog_mut = const_cast<lang::Program&>(prog);
    std::size_t cmp_ord = 0, int_ord = 0;
    refactor::walk_program_exprs(prog_mut, [&](lang::Expr& e) {
        if (auto* b = std::get_if<lang::BinaryExpr>(&e.node)) {
            if (is_comparison_op(b->op)) {
                MutationSite s;
                s.is_comparison = true;
                s.ordinal = cmp_ord++;
                for (lang::BinOp op : comparison_ops()) {
                    if (op != b->op) s.op_choices.push_back(op);
                }
                sites.push_back(std::move(s));
            }
        } else if (auto* lit = std::get_if<lang::IntLit>(&e.node)) {
            MutationSite s;
            s.ordinal = int_ord++;
            if (lit->value < std::numeric_limits<std::int64_t>::max()) {
                s.int_choices.push_back(lit->value + 1);
            }
            if (lit->value > 0) s.int_choices.push_back(lit->value - 1);
            sites.push_back(std::move(s));
        }
    });
    return sites;
}

// Applies the site by re-walking to the same ordinal (the tree was copied).
inline void apply_mutation(lang::Program& prog, const MutationSite& site, lang::BinOp new_op,
                           std::int64_t new_int) {
    std::size_t cmp_ord = 0, int_ord = 0;
    refactor::walk_program_exprs(prog, [&](lang::Expr& e) {
        if (auto* b = std::get_if<lang::BinaryExpr>(&e.node)) {
            if (is_comparison_op(b->op)) {
                if (site.is_comparison && cmp_ord == site.ordinal) b->op = new_op;
                ++cmp_ord;
            }
        } else if (auto* lit = std::get_if<lang::IntLit>(&e.node)) {
            if (!site.is_comparison && int_ord == site.ordinal) lit->value = new_int;
            ++int_ord;
        }
    });
}

}  // namespace detail

// Plants one semantic defect: the mutated program must still complete
// normally on every probe while printing something different on at least one.
// Throws GenerationError when no such single edit is found within the
// attempt budget.
inline lang::Program plant_bug(const lang::Program& base, const std::vector<Probe>& probes,
                               Rng& rng) {
    std::vector<std::vector<std::string>> base_outputs;
    for (const Probe& probe : probes) {
        const lang::ExecResult r = lang::interpret(base, probe.inputs);
        if (r.outcome != lang::ExecOutcome::Ok) {
            throw GenerationError("bug planting requires a base program that runs cleanly");
        }
        base_outputs.push_back(r.printed);
    }
    const auto sites = detail::collect_mutation_sites(base);
    if (sites.empty()) throw GenerationError("program offers no mutation sites");
    for (std::size_t attempt = 0; attempt < detail::kMaxAttempts; ++attempt) {
        const detail::MutationSite& site = sites[rng.uniform_below(sites.size())];
        lang::BinOp new_op{};
        std::int64_t new_int = 0;
        if (site.is_comparison) {
            new_op = site.op_choices[rng.uniform_below(site.op_choices.size())];
        } else {
            if (site.int_choices.empty()) continue;
            new_int = site.int_choices[rng.uniform_below(site.int_choices.size())];
        }
        lang::Program mutant = base;
        detail::apply_mutation(mutant, site, new_op, new_int);
        bool ok = true, differs = false;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const lang::ExecResult r = lang::interpret(mutant, probes[i].inputs);
            if (r.outcome != lang::ExecOutcome::Ok) {
                ok = false;
                break;
            }
            if (r.printed != base_outputs[i]) differs = true;
        }
        if (ok && differs) return mutant;
    }
    throw GenerationError("no single-edit defect changed a probe within the attempt budget");
}

// Generates the bug-detection corpus from the same base programs the
// classification generator produces for this spec.  Each selected base gets a
// buggy twin stored immediately after it; labels: 0 = correct, 1 = buggy.
inline Dataset generate_bug_detection(const GeneratorSpec& spec) {
    if (spec.mutation_rate < 0.0 || spec.mutation_rate > 1.0) {
        throw GenerationError("mutation rate must lie in [0, 1]");
    }
    const Dataset base = generate_classification(spec);
    Dataset ds;
    ds.task = kTaskBugDetection;
    ds.num_classes = 2;
    Rng rng = Rng(spec.seed).fork("mutation");
    for (const Sample& s : base.samples) {
        const bool pair_it = rng.uniform01() < spec.mutation_rate;
        ds.samples.push_back({s.program, 0, s.probes});
        if (pair_it) {
            lang::Program mutant = plant_bug(s.program, s.probes, rng);
            ds.samples.push_back({std::move(mutant), 1, s.probes});
        }
    }
    return ds;
}

// Dispatch by task name (the two names accepted in dataset files).
inline Dataset generate(const std::string& task, const GeneratorSpec& spec) {
    if (task == kTaskClassification) return generate_classification(spec);
    if (task == kTaskBugDetection) return generate_bug_detection(spec);
    throw GenerationError("unknown task: " + task);
}

// --- Train/test split ---

// Stratified 80/20 split by stored order: within each class, the first 80%
// (floor) of samples are training, the rest test.  Deterministic from the
// dataset alone, so a reloaded file splits identically.  Bug-detection twins
// are stored adjacent with equal class counts, which keeps each correct/buggy
// pair on one side of the split.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline SplitIndices split_dataset(const Dataset& ds, double train_fraction = 0.8) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw GenerationError("train fraction must lie strictly between 0 and 1");
    }
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        by_class.at(ds.samples[i].label).push_back(i);
    }
    SplitIndices split;
    for (const auto& members : by_class) {
        const auto train_n =
            static_cast<std::size_t>(static_cast<double>(members.size()) * train_fraction);
        for (std::size_t j = 0; j < members.size(); ++j) {
            (j < train_n ? split.train : split.test).push_back(members[j]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// --- Dataset files (.mpyds) ---
//
//   MPYDS v1 <task> <num_classes>
//   ### <label> <probe;probe;...>      e.g. "12,18;7,13" ("-" when no probes)
//   <program text, canonical form>
//   <blank line>
//   ### ...

namespace detail {

inline std::string probes_to_string(const std::vector<Probe>& probes) {
    if (probes.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (i > 0) out += ';';
        for (std::size_t j = 0; j < probes[i].inputs.size(); ++j) {
            if (j > 0) out += ',';
            out += std::to_string(probes[i].inputs[j]);
        }
    }
    return out;
}

inline std::int64_t parse_int_field(const std::string& text, std::size_t line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw FormatError(line, "expected an integer, got '" + text + "'");
    }
}

inline std::vector<Probe> parse_probes(const std::string& text, std::size_t line) {
    if (text == "-") return {};
    std::vector<Probe> probes;
    std::stringstream by_probe(text);
    std::string probe_text;
    while (std::getline(by_probe, probe_text, ';')) {
        Probe p;
        std::stringstream by_value(probe_text);
        std::string value_text;
        while (std::getline(by_value, value_text, ',')) {
            p.inputs.push_back(parse_int_field(value_text, line));
        }
        if (p.inputs.empty()) throw FormatError(line, "empty probe");
        probes.push_back(std::move(p));
    }
    if (probes.empty()) throw FormatError(line, "empty probe list");
    return probes;
}

}  // namespace detail

inline void save_dataset(const Dataset& ds, std::ostream& out) {
    out << "MPYDS v1 " << ds.task << ' ' << ds.num_classes << '\n';
    for (const Sample& s : ds.samples) {
        out << "### " << s.label << ' ' << detail::probes_to_string(s.probes) << '\n';
        out << lang::render(s.program);
        out << '\n';
    }
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(0, "cannot write dataset file: " + path);
    save_dataset(ds, out);
}

inline Dataset load_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw FormatError(1, "empty dataset file");
    ++line_no;
    {
        std::stringstream header(line);
        std::string magic, version;
        long long classes = 0;
        if (!(header >> magic >> version >> ds.task >> classes) || magic != "MPYDS" ||
            version != "v1" || classes <= 0) {
            throw FormatError(line_no, "malformed header (expected 'MPYDS v1 <task> <classes>')");
        }
        std::string extra;
        if (header >> extra) throw FormatError(line_no, "trailing content after header");
        if (ds.task != kTaskClassification && ds.task != kTaskBugDetection) {
            throw FormatError(line_no, "unknown task: " + ds.task);
        }
        ds.num_classes = static_cast<std::size_t>(classes);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;  // separator
        if (line.rfind("### ", 0) != 0) {
            throw FormatError(line_no, "expected a '### <label> <probes>' sample header");
        }
        const std::size_t header_line = line_no;
        std::stringstream header(line.substr(4));
        std::string label_text, probes_text, extra;
        if (!(header >> label_text >> probes_text) || (header >> extra)) {
            throw FormatError(header_line, "sample header needs exactly a label and probes");
        }
        const std::int64_t label = detail::parse_int_field(label_text, header_line);
        if (label < 0 || static_cast<std::size_t>(label) >= ds.num_classes) {
            throw FormatError(header_line, "label out of range: " + label_text);
        }
        Sample s;
        s.label = static_cast<std::size_t>(label);
        s.probes = detail::parse_probes(probes_text, header_line);
        std::string source;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) break;  // end of this sample's program
            source += line;
            source += '\n';
        }
        if (source.empty()) throw FormatError(header_line, "sample has no program text");
        try {
            s.program = lang::parse_source(source);
        } catch (const lang::LexError& err) {
            throw FormatError(header_line + err.line, err.what());
        } catch (const lang::ParseError& err) {
            throw FormatError(header_line + err.line, err.what());
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(0, "cannot read dataset file: " + path);
    return load_dataset(in);
}

}  // namespace mixcode::corpus
