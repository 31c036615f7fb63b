#pragma once

// MiniPy tree-walking interpreter.
//
// Deterministic by construction: the only inputs are the program, the integer
// input stream consumed by `input()`, and the statement step limit.  Runtime
// failures are captured in ExecResult.outcome rather than thrown, because the
// corpus generator and the semantic-preservation oracle both need to compare
// failing runs as values.
//
// Semantics notes (MiniPy is its own small language, not Python):
//   - integers are 64-bit and checked; overflow is a runtime error
//   - `//` and `%` use floor semantics (sign follows the divisor)
//   - conditions must be booleans; `and`/`or` short-circuit over booleans
//   - `==`/`!=` compare any two values (different types are simply unequal;
//     bools and ints are distinct types)
//   - `<` `<=` `>` `>=` require integers
//   - functions see only their parameters and locals; every step of a
//     statement (including each loop-header re-evaluation) costs one step

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mixcode/lang/ast.hpp"

namespace mixcode::lang {

// None, int, bool, string.
using Value = std::variant<std::monostate, std::int64_t, bool, std::string>;

enum class RuntimeErrorKind {
    DivisionByZero,
    TypeMismatch,
    InputExhausted,
    UnknownName,
    IntegerOverflow,
    RecursionLimit,
};

enum class ExecOutcome { Ok, RuntimeError, StepLimitExceeded };

struct ExecResult {
    std::vector<std::string> printed;
    std::optional<Value> returned;  // set when a top-level `return` ran
    std::size_t steps_used = 0;
    ExecOutcome outcome = ExecOutcome::Ok;
    std::optional<RuntimeErrorKind> error_kind;
    std::string error_message;

    bool operator==(const ExecResult&) const = default;
};

inline constexpr std::size_t kDefaultStepLimit = 100000;

// Calls may nest (recursion is the loop form of several programs), but the
// evaluator recurses on the host stack, so depth is capped well before that
// stack could overflow.
inline constexpr std::size_t kMaxCallDepth = 256;

inline const char* runtime_error_kind_name(RuntimeErrorKind k) {
    switch (k) {
        case RuntimeErrorKind::DivisionByZero: return "division-by-zero";
        case RuntimeErrorKind::TypeMismatch: return "type-mismatch";
        case RuntimeErrorKind::InputExhausted: return "input-exhausted";
        case RuntimeErrorKind::UnknownName: return "unknown-name";
        case RuntimeErrorKind::IntegerOverflow: return "integer-overflow";
        case RuntimeErrorKind::RecursionLimit: return "recursion-limit";
    }
    return "?";
}

// Formats a value the way `print` does.
inline std::string format_value(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return "None";
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "True" : "False";
    return std::get<std::string>(v);
}

// Builtin table for dotted `api.*` calls.  All entries take two integers.
// Synonym groups pair each name with a rename target; renamed calls stay
// executable, though not necessarily behavior-equal (api.add vs api.delete).
struct ApiBuiltin {
    std::size_t arity;
    std::int64_t (*fn)(std::int64_t, std::int64_t);
};

inline const std::map<std::string, ApiBuiltin>& api_builtins() {
    static const std::map<std::string, ApiBuiltin> table = {
        {"api.add", {2, [](std::int64_t a, std::int64_t b) { return a + b; }}},
        {"api.delete", {2, [](std::int64_t a, std::int64_t b) { return a - b; }}},
        {"api.sub", {2, [](std::int64_t a, std::int64_t b) { return a - b; }}},
        {"api.remove", {2, [](std::int64_t a, std::int64_t b) { return a - b; }}},
        {"api.mul", {2, [](std::int64_t a, std::int64_t b) { return a * b; }}},
        {"api.times", {2, [](std::int64_t a, std::int64_t b) { return a * b; }}},
        {"api.max", {2, [](std::int64_t a, std::int64_t b) { return a > b ? a : b; }}},
        {"api.top", {2, [](std::int64_t a, std::int64_t b) { return a > b ? a : b; }}},
        {"api.min", {2, [](std::int64_t a, std::int64_t b) { return a < b ? a : b; }}},
        {"api.bottom", {2, [](std::int64_t a, std::int64_t b) { return a < b ? a : b; }}},
    };
    return table;
}

namespace detail {

struct MiniRuntimeError {
    RuntimeErrorKind kind;
    std::string message;
};
struct StepLimitSignal {};

class Interp {
public:
    Interp(const Program& prog, const std::vector<std::int64_t>& inputs, std::size_t step_limit)
        : prog_(prog), inputs_(inputs), step_limit_(step_limit) {}

    ExecResult run() {
        ExecResult result;
        try {
            std::map<std::string, Value> top_env;
            std::optional<Value> ret = exec_block(prog_.top_statements, top_env);
            result.returned = ret;
        } catch (const MiniRuntimeError& err) {
            result.outcome = ExecOutcome::RuntimeError;
            result.error_kind = err.kind;
            result.error_message = err.message;
        } catch (const StepLimitSignal&) {
            result.outcome = ExecOutcome::StepLimitExceeded;
            result.error_message = "step limit exceeded";
        }
        result.printed = std::move(printed_);
        result.steps_used = steps_;
        return result;
    }

private:
    const Program& prog_;
    const std::vector<std::int64_t>& inputs_;
    std::size_t step_limit_;
    std::size_t input_pos_ = 0;
    std::size_t steps_ = 0;
    std::vector<std::string> printed_;

    [[noreturn]] static void raise(RuntimeErrorKind kind, std::string message) {
        throw MiniRuntimeError{kind, std::move(message)};
    }

    void step() {
        if (++steps_ > step_limit_) throw StepLimitSignal{};
    }

    const FunctionDef* find_function(const std::string& name) const {
        for (const FunctionDef& fn : prog_.functions) {
            if (fn.name == name) return &fn;
        }
        return nullptr;
    }

    // Executes a block; returns a value if a `return` fired.
    std::optional<Value> exec_block(const std::vector<Stmt>& block,
                                    std::map<std::string, Value>& env) {
        for (const Stmt& stmt : block) {
            std::optional<Value> ret = exec_stmt(stmt, env);
            if (ret) return ret;
        }
        return std::nullopt;
    }

    std::optional<Value> exec_stmt(const Stmt& stmt, std::map<std::string, Value>& env) {
        step();
        if (const auto* s = std::get_if<AssignStmt>(&stmt.node)) {
            env[s->target] = eval(s->value, env);
            return std::nullopt;
        }
        if (const auto* s = std::get_if<PrintStmt>(&stmt.node)) {
            printed_.push_back(format_value(eval(s->value, env)));
            return std::nullopt;
        }
        if (const auto* s = std::get_if<IfStmt>(&stmt.node)) {
            for (const IfBranch& br : s->branches) {
                if (truth(eval(br.cond, env))) return exec_block(br.body, env);
            }
            if (s->has_else) return exec_block(s->else_body, env);
            return std::nullopt;
        }
        if (const auto* s = std::get_if<WhileStmt>(&stmt.node)) {
            while (truth(eval(s->cond, env))) {
                std::optional<Value> ret = exec_block(s->body, env);
                if (ret) return ret;
                step();  // each loop-header re-evaluation costs a step
            }
            return std::nullopt;
        }
        if (const auto* s = std::get_if<ForRangeStmt>(&stmt.node)) {
            std::int64_t start = 0;
            std::int64_t stop = 0;
            if (s->bounds.size() == 1) {
                stop = as_int(eval(s->bounds[0], env), "range bound");
            } else {
                start = as_int(eval(s->bounds[0], env), "range bound");
                stop = as_int(eval(s->bounds[1], env), "range bound");
            }
            for (std::int64_t i = start; i < stop; ++i) {
                env[s->var] = Value{i};
                std::optional<Value> ret = exec_block(s->body, env);
                if (ret) return ret;
                step();  // per-iteration loop bookkeeping
            }
            return std::nullopt;
        }
        if (const auto* s = std::get_if<ReturnStmt>(&stmt.node)) {
            if (s->value) return eval(*s->value, env);
            return Value{std::monostate{}};
        }
        if (const auto* s = std::get_if<ExprStmt>(&stmt.node)) {
            eval(s->value, env);
            return std::nullopt;
        }
        return std::nullopt;  // pass
    }

    bool truth(const Value& v) {
        if (const auto* b = std::get_if<bool>(&v)) return *b;
        raise(RuntimeErrorKind::TypeMismatch,
              "condition must be a boolean, got " + format_value(v));
    }

    std::int64_t as_int(const Value& v, const char* what) {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        raise(RuntimeErrorKind::TypeMismatch,
              std::string(what) + " must be an integer, got " + format_value(v));
    }

    Value eval(const Expr& expr, std::map<std::string, Value>& env) {
        if (const auto* e = std::get_if<IntLit>(&expr.node)) return Value{e->value};
        if (const auto* e = std::get_if<StrLit>(&expr.node)) return Value{e->value};
        if (const auto* e = std::get_if<BoolLit>(&expr.node)) return Value{e->value};
        if (std::get_if<NoneLit>(&expr.node)) return Value{std::monostate{}};
        if (const auto* e = std::get_if<VarRef>(&expr.node)) {
            auto it = env.find(e->name);
            if (it == env.end()) {
                raise(RuntimeErrorKind::UnknownName, "name '" + e->name + "' is not defined");
            }
            return it->second;
        }
        if (const auto* e = std::get_if<UnaryExpr>(&expr.node)) {
            Value v = eval(e->args[0], env);
            if (e->op == UnOp::Not) {
                if (const auto* b = std::get_if<bool>(&v)) return Value{!*b};
                raise(RuntimeErrorKind::TypeMismatch, "not requires a boolean");
            }
            const std::int64_t i = as_int(v, "unary minus operand");
            std::int64_t out;
            if (__builtin_sub_overflow(std::int64_t{0}, i, &out)) {
                raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in negation");
            }
            return Value{out};
        }
        if (const auto* e = std::get_if<BinaryExpr>(&expr.node)) return eval_binary(*e, env);
        if (const auto* e = std::get_if<CondExpr>(&expr.node)) {
            return truth(eval(e->args[0], env)) ? eval(e->args[1], env) : eval(e->args[2], env);
        }
        const auto& call = std::get<CallExpr>(expr.node);
        return eval_call(call, env);
    }

    Value eval_binary(const BinaryExpr& e, std::map<std::string, Value>& env) {
        // Short-circuit forms first.
        if (e.op == BinOp::And || e.op == BinOp::Or) {
            Value lhs = eval(e.args[0], env);
            const auto* lb = std::get_if<bool>(&lhs);
            if (lb == nullptr) raise(RuntimeErrorKind::TypeMismatch, "and/or require booleans");
            if (e.op == BinOp::And && !*lb) return Value{false};
            if (e.op == BinOp::Or && *lb) return Value{true};
            Value rhs = eval(e.args[1], env);
            const auto* rb = std::get_if<bool>(&rhs);
            if (rb == nullptr) raise(RuntimeErrorKind::TypeMismatch, "and/or require booleans");
            return Value{*rb};
        }
        Value lhs = eval(e.args[0], env);
        Value rhs = eval(e.args[1], env);
        if (e.op == BinOp::Eq || e.op == BinOp::Ne) {
            const bool eq = lhs == rhs;  // different types compare unequal
            return Value{e.op == BinOp::Eq ? eq : !eq};
        }
        const std::int64_t a = as_int(lhs, "operand");
        const std::int64_t b = as_int(rhs, "operand");
        switch (e.op) {
            case BinOp::Lt: return Value{a < b};
            case BinOp::Le: return Value{a <= b};
            case BinOp::Gt: return Value{a > b};
            case BinOp::Ge: return Value{a >= b};
            case BinOp::Add: {
                std::int64_t out;
                if (__builtin_add_overflow(a, b, &out)) {
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in +");
                }
                return Value{out};
            }
            case BinOp::Sub: {
                std::int64_t out;
                if (__builtin_sub_overflow(a, b, &out)) {
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in -");
                }
                return Value{out};
            }
            case BinOp::Mul: {
                std::int64_t out;
                if (__builtin_mul_overflow(a, b, &out)) {
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in *");
                }
                return Value{out};
            }
            case BinOp::FloorDiv: {
                if (b == 0) raise(RuntimeErrorKind::DivisionByZero, "floor division by zero");
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in //");
                }
                std::int64_t q = a / b;
                if ((a % b != 0) && ((a % b < 0) != (b < 0))) --q;
                return Value{q};
            }
            case BinOp::Mod: {
                if (b == 0) raise(RuntimeErrorKind::DivisionByZero, "modulo by zero");
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return Value{std::int64_t{0}};
                std::int64_t m = a % b;
                if (m != 0 && (m < 0) != (b < 0)) m += b;
                return Value{m};
            }
            default: break;
        }
        raise(RuntimeErrorKind::TypeMismatch, "unsupported operation");
    }

    Value eval_call(const CallExpr& call, std::map<std::string, Value>& env) {
        if (call.callee == "input") {
            if (input_pos_ >= inputs_.size()) {
                raise(RuntimeErrorKind::InputExhausted, "input() with no remaining inputs");
            }
            return Value{inputs_[input_pos_++]};
        }
        if (call.callee.find('.') != std::string::npos) {
            const auto& table = api_builtins();
            auto it = table.find(call.callee);
            if (it == table.end()) {
                raise(RuntimeErrorKind::UnknownName,
                      "builtin '" + call.callee + "' is not defined");
            }
            if (call.args.size() != it->second.arity) {
                raise(RuntimeErrorKind::TypeMismatch,
                      "builtin '" + call.callee + "' takes " +
                          std::to_string(it->second.arity) + " arguments");
            }
            const std::int64_t a = as_int(eval(call.args[0], env), "builtin argument");
            const std::int64_t b = as_int(eval(call.args[1], env), "builtin argument");
            // Builtins share the checked-arithmetic rules.
            if (it->first == "api.add") {
                std::int64_t out;
                if (__builtin_add_overflow(a, b, &out))
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in api.add");
                return Value{out};
            }
            if (it->first == "api.sub" || it->first == "api.delete" || it->first == "api.remove") {
                std::int64_t out;
                if (__builtin_sub_overflow(a, b, &out))
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in builtin");
                return Value{out};
            }
            if (it->first == "api.mul" || it->first == "api.times") {
                std::int64_t out;
                if (__builtin_mul_overflow(a, b, &out))
                    raise(RuntimeErrorKind::IntegerOverflow, "integer overflow in builtin");
                return Value{out};
            }
            return Value{it->second.fn(a, b)};
        }
        const FunctionDef* fn = find_function(call.callee);
        if (fn == nullptr) {
            raise(RuntimeErrorKind::UnknownName,
                  "function '" + call.callee + "' is not defined");
        }
        if (call.args.size() > fn->params.size()) {
            raise(RuntimeErrorKind::TypeMismatch, "too many arguments to " + call.callee);
        }
        std::map<std::string, Value> local;
        for (std::size_t i = 0; i < fn->params.size(); ++i) {
            if (i < call.args.size()) {
                local[fn->params[i].name] = eval(call.args[i], env);
            } else if (fn->params[i].default_value) {
                local[fn->params[i].name] = Value{*fn->params[i].default_value};
            } else {
                raise(RuntimeErrorKind::TypeMismatch, "missing argument to " + call.callee);
            }
        }
        if (call_depth_ >= kMaxCallDepth) {
            raise(RuntimeErrorKind::RecursionLimit,
                  "call depth exceeds " + std::to_string(kMaxCallDepth));
        }
        ++call_depth_;
        std::optional<Value> ret = exec_block(fn->body, local);
        --call_depth_;
        return ret ? *ret : Value{std::monostate{}};
    }

    std::size_t call_depth_ = 0;
};

}  // namespace detail

// Runs `prog` against an integer input stream under a statement step limit.
inline ExecResult interpret(const Program& prog, const std::vector<std::int64_t>& inputs,
                            std::size_t step_limit = kDefaultStepLimit) {
    return detail::Interp(prog, inputs, step_limit).run();
}

// Oracle used by the refactoring suite: observable behavior of a run.
inline bool same_behavior(const ExecResult& a, const ExecResult& b) {
    return a.printed == b.printed && a.returned == b.returned && a.outcome == b.outcome &&
           a.error_kind == b.error_kind;
}

}  // namespace mixcode::lang
