#pragma once

// MiniPy abstract syntax.
//
// Plain value types throughout: programs copy, compare, and hash structurally,
// which is what the refactoring engine and the round-trip suites lean on.
// Nodes carry no source positions; rendering is canonical, so positions would
// only go stale under transformation.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mixcode::lang {

enum class BinOp { Add, Sub, Mul, FloorDiv, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };

struct Expr;

struct IntLit {
    std::int64_t value = 0;
    bool operator==(const IntLit&) const = default;
};
struct StrLit {
    std::string value;  // without quotes
    bool operator==(const StrLit&) const = default;
};
struct BoolLit {
    bool value = false;
    bool operator==(const BoolLit&) const = default;
};
struct NoneLit {
    bool operator==(const NoneLit&) const = default;
};
struct VarRef {
    std::string name;
    bool operator==(const VarRef&) const = default;
};
struct BinaryExpr {
    BinOp op{};
    std::vector<Expr> args;  // [lhs, rhs]
    bool operator==(const BinaryExpr&) const = default;
};
struct UnaryExpr {
    UnOp op{};
    std::vector<Expr> args;  // [operand]
    bool operator==(const UnaryExpr&) const = default;
};
// `value_if_true if cond else value_if_false`; args = [cond, if_true, if_false].
struct CondExpr {
    std::vector<Expr> args;
    bool operator==(const CondExpr&) const = default;
};
// Callee is a user function name, `input`, or a dotted builtin like `api.add`.
struct CallExpr {
    std::string callee;
    std::vector<Expr> args;
    bool operator==(const CallExpr&) const = default;
};

struct Expr {
    std::variant<IntLit, StrLit, BoolLit, NoneLit, VarRef, BinaryExpr, UnaryExpr, CondExpr,
                 CallExpr>
        node;
    bool operator==(const Expr&) const = default;
};

struct Stmt;

struct AssignStmt {
    std::string target;
    Expr value;
    bool operator==(const AssignStmt&) const = default;
};
struct PrintStmt {
    Expr value;
    bool operator==(const PrintStmt&) const = default;
};
struct IfBranch {
    Expr cond;
    std::vector<Stmt> body;
    bool operator==(const IfBranch&) const = default;
};
struct IfStmt {
    std::vector<IfBranch> branches;  // if + elif*
    bool has_else = false;
    std::vector<Stmt> else_body;
    bool operator==(const IfStmt&) const = default;
};
struct WhileStmt {
    Expr cond;
    std::vector<Stmt> body;
    bool operator==(const WhileStmt&) const = default;
};
struct ForRangeStmt {
    std::string var;
    std::vector<Expr> bounds;  // [stop] or [start, stop]
    std::vector<Stmt> body;
    bool operator==(const ForRangeStmt&) const = default;
};
struct ReturnStmt {
    std::optional<Expr> value;
    bool operator==(const ReturnStmt&) const = default;
};
struct ExprStmt {
    Expr value;
    bool operator==(const ExprStmt&) const = default;
};
struct PassStmt {
    bool operator==(const PassStmt&) const = default;
};

struct Stmt {
    std::variant<AssignStmt, PrintStmt, IfStmt, WhileStmt, ForRangeStmt, ReturnStmt, ExprStmt,
                 PassStmt>
        node;
    bool operator==(const Stmt&) const = default;
};

struct Param {
    std::string name;
    std::optional<std::int64_t> default_value;
    bool operator==(const Param&) const = default;
};
struct FunctionDef {
    std::string name;
    std::vector<Param> params;
    std::vector<Stmt> body;
    bool operator==(const FunctionDef&) const = default;
};

struct Program {
    std::vector<FunctionDef> functions;  // rendered first, in order
    std::vector<Stmt> top_statements;
    bool operator==(const Program&) const = default;
};

// --- Convenience builders (used by refactorings and the corpus generator) ---

inline Expr make_int(std::int64_t v) { return Expr{IntLit{v}}; }
inline Expr make_str(std::string s) { return Expr{StrLit{std::move(s)}}; }
inline Expr make_bool(bool v) { return Expr{BoolLit{v}}; }
inline Expr make_none() { return Expr{NoneLit{}}; }
inline Expr make_var(std::string name) { return Expr{VarRef{std::move(name)}}; }
inline Expr make_binary(BinOp op, Expr lhs, Expr rhs) {
    BinaryExpr b;
    b.op = op;
    b.args.push_back(std::move(lhs));
    b.args.push_back(std::move(rhs));
    return Expr{std::move(b)};
}
inline Expr make_unary(UnOp op, Expr operand) {
    UnaryExpr u;
    u.op = op;
    u.args.push_back(std::move(operand));
    return Expr{std::move(u)};
}
inline Expr make_cond(Expr cond, Expr if_true, Expr if_false) {
    CondExpr c;
    c.args.push_back(std::move(cond));
    c.args.push_back(std::move(if_true));
    c.args.push_back(std::move(if_false));
    return Expr{std::move(c)};
}
inline Expr make_call(std::string callee, std::vector<Expr> args) {
    return Expr{CallExpr{std::move(callee), std::move(args)}};
}

}  // namespace mixcode::lang
