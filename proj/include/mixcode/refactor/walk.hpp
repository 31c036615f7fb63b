#pragma once

// Small AST traversal helpers shared by the refactoring engine and the
// bug-injection mutations.  Traversal order is deterministic: top-level
// statements first, then function bodies in definition order, each block
// visited in statement order with nested blocks inline (if branches, else,
// loop bodies).

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mixcode/lang/ast.hpp"

namespace mixcode::refactor {

using lang::Expr;
using lang::Program;
using lang::Stmt;

// Visits every expression in an expression tree, parents before children.
template <typename ExprT, typename Fn>
void walk_expr(ExprT& expr, Fn&& fn) {
    fn(expr);
    if (auto* b = std::get_if<lang::BinaryExpr>(&expr.node)) {
        for (auto& a : b->args) walk_expr(a, fn);
    } else if (auto* u = std::get_if<lang::UnaryExpr>(&expr.node)) {
        for (auto& a : u->args) walk_expr(a, fn);
    } else if (auto* c = std::get_if<lang::CondExpr>(&expr.node)) {
        for (auto& a : c->args) walk_expr(a, fn);
    } else if (auto* call = std::get_if<lang::CallExpr>(&expr.node)) {
        for (auto& a : call->args) walk_expr(a, fn);
    }
}

// Visits every top-level expression of every statement in a block, recursing
// into nested blocks.
template <typename StmtVec, typename Fn>
void walk_block_exprs(StmtVec& block, Fn&& fn) {
    for (auto& stmt : block) {
        if (auto* s = std::get_if<lang::AssignStmt>(&stmt.node)) {
            walk_expr(s->value, fn);
        } else if (auto* s = std::get_if<lang::PrintStmt>(&stmt.node)) {
            walk_expr(s->value, fn);
        } else if (auto* s = std::get_if<lang::IfStmt>(&stmt.node)) {
            for (auto& br : s->branches) {
                walk_expr(br.cond, fn);
                walk_block_exprs(br.body, fn);
            }
            walk_block_exprs(s->else_body, fn);
        } else if (auto* s = std::get_if<lang::WhileStmt>(&stmt.node)) {
            walk_expr(s->cond, fn);
            walk_block_exprs(s->body, fn);
        } else if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
            for (auto& b : s->bounds) walk_expr(b, fn);
            walk_block_exprs(s->body, fn);
        } else if (auto* s = std::get_if<lang::ReturnStmt>(&stmt.node)) {
            if (s->value) walk_expr(*s->value, fn);
        } else if (auto* s = std::get_if<lang::ExprStmt>(&stmt.node)) {
            walk_expr(s->value, fn);
        }
    }
}

template <typename ProgT, typename Fn>
void walk_program_exprs(ProgT& prog, Fn&& fn) {
    for (auto& fun : prog.functions) walk_block_exprs(fun.body, fn);
    walk_block_exprs(prog.top_statements, fn);
}

// Visits every statement list in the program: top level first, then function
// bodies, recursing into nested blocks after the statement that owns them.
template <typename StmtVec, typename Fn>
void walk_nested_blocks(StmtVec& block, Fn&& fn) {
    fn(block);
    for (auto& stmt : block) {
        if (auto* s = std::get_if<lang::IfStmt>(&stmt.node)) {
            for (auto& br : s->branches) walk_nested_blocks(br.body, fn);
            if (s->has_else) walk_nested_blocks(s->else_body, fn);
        } else if (auto* s = std::get_if<lang::WhileStmt>(&stmt.node)) {
            walk_nested_blocks(s->body, fn);
        } else if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
            walk_nested_blocks(s->body, fn);
        }
    }
}

template <typename ProgT, typename Fn>
void walk_program_blocks(ProgT& prog, Fn&& fn) {
    walk_nested_blocks(prog.top_statements, fn);
    for (auto& fun : prog.functions) walk_nested_blocks(fun.body, fn);
}

// All identifiers used anywhere in the program: function names, parameters,
// assignment targets, loop variables, and variable references.  Used to pick
// capture-free fresh names.
inline std::set<std::string> collect_all_names(const Program& prog) {
    std::set<std::string> names;
    for (const auto& fn : prog.functions) {
        names.insert(fn.name);
        for (const auto& p : fn.params) names.insert(p.name);
    }
    auto from_block = [&names](const std::vector<Stmt>& block) {
        for (const Stmt& stmt : block) {
            if (const auto* s = std::get_if<lang::AssignStmt>(&stmt.node)) {
                names.insert(s->target);
            } else if (const auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
                names.insert(s->var);
            }
        }
    };
    walk_program_blocks(prog, from_block);
    walk_program_exprs(prog, [&names](const Expr& e) {
        if (const auto* v = std::get_if<lang::VarRef>(&e.node)) names.insert(v->name);
    });
    return names;
}

// Smallest `<prefix><N>` not present in the program.
inline std::string fresh_name(const Program& prog, const std::string& prefix) {
    const std::set<std::string> used = collect_all_names(prog);
    for (int n = 0;; ++n) {
        std::string candidate = prefix + std::to_string(n);
        if (!used.count(candidate)) return candidate;
    }
}

}  // namespace mixcode::refactor
