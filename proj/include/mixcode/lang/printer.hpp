#pragma once

// Canonical MiniPy renderer.
//
// render() is the inverse of parse() up to formatting: 4-space indentation,
// LF line endings, single spaces around binary operators, `f(a, b)` argument
// spacing, `name=0` parameter defaults, and parentheses only where precedence
// requires them.  Because parentheses leave no AST node, rendering is a fixed
// point: render(parse(tokenize(render(p)))) == render(p).

#include <string>

#include "mixcode/lang/ast.hpp"

namespace mixcode::lang {

namespace detail {

// Precedence levels, loosest first; atoms are tightest.
enum : int {
    kPrecCond = 1,
    kPrecOr = 2,
    kPrecAnd = 3,
    kPrecNot = 4,
    kPrecCmp = 5,
    kPrecAdd = 6,
    kPrecMul = 7,
    kPrecUnary = 8,
    kPrecAtom = 9,
};

inline int binop_prec(BinOp op) {
    switch (op) {
        case BinOp::Or: return kPrecOr;
        case BinOp::And: return kPrecAnd;
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return kPrecCmp;
        case BinOp::Add:
        case BinOp::Sub: return kPrecAdd;
        case BinOp::Mul:
        case BinOp::FloorDiv:
        case BinOp::Mod: return kPrecMul;
    }
    return kPrecAtom;
}

inline const char* binop_lexeme(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::FloorDiv: return "//";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "and";
        case BinOp::Or: return "or";
    }
    return "?";
}

class Renderer {
public:
    std::string render_program(const Program& prog) {
        out_.clear();
        for (const FunctionDef& fn : prog.functions) render_function(fn);
        render_block(prog.top_statements, 0);
        return out_;
    }

    std::string render_expression(const Expr& expr) {
        out_.clear();
        emit_expr(expr, 0);
        return out_;
    }

private:
    std::string out_;

    void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 4, ' '); }

    void render_function(const FunctionDef& fn) {
        out_ += "def ";
        out_ += fn.name;
        out_ += '(';
        for (std::size_t i = 0; i < fn.params.size(); ++i) {
            if (i > 0) out_ += ", ";
            out_ += fn.params[i].name;
            if (fn.params[i].default_value) {
                out_ += '=';
                out_ += std::to_string(*fn.params[i].default_value);
            }
        }
        out_ += "):\n";
        render_block(fn.body, 1);
    }

    void render_block(const std::vector<Stmt>& block, int depth) {
        for (const Stmt& stmt : block) render_stmt(stmt, depth);
    }

    void render_stmt(const Stmt& stmt, int depth) {
        if (const auto* s = std::get_if<AssignStmt>(&stmt.node)) {
            indent(depth);
            out_ += s->target;
            out_ += " = ";
            emit_expr(s->value, 0);
            out_ += '\n';
        } else if (const auto* s = std::get_if<PrintStmt>(&stmt.node)) {
            indent(depth);
            out_ += "print(";
            emit_expr(s->value, 0);
            out_ += ")\n";
        } else if (const auto* s = std::get_if<IfStmt>(&stmt.node)) {
            for (std::size_t i = 0; i < s->branches.size(); ++i) {
                indent(depth);
                out_ += i == 0 ? "if " : "elif ";
                emit_expr(s->branches[i].cond, 0);
                out_ += ":\n";
                render_block(s->branches[i].body, depth + 1);
            }
            if (s->has_else) {
                indent(depth);
                out_ += "else:\n";
                render_block(s->else_body, depth + 1);
            }
        } else if (const auto* s = std::get_if<WhileStmt>(&stmt.node)) {
            indent(depth);
            out_ += "while ";
            emit_expr(s->cond, 0);
            out_ += ":\n";
            render_block(s->body, depth + 1);
        } else if (const auto* s = std::get_if<ForRangeStmt>(&stmt.node)) {
            indent(depth);
            out_ += "for ";
            out_ += s->var;
            out_ += " in range(";
            emit_expr(s->bounds[0], 0);
            if (s->bounds.size() == 2) {
                out_ += ", ";
                emit_expr(s->bounds[1], 0);
            }
            out_ += "):\n";
            render_block(s->body, depth + 1);
        } else if (const auto* s = std::get_if<ReturnStmt>(&stmt.node)) {
            indent(depth);
            out_ += "return";
            if (s->value) {
                out_ += ' ';
                emit_expr(*s->value, 0);
            }
            out_ += '\n';
        } else if (const auto* s = std::get_if<ExprStmt>(&stmt.node)) {
            indent(depth);
            emit_expr(s->value, 0);
            out_ += '\n';
        } else {
            indent(depth);
            out_ += "pass\n";
        }
    }

    // Emits `expr`, parenthesizing when its precedence is below `min_prec`.
    void emit_expr(const Expr& expr, int min_prec) {
        const int prec = expr_prec(expr);
        const bool parens = prec < min_prec;
        if (parens) out_ += '(';
        if (const auto* e = std::get_if<IntLit>(&expr.node)) {
            out_ += std::to_string(e->value);
        } else if (const auto* e = std::get_if<StrLit>(&expr.node)) {
            out_ += '"';
            out_ += e->value;
            out_ += '"';
        } else if (const auto* e = std::get_if<BoolLit>(&expr.node)) {
            out_ += e->value ? "True" : "False";
        } else if (std::get_if<NoneLit>(&expr.node)) {
            out_ += "None";
        } else if (const auto* e = std::get_if<VarRef>(&expr.node)) {
            out_ += e->name;
        } else if (const auto* e = std::get_if<BinaryExpr>(&expr.node)) {
            const int p = binop_prec(e->op);
            // Left-associative: the right child needs strictly higher
            // precedence; comparisons do not chain, so both sides do.
            emit_expr(e->args[0], p == kPrecCmp ? p + 1 : p);
            out_ += ' ';
            out_ += binop_lexeme(e->op);
            out_ += ' ';
            emit_expr(e->args[1], p + 1);
        } else if (const auto* e = std::get_if<UnaryExpr>(&expr.node)) {
            if (e->op == UnOp::Not) {
                out_ += "not ";
                emit_expr(e->args[0], kPrecNot);
            } else {
                out_ += '-';
                emit_expr(e->args[0], kPrecUnary);
            }
        } else if (const auto* e = std::get_if<CondExpr>(&expr.node)) {
            emit_expr(e->args[1], kPrecOr);  // value-if-true
            out_ += " if ";
            emit_expr(e->args[0], kPrecOr);  // condition
            out_ += " else ";
            emit_expr(e->args[2], kPrecCond);  // value-if-false (right-assoc)
        } else if (const auto* e = std::get_if<CallExpr>(&expr.node)) {
            out_ += e->callee;
            out_ += '(';
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i > 0) out_ += ", ";
                emit_expr(e->args[i], 0);
            }
            out_ += ')';
        }
        if (parens) out_ += ')';
    }

    static int expr_prec(const Expr& expr) {
        if (const auto* b = std::get_if<BinaryExpr>(&expr.node)) return binop_prec(b->op);
        if (const auto* u = std::get_if<UnaryExpr>(&expr.node)) {
            return u->op == UnOp::Not ? kPrecNot : kPrecUnary;
        }
        if (std::get_if<CondExpr>(&expr.node)) return kPrecCond;
        return kPrecAtom;
    }
};

}  // namespace detail

// Canonical source text for a program; always LF-terminated per line.
inline std::string render(const Program& prog) {
    return detail::Renderer().render_program(prog);
}

inline std::string render_expr(const Expr& expr) {
    return detail::Renderer().render_expression(expr);
}

}  // namespace mixcode::lang
