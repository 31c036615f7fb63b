#pragma once

// MiniPy recursive-descent parser and static validator.
//
// Grammar (statement level):
//   program    : (funcdef | statement)*          -- defs collected separately
//   funcdef    : 'def' IDENT '(' params? ')' ':' block
//   params     : param (',' param)*              -- defaults only on a suffix
//   param      : IDENT ('=' INT)?
//   statement  : simple NEWLINE | if | while | for
//   simple     : IDENT '=' expr | 'print' '(' expr ')' | 'return' expr?
//              | 'pass' | expr
//   if         : 'if' expr ':' block ('elif' expr ':' block)* ('else' ':' block)?
//   while      : 'while' expr ':' block
//   for        : 'for' IDENT 'in' 'range' '(' expr (',' expr)? ')' ':' block
//   block      : NEWLINE INDENT statement+ DEDENT
//
// Expression precedence, loosest first: conditional, or, and, not, comparison
// (non-chaining), additive, multiplicative, unary minus, atoms.  Parentheses
// group but leave no AST node.
//
// Validation (all failures are ParseError):
//   - function names are unique; `def` only at top level
//   - calls reference a defined function (arity within [required, total]),
//     `input()` with zero args, or a dotted builtin name
//   - dotted names appear only as call targets
//   - every variable is assigned on all paths before use; functions see only
//     their parameters and locals (no globals)

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcode/lang/ast.hpp"
#include "mixcode/lang/lexer.hpp"
#include "mixcode/lang/token.hpp"

namespace mixcode::lang {

struct ParseError : std::runtime_error {
    ParseError(int line_, const std::string& expected_, const std::string& found_)
        : std::runtime_error("parse error at line " + std::to_string(line_) + ": expected " +
                             expected_ + ", found " + found_),
          line(line_),
          expected(expected_),
          found(found_) {}
    int line;
    std::string expected;
    std::string found;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program parse_program() {
        Program prog;
        while (!at_end()) {
            if (check_keyword("def")) {
                prog.functions.push_back(parse_funcdef());
            } else {
                prog.top_statements.push_back(parse_statement());
            }
        }
        return prog;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& peek() const { return toks_[pos_]; }
    int here_line() const { return at_end() ? (toks_.empty() ? 1 : toks_.back().line) : peek().line; }

    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = at_end() ? "end of input"
                                     : (peek().kind == TokenKind::Indent   ? "indent"
                                        : peek().kind == TokenKind::Dedent ? "dedent"
                                        : peek().kind == TokenKind::Newline
                                            ? "newline"
                                            : "'" + peek().lexeme + "'");
        throw ParseError(here_line(), expected, found);
    }

    bool check(TokenKind kind, std::string_view lexeme) const {
        return !at_end() && peek().kind == kind && peek().lexeme == lexeme;
    }
    bool check_kind(TokenKind kind) const { return !at_end() && peek().kind == kind; }
    bool check_keyword(std::string_view kw) const { return check(TokenKind::Keyword, kw); }
    bool check_op(std::string_view op) const { return check(TokenKind::Operator, op); }
    bool check_punct(std::string_view p) const { return check(TokenKind::Punct, p); }

    Token advance() { return toks_[pos_++]; }

    bool match(TokenKind kind, std::string_view lexeme) {
        if (check(kind, lexeme)) {
            ++pos_;
            return true;
        }
        return false;
    }

    Token expect(TokenKind kind, std::string_view lexeme, const std::string& what) {
        if (!check(kind, lexeme)) fail(what);
        return advance();
    }
    Token expect_kind(TokenKind kind, const std::string& what) {
        if (!check_kind(kind)) fail(what);
        return advance();
    }

    std::string expect_plain_identifier(const std::string& what) {
        if (!check_kind(TokenKind::Identifier)) fail(what);
        if (peek().lexeme.find('.') != std::string::npos) fail(what);
        return advance().lexeme;
    }

    // --- Statements ---

    FunctionDef parse_funcdef() {
        expect(TokenKind::Keyword, "def", "'def'");
        FunctionDef fn;
        fn.name = expect_plain_identifier("function name");
        expect(TokenKind::Punct, "(", "'('");
        if (!check_punct(")")) {
            for (;;) {
                Param p;
                p.name = expect_plain_identifier("parameter name");
                if (match(TokenKind::Operator, "=")) {
                    const Token lit = expect_kind(TokenKind::IntLiteral, "integer default");
                    p.default_value = std::stoll(lit.lexeme);
                }
                fn.params.push_back(std::move(p));
                if (!match(TokenKind::Punct, ",")) break;
            }
        }
        expect(TokenKind::Punct, ")", "')'");
        expect(TokenKind::Punct, ":", "':'");
        fn.body = parse_block();
        return fn;
    }

    std::vector<Stmt> parse_block() {
        expect_kind(TokenKind::Newline, "newline");
        expect_kind(TokenKind::Indent, "indented block");
        std::vector<Stmt> body;
        while (!check_kind(TokenKind::Dedent)) {
            if (at_end()) fail("statement or dedent");
            if (check_keyword("def")) fail("statement");  // no nested defs
            body.push_back(parse_statement());
        }
        advance();  // dedent
        return body;
    }

    Stmt parse_statement() {
        if (check_keyword("if")) return parse_if();
        if (check_keyword("while")) return parse_while();
        if (check_keyword("for")) return parse_for();

        Stmt stmt = parse_simple();
        expect_kind(TokenKind::Newline, "newline");
        return stmt;
    }

    Stmt parse_simple() {
        if (check_keyword("print")) {
            advance();
            expect(TokenKind::Punct, "(", "'('");
            Expr value = parse_expr();
            expect(TokenKind::Punct, ")", "')'");
            return Stmt{PrintStmt{std::move(value)}};
        }
        if (check_keyword("return")) {
            advance();
            ReturnStmt ret;
            if (!check_kind(TokenKind::Newline)) ret.value = parse_expr();
            return Stmt{std::move(ret)};
        }
        if (check_keyword("pass")) {
            advance();
            return Stmt{PassStmt{}};
        }
        // Assignment requires one-token lookahead past the identifier.
        if (check_kind(TokenKind::Identifier) && peek().lexeme.find('.') == std::string::npos &&
            pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == TokenKind::Operator &&
            toks_[pos_ + 1].lexeme == "=") {
            std::string target = advance().lexeme;
            advance();  // '='
            return Stmt{AssignStmt{std::move(target), parse_expr()}};
        }
        return Stmt{ExprStmt{parse_expr()}};
    }

    Stmt parse_if() {
        IfStmt node;
        expect(TokenKind::Keyword, "if", "'if'");
        Expr cond = parse_expr();
        expect(TokenKind::Punct, ":", "':'");
        node.branches.push_back({std::move(cond), parse_block()});
        while (check_keyword("elif")) {
            advance();
            Expr c = parse_expr();
            expect(TokenKind::Punct, ":", "':'");
            node.branches.push_back({std::move(c), parse_block()});
        }
        if (check_keyword("else")) {
            advance();
            expect(TokenKind::Punct, ":", "':'");
            node.has_else = true;
            node.else_body = parse_block();
        }
        return Stmt{std::move(node)};
    }

    Stmt parse_while() {
        expect(TokenKind::Keyword, "while", "'while'");
        Expr cond = parse_expr();
        expect(TokenKind::Punct, ":", "':'");
        return Stmt{WhileStmt{std::move(cond), parse_block()}};
    }

    Stmt parse_for() {
        expect(TokenKind::Keyword, "for", "'for'");
        ForRangeStmt node;
        node.var = expect_plain_identifier("loop variable");
        expect(TokenKind::Keyword, "in", "'in'");
        expect(TokenKind::Keyword, "range", "'range'");
        expect(TokenKind::Punct, "(", "'('");
        node.bounds.push_back(parse_expr());
        if (match(TokenKind::Punct, ",")) node.bounds.push_back(parse_expr());
        expect(TokenKind::Punct, ")", "')'");
        expect(TokenKind::Punct, ":", "':'");
        node.body = parse_block();
        return Stmt{std::move(node)};
    }

    // --- Expressions ---

    Expr parse_expr() { return parse_conditional(); }

    Expr parse_conditional() {
        Expr value = parse_or();
        if (check_keyword("if")) {
            advance();
            Expr cond = parse_or();
            expect(TokenKind::Keyword, "else", "'else'");
            Expr other = parse_conditional();
            return make_cond(std::move(cond), std::move(value), std::move(other));
        }
        return value;
    }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (check_keyword("or")) {
            advance();
            lhs = make_binary(BinOp::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (check_keyword("and")) {
            advance();
            lhs = make_binary(BinOp::And, std::move(lhs), parse_not());
        }
        return lhs;
    }

    Expr parse_not() {
        if (check_keyword("not")) {
            advance();
            return make_unary(UnOp::Not, parse_not());
        }
        return parse_comparison();
    }

    Expr parse_comparison() {
        Expr lhs = parse_additive();
        static const std::pair<const char*, BinOp> kCmps[] = {
            {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
            {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt},
        };
        for (const auto& [lex, op] : kCmps) {
            if (check_op(lex)) {
                advance();
                return make_binary(op, std::move(lhs), parse_additive());
            }
        }
        return lhs;
    }

    Expr parse_additive() {
        Expr lhs = parse_term();
        for (;;) {
            if (check_op("+")) {
                advance();
                lhs = make_binary(BinOp::Add, std::move(lhs), parse_term());
            } else if (check_op("-")) {
                advance();
                lhs = make_binary(BinOp::Sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (check_op("*")) {
                advance();
                lhs = make_binary(BinOp::Mul, std::move(lhs), parse_unary());
            } else if (check_op("//")) {
                advance();
                lhs = make_binary(BinOp::FloorDiv, std::move(lhs), parse_unary());
            } else if (check_op("%")) {
                advance();
                lhs = make_binary(BinOp::Mod, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (check_op("-")) {
            advance();
            return make_unary(UnOp::Neg, parse_unary());
        }
        return parse_atom();
    }

    Expr parse_atom() {
        if (check_punct("(")) {
            advance();
            Expr inner = parse_expr();
            expect(TokenKind::Punct, ")", "')'");
            return inner;
        }
        if (check_kind(TokenKind::IntLiteral)) {
            return make_int(std::stoll(advance().lexeme));
        }
        if (check_kind(TokenKind::StrLiteral)) {
            const std::string raw = advance().lexeme;
            return make_str(raw.substr(1, raw.size() - 2));
        }
        if (check_keyword("True")) {
            advance();
            return make_bool(true);
        }
        if (check_keyword("False")) {
            advance();
            return make_bool(false);
        }
        if (check_keyword("None")) {
            advance();
            return make_none();
        }
        if (check_keyword("input")) {
            advance();
            expect(TokenKind::Punct, "(", "'('");
            expect(TokenKind::Punct, ")", "')'");
            return make_call("input", {});
        }
        if (check_kind(TokenKind::Identifier)) {
            const Token tok = advance();
            const bool dotted = tok.lexeme.find('.') != std::string::npos;
            if (check_punct("(")) {
                advance();
                std::vector<Expr> args;
                if (!check_punct(")")) {
                    for (;;) {
                        args.push_back(parse_expr());
                        if (!match(TokenKind::Punct, ",")) break;
                    }
                }
                expect(TokenKind::Punct, ")", "')'");
                return make_call(tok.lexeme, std::move(args));
            }
            if (dotted) {
                throw ParseError(tok.line, "call after dotted name", "'" + tok.lexeme + "'");
            }
            return make_var(tok.lexeme);
        }
        fail("expression");
    }
};

// --- Static validation ---

class Validator {
public:
    explicit Validator(const Program& prog) : prog_(prog) {}

    void run() {
        std::set<std::string> names;
        for (const FunctionDef& fn : prog_.functions) {
            if (!names.insert(fn.name).second) {
                throw ParseError(1, "unique function name", "'" + fn.name + "'");
            }
            bool defaults_started = false;
            for (const Param& p : fn.params) {
                if (p.default_value.has_value()) {
                    defaults_started = true;
                } else if (defaults_started) {
                    throw ParseError(1, "defaulted parameters only after required ones",
                                     "'" + p.name + "'");
                }
            }
        }
        for (const FunctionDef& fn : prog_.functions) {
            std::set<std::string> assigned;
            for (const Param& p : fn.params) assigned.insert(p.name);
            check_block(fn.body, assigned);
        }
        std::set<std::string> top_assigned;
        check_block(prog_.top_statements, top_assigned);
    }

private:
    const Program& prog_;

    const FunctionDef* find_function(const std::string& name) const {
        for (const FunctionDef& fn : prog_.functions) {
            if (fn.name == name) return &fn;
        }
        return nullptr;
    }

    // Walks a block, updating `assigned` with definite assignments.
    void check_block(const std::vector<Stmt>& block, std::set<std::string>& assigned) const {
        for (const Stmt& stmt : block) check_stmt(stmt, assigned);
    }

    void check_stmt(const Stmt& stmt, std::set<std::string>& assigned) const {
        if (const auto* s = std::get_if<AssignStmt>(&stmt.node)) {
            check_expr(s->value, assigned);
            assigned.insert(s->target);
        } else if (const auto* s = std::get_if<PrintStmt>(&stmt.node)) {
            check_expr(s->value, assigned);
        } else if (const auto* s = std::get_if<IfStmt>(&stmt.node)) {
            std::optional<std::set<std::string>> common;
            for (const IfBranch& br : s->branches) {
                check_expr(br.cond, assigned);
                std::set<std::string> inner = assigned;
                check_block(br.body, inner);
                merge_intersection(common, inner);
            }
            if (s->has_else) {
                std::set<std::string> inner = assigned;
                check_block(s->else_body, inner);
                merge_intersection(common, inner);
                // With an exhaustive else, names assigned on every path escape.
                if (common) assigned = *common;
            }
        } else if (const auto* s = std::get_if<WhileStmt>(&stmt.node)) {
            check_expr(s->cond, assigned);
            std::set<std::string> inner = assigned;
            check_block(s->body, inner);  // body may not run: nothing escapes
        } else if (const auto* s = std::get_if<ForRangeStmt>(&stmt.node)) {
            for (const Expr& b : s->bounds) check_expr(b, assigned);
            std::set<std::string> inner = assigned;
            inner.insert(s->var);
            check_block(s->body, inner);  // zero iterations possible: nothing escapes
        } else if (const auto* s = std::get_if<ReturnStmt>(&stmt.node)) {
            if (s->value) check_expr(*s->value, assigned);
        } else if (const auto* s = std::get_if<ExprStmt>(&stmt.node)) {
            check_expr(s->value, assigned);
        }
        // PassStmt: nothing to do.
    }

    static void merge_intersection(std::optional<std::set<std::string>>& acc,
                                   const std::set<std::string>& next) {
        if (!acc) {
            acc = next;
            return;
        }
        std::set<std::string> keep;
        for (const std::string& name : *acc) {
            if (next.count(name)) keep.insert(name);
        }
        *acc = std::move(keep);
    }

    void check_expr(const Expr& expr, const std::set<std::string>& assigned) const {
        if (const auto* v = std::get_if<VarRef>(&expr.node)) {
            if (!assigned.count(v->name)) {
                throw ParseError(1, "assignment of '" + v->name + "' before use",
                                 "'" + v->name + "'");
            }
            return;
        }
        if (const auto* c = std::get_if<CallExpr>(&expr.node)) {
            for (const Expr& a : c->args) check_expr(a, assigned);
            if (c->callee == "input") {
                if (!c->args.empty()) {
                    throw ParseError(1, "input() with no arguments", "'input'");
                }
                return;
            }
            if (c->callee.find('.') != std::string::npos) {
                return;  // dotted builtin: resolved by the interpreter
            }
            const FunctionDef* fn = find_function(c->callee);
            if (fn == nullptr) {
                throw ParseError(1, "defined function", "'" + c->callee + "'");
            }
            std::size_t required = 0;
            for (const Param& p : fn->params) {
                if (!p.default_value.has_value()) ++required;
            }
            if (c->args.size() < required || c->args.size() > fn->params.size()) {
                throw ParseError(1,
                                 "call to '" + c->callee + "' with " + std::to_string(required) +
                                     ".." + std::to_string(fn->params.size()) + " arguments",
                                 std::to_string(c->args.size()) + " arguments");
            }
            return;
        }
        if (const auto* b = std::get_if<BinaryExpr>(&expr.node)) {
            for (const Expr& a : b->args) check_expr(a, assigned);
        } else if (const auto* u = std::get_if<UnaryExpr>(&expr.node)) {
            check_expr(u->args[0], assigned);
        } else if (const auto* t = std::get_if<CondExpr>(&expr.node)) {
            for (const Expr& a : t->args) check_expr(a, assigned);
        }
    }
};

}  // namespace detail

// Parses token stream into a validated Program.
inline Program parse(std::vector<Token> tokens) {
    detail::Parser parser(std::move(tokens));
    Program prog = parser.parse_program();
    detail::Validator(prog).run();
    return prog;
}

// Convenience: lex + parse in one step.
inline Program parse_source(std::string_view source) { return parse(tokenize(source)); }

}  // namespace mixcode::lang
