#pragma once

// Refactoring engine: applicability scans and uniform-site application for
// all seventeen methods.
//
// Every method except api renaming preserves observable behavior (printed
// lines, returned value, outcome) on every input; unreachable-print insertion
// sites and idempotent duplication sites are restricted precisely so that
// this guarantee holds and is enforced by the interpreter-backed test oracle.
// Site selection is uniform over candidate sites; where a rename has several
// legal replacement names, the replacement is a second uniform draw.
//
// Sites are addressed by ordinals in the deterministic AST traversal (see
// walk.hpp), so enumeration and application cannot drift apart.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mixcode/lang.hpp"
#include "mixcode/refactor/methods.hpp"
#include "mixcode/refactor/synonyms.hpp"
#include "mixcode/refactor/walk.hpp"
#include "mixcode/rng.hpp"

namespace mixcode::refactor {

using lang::BinOp;
using lang::Expr;
using lang::Program;
using lang::Stmt;

struct NotApplicableError : std::runtime_error {
    explicit NotApplicableError(const std::string& method)
        : std::runtime_error("refactoring '" + method + "' has no applicable site") {}
};

struct NoApplicableMethodError : std::runtime_error {
    NoApplicableMethodError() : std::runtime_error("no refactoring method is applicable") {}
};

struct RefactorOutcome {
    Program program;
    std::optional<Method> method;  // empty for the identity fallback
    std::string site;
};

namespace detail {

// One candidate site.  `a`/`b` are method-specific ordinals (block/statement/
// parameter indices); `choices` lists legal replacement names for renames.
struct Site {
    std::string desc;
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<std::string> choices;
};

// --- Shared predicates ---

// True when re-evaluating the expression cannot consume input or invoke a
// user function (api.* builtins are pure).
inline bool expr_is_pure(const Expr& expr) {
    bool pure = true;
    walk_expr(expr, [&pure](const Expr& e) {
        if (const auto* c = std::get_if<lang::CallExpr>(&e.node)) {
            if (c->callee == "input" || c->callee.find('.') == std::string::npos) pure = false;
        }
    });
    return pure;
}

inline bool expr_reads_name(const Expr& expr, const std::string& name) {
    bool reads = false;
    walk_expr(expr, [&](const Expr& e) {
        if (const auto* v = std::get_if<lang::VarRef>(&e.node)) {
            if (v->name == name) reads = true;
        }
    });
    return reads;
}

// True when the expression, if it evaluates at all, evaluates to an integer.
// Conservative: anything uncertain (variables, user calls) is rejected.
inline bool expr_static_int(const Expr& expr) {
    if (std::holds_alternative<lang::IntLit>(expr.node)) return true;
    if (const auto* u = std::get_if<lang::UnaryExpr>(&expr.node)) return u->op == lang::UnOp::Neg;
    if (const auto* b = std::get_if<lang::BinaryExpr>(&expr.node)) {
        switch (b->op) {
            case BinOp::Add:
            case BinOp::Sub:
            case BinOp::Mul:
            case BinOp::FloorDiv:
            case BinOp::Mod: return true;
            default: return false;
        }
    }
    if (const auto* c = std::get_if<lang::CondExpr>(&expr.node)) {
        return expr_static_int(c->args[1]) && expr_static_int(c->args[2]);
    }
    if (const auto* call = std::get_if<lang::CallExpr>(&expr.node)) {
        return call->callee == "input" || call->callee.find('.') != std::string::npos;
    }
    return false;
}

// Names used as variables within one scope (parameters, assignment targets,
// loop variables, references), excluding nothing.
inline std::set<std::string> scope_variable_names(const std::vector<Stmt>& body,
                                                  const std::vector<lang::Param>* params) {
    std::set<std::string> names;
    if (params != nullptr) {
        for (const auto& p : *params) names.insert(p.name);
    }
    auto body_mut = const_cast<std::vector<Stmt>&>(body);  // read-only visits
    walk_nested_blocks(body_mut, [&names](std::vector<Stmt>& block) {
        for (Stmt& stmt : block) {
            if (auto* s = std::get_if<lang::AssignStmt>(&stmt.node)) names.insert(s->target);
            if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) names.insert(s->var);
        }
    });
    walk_block_exprs(body_mut, [&names](Expr& e) {
        if (auto* v = std::get_if<lang::VarRef>(&e.node)) names.insert(v->name);
    });
    return names;
}

// Names assigned (not merely read) within one scope body.
inline std::set<std::string> scope_assigned_names(const std::vector<Stmt>& body) {
    std::set<std::string> names;
    auto body_mut = const_cast<std::vector<Stmt>&>(body);
    walk_nested_blocks(body_mut, [&names](std::vector<Stmt>& block) {
        for (Stmt& stmt : block) {
            if (auto* s = std::get_if<lang::AssignStmt>(&stmt.node)) names.insert(s->target);
            if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) names.insert(s->var);
        }
    });
    return names;
}

// Renames variable `from` to `to` across one scope body (targets, loop
// variables, references).
inline void rename_variable_in_body(std::vector<Stmt>& body, const std::string& from,
                                    const std::string& to) {
    walk_nested_blocks(body, [&](std::vector<Stmt>& block) {
        for (Stmt& stmt : block) {
            if (auto* s = std::get_if<lang::AssignStmt>(&stmt.node)) {
                if (s->target == from) s->target = to;
            }
            if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
                if (s->var == from) s->var = to;
            }
        }
    });
    walk_block_exprs(body, [&](Expr& e) {
        if (auto* v = std::get_if<lang::VarRef>(&e.node)) {
            if (v->name == from) v->name = to;
        }
    });
}

// --- Canned statements for dead-code insertion ---

inline Stmt make_print_int(std::int64_t v) { return Stmt{lang::PrintStmt{lang::make_int(v)}}; }

inline Stmt make_dead_for(const std::string& var) {
    lang::ForRangeStmt loop;
    loop.var = var;
    loop.bounds.push_back(lang::make_int(0));
    loop.body.push_back(make_print_int(0));
    return Stmt{std::move(loop)};
}

inline Expr make_false_cond() {
    return lang::make_binary(BinOp::Eq, lang::make_int(1), lang::make_int(0));
}

inline Stmt make_dead_if() {
    lang::IfStmt node;
    node.branches.push_back({make_false_cond(), {make_print_int(0)}});
    return Stmt{std::move(node)};
}

inline Stmt make_dead_if_else() {
    lang::IfStmt node;
    node.branches.push_back({make_false_cond(), {make_print_int(0)}});
    node.has_else = true;
    node.else_body.push_back(Stmt{lang::PassStmt{}});
    return Stmt{std::move(node)};
}

inline Stmt make_dead_while() {
    lang::WhileStmt node;
    node.cond = make_false_cond();
    node.body.push_back(make_print_int(0));
    return Stmt{std::move(node)};
}

// --- Site enumeration ---

// Every (block, insertion position) pair, top level and inside functions.
inline std::vector<Site> insertion_sites(const Program& prog) {
    std::vector<Site> sites;
    std::size_t block_ord = 0;
    auto prog_mut = const_cast<Program&>(prog);
    walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
        for (std::size_t pos = 0; pos <= block.size(); ++pos) {
            sites.push_back({"block " + std::to_string(block_ord) + " pos " + std::to_string(pos),
                             block_ord, pos});
        }
        ++block_ord;
    });
    return sites;
}

inline std::vector<Stmt>* find_block(Program& prog, std::size_t ord) {
    std::vector<Stmt>* found = nullptr;
    std::size_t i = 0;
    walk_program_blocks(prog, [&](std::vector<Stmt>& block) {
        if (i++ == ord) found = &block;
    });
    return found;
}

inline std::vector<Site> collect_sites(Method method, const Program& prog,
                                       const SynonymTable& table) {
    std::vector<Site> sites;
    auto prog_mut = const_cast<Program&>(prog);  // collectors never mutate

    switch (method) {
        case Method::ApiRenaming: {
            std::size_t ord = 0;
            walk_program_exprs(prog_mut, [&](Expr& e) {
                if (auto* c = std::get_if<lang::CallExpr>(&e.node)) {
                    if (c->callee.find('.') != std::string::npos) {
                        auto others = table.synonyms_of(c->callee);
                        if (!others.empty()) {
                            sites.push_back({"api call #" + std::to_string(ord) + " " + c->callee,
                                             ord, 0, others});
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::ArgumentsAdding: {
            for (std::size_t i = 0; i < prog.functions.size(); ++i) {
                sites.push_back({"function " + prog.functions[i].name, i, 0});
            }
            break;
        }
        case Method::ArgumentRenaming: {
            for (std::size_t i = 0; i < prog.functions.size(); ++i) {
                const auto& fn = prog.functions[i];
                const auto used = scope_variable_names(fn.body, &fn.params);
                for (std::size_t j = 0; j < fn.params.size(); ++j) {
                    std::vector<std::string> valid;
                    for (const std::string& cand : table.synonyms_of(fn.params[j].name)) {
                        if (cand.find('.') == std::string::npos && !used.count(cand)) {
                            valid.push_back(cand);
                        }
                    }
                    if (!valid.empty()) {
                        sites.push_back(
                            {"function " + fn.name + " param " + fn.params[j].name, i, j, valid});
                    }
                }
            }
            break;
        }
        case Method::DeadForAdding:
        case Method::DeadIfAdding:
        case Method::DeadIfElseAdding:
        case Method::DeadWhileAdding:
        case Method::LocalVariableAdding: {
            sites = insertion_sites(prog);
            break;
        }
        case Method::Duplication: {
            std::size_t block_ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (std::size_t idx = 0; idx < block.size(); ++idx) {
                    if (auto* s = std::get_if<lang::AssignStmt>(&block[idx].node)) {
                        if (expr_is_pure(s->value) && !expr_reads_name(s->value, s->target)) {
                            sites.push_back({"assignment to " + s->target + " in block " +
                                                 std::to_string(block_ord),
                                             block_ord, idx});
                        }
                    }
                }
                ++block_ord;
            });
            break;
        }
        case Method::FieldEnhancement: {
            for (std::size_t i = 0; i < prog.functions.size(); ++i) {
                for (std::size_t j = 0; j < prog.functions[i].params.size(); ++j) {
                    sites.push_back({"function " + prog.functions[i].name + " param " +
                                         prog.functions[i].params[j].name,
                                     i, j});
                }
            }
            break;
        }
        case Method::ForLoopEnhancement: {
            std::size_t ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
                        if (s->bounds.size() == 1) {
                            sites.push_back({"for loop #" + std::to_string(ord), ord, 0});
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::IfEnhancement: {
            std::size_t ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::IfStmt>(&stmt.node)) {
                        for (std::size_t b = 0; b < s->branches.size(); ++b) {
                            if (s->branches[b].cond == lang::make_bool(true)) {
                                sites.push_back(
                                    {"if #" + std::to_string(ord) + " branch " + std::to_string(b),
                                     ord, b});
                            }
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::LocalVariableRenaming: {
            // Scopes: each function (params excluded from candidates), then
            // top level with scope ordinal functions.size().
            for (std::size_t i = 0; i <= prog.functions.size(); ++i) {
                const bool top = i == prog.functions.size();
                const std::vector<Stmt>& body =
                    top ? prog.top_statements : prog.functions[i].body;
                const std::vector<lang::Param>* params = top ? nullptr : &prog.functions[i].params;
                const auto used = scope_variable_names(body, params);
                std::set<std::string> param_names;
                if (params != nullptr) {
                    for (const auto& p : *params) param_names.insert(p.name);
                }
                for (const std::string& name : scope_assigned_names(body)) {
                    if (param_names.count(name)) continue;
                    std::vector<std::string> valid;
                    for (const std::string& cand : table.synonyms_of(name)) {
                        if (cand.find('.') == std::string::npos && !used.count(cand)) {
                            valid.push_back(cand);
                        }
                    }
                    if (!valid.empty()) {
                        const std::string scope_desc =
                            top ? "top level" : "function " + prog.functions[i].name;
                        // Variable name rides in the description's last token.
                        sites.push_back({scope_desc + " variable " + name, i, 0, valid});
                    }
                }
            }
            break;
        }
        case Method::MethodNameRenaming: {
            std::set<std::string> fn_names;
            for (const auto& fn : prog.functions) fn_names.insert(fn.name);
            for (std::size_t i = 0; i < prog.functions.size(); ++i) {
                std::vector<std::string> valid;
                for (const std::string& cand : table.synonyms_of(prog.functions[i].name)) {
                    if (cand.find('.') == std::string::npos && !fn_names.count(cand)) {
                        valid.push_back(cand);
                    }
                }
                if (!valid.empty()) {
                    sites.push_back({"function " + prog.functions[i].name, i, 0, valid});
                }
            }
            break;
        }
        case Method::PlusZero: {
            std::size_t block_ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (std::size_t idx = 0; idx < block.size(); ++idx) {
                    if (auto* s = std::get_if<lang::AssignStmt>(&block[idx].node)) {
                        if (expr_static_int(s->value)) {
                            sites.push_back({"assignment to " + s->target + " in block " +
                                                 std::to_string(block_ord),
                                             block_ord, idx});
                        }
                    }
                }
                ++block_ord;
            });
            break;
        }
        case Method::PrintAdding: {
            std::size_t block_ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (std::size_t pos = 1; pos <= block.size(); ++pos) {
                    if (std::holds_alternative<lang::ReturnStmt>(block[pos - 1].node)) {
                        sites.push_back({"after return in block " + std::to_string(block_ord),
                                         block_ord, pos});
                    }
                }
                ++block_ord;
            });
            break;
        }
        case Method::ReturnOptimal: {
            std::size_t ord = 0;
            walk_program_blocks(prog_mut, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::ReturnStmt>(&stmt.node)) {
                        if (s->value.has_value()) {
                            sites.push_back({"return #" + std::to_string(ord), ord, 0});
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
    }
    return sites;
}

// LocalVariableRenaming needs the variable name back out of the site; it is
// the last token of the description.
inline std::string site_trailing_name(const Site& site) {
    const auto pos = site.desc.rfind(' ');
    return site.desc.substr(pos + 1);
}

inline void apply_site(Method method, Program& prog, const Site& site,
                       const std::string& choice) {
    switch (method) {
        case Method::ApiRenaming: {
            std::size_t ord = 0;
            walk_program_exprs(prog, [&](Expr& e) {
                if (auto* c = std::get_if<lang::CallExpr>(&e.node)) {
                    if (c->callee.find('.') != std::string::npos) {
                        if (ord == site.a) c->callee = choice;
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::ArgumentsAdding: {
            lang::Param extra;
            extra.name = fresh_name(prog, "__extra");
            extra.default_value = 0;
            prog.functions[site.a].params.push_back(std::move(extra));
            break;
        }
        case Method::ArgumentRenaming: {
            auto& fn = prog.functions[site.a];
            const std::string old = fn.params[site.b].name;
            fn.params[site.b].name = choice;
            rename_variable_in_body(fn.body, old, choice);
            break;
        }
        case Method::DeadForAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b),
                          make_dead_for(fresh_name(prog, "__dead")));
            break;
        }
        case Method::DeadIfAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b), make_dead_if());
            break;
        }
        case Method::DeadIfElseAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b),
                          make_dead_if_else());
            break;
        }
        case Method::DeadWhileAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b), make_dead_while());
            break;
        }
        case Method::Duplication: {
            auto* block = find_block(prog, site.a);
            Stmt clone = (*block)[site.b];
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b) + 1,
                          std::move(clone));
            break;
        }
        case Method::FieldEnhancement: {
            auto& fn = prog.functions[site.a];
            lang::IfStmt guard;
            guard.branches.push_back(
                {lang::make_binary(BinOp::Eq, lang::make_var(fn.params[site.b].name),
                                   lang::make_none()),
                 {Stmt{lang::PrintStmt{lang::make_str("please check your input.")}}}});
            fn.body.insert(fn.body.begin(), Stmt{std::move(guard)});
            break;
        }
        case Method::ForLoopEnhancement: {
            std::size_t ord = 0;
            walk_program_blocks(prog, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::ForRangeStmt>(&stmt.node)) {
                        if (ord == site.a) s->bounds.insert(s->bounds.begin(), lang::make_int(0));
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::IfEnhancement: {
            std::size_t ord = 0;
            walk_program_blocks(prog, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::IfStmt>(&stmt.node)) {
                        if (ord == site.a) {
                            s->branches[site.b].cond = lang::make_binary(
                                BinOp::Eq, lang::make_int(0), lang::make_int(0));
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
        case Method::LocalVariableAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b),
                          Stmt{lang::AssignStmt{fresh_name(prog, "__dead"), lang::make_int(1)}});
            break;
        }
        case Method::LocalVariableRenaming: {
            const std::string old = site_trailing_name(site);
            const bool top = site.a == prog.functions.size();
            auto& body = top ? prog.top_statements : prog.functions[site.a].body;
            rename_variable_in_body(body, old, choice);
            break;
        }
        case Method::MethodNameRenaming: {
            const std::string old = prog.functions[site.a].name;
            prog.functions[site.a].name = choice;
            walk_program_exprs(prog, [&](Expr& e) {
                if (auto* c = std::get_if<lang::CallExpr>(&e.node)) {
                    if (c->callee == old) c->callee = choice;
                }
            });
            break;
        }
        case Method::PlusZero: {
            auto* block = find_block(prog, site.a);
            auto& assign = std::get<lang::AssignStmt>((*block)[site.b].node);
            Expr old = std::move(assign.value);
            assign.value = lang::make_binary(BinOp::Add, std::move(old), lang::make_int(0));
            break;
        }
        case Method::PrintAdding: {
            auto* block = find_block(prog, site.a);
            block->insert(block->begin() + static_cast<std::ptrdiff_t>(site.b), make_print_int(1));
            break;
        }
        case Method::ReturnOptimal: {
            std::size_t ord = 0;
            walk_program_blocks(prog, [&](std::vector<Stmt>& block) {
                for (Stmt& stmt : block) {
                    if (auto* s = std::get_if<lang::ReturnStmt>(&stmt.node)) {
                        if (ord == site.a) {
                            Expr old = std::move(*s->value);
                            s->value = lang::make_cond(make_false_cond(), lang::make_int(0),
                                                       std::move(old));
                        }
                        ++ord;
                    }
                }
            });
            break;
        }
    }
}

}  // namespace detail

// True when `method` has at least one candidate site in `prog`.
inline bool applicable(Method method, const Program& prog,
                       const SynonymTable& table = default_synonym_table()) {
    return !detail::collect_sites(method, prog, table).empty();
}

// Applies `method` at a uniformly chosen candidate site.  The transformed
// program is re-lexed, re-parsed, and re-validated as an integrity check.
inline RefactorOutcome apply(Method method, const Program& prog, Rng& rng,
                             const SynonymTable& table = default_synonym_table()) {
    const auto sites = detail::collect_sites(method, prog, table);
    if (sites.empty()) throw NotApplicableError(method_name(method));
    const detail::Site& site = sites[rng.uniform_below(sites.size())];
    std::string choice;
    if (!site.choices.empty()) {
        choice = site.choices[rng.uniform_below(site.choices.size())];
    }
    Program out = prog;
    detail::apply_site(method, out, site, choice);
    try {
        (void)lang::parse(lang::tokenize(lang::render(out)));
    } catch (const std::exception& err) {
        throw std::logic_error("refactoring '" + method_name(method) +
                               "' produced an invalid program: " + err.what());
    }
    std::string desc = site.desc;
    if (!choice.empty()) desc += " -> " + choice;
    return {std::move(out), method, std::move(desc)};
}

// Uniform choice among the applicable members of `methods`, then apply.
inline RefactorOutcome random_refactor(const Program& prog, const std::vector<Method>& methods,
                                       Rng& rng,
                                       const SynonymTable& table = default_synonym_table()) {
    std::vector<Method> usable;
    for (Method m : methods) {
        if (applicable(m, prog, table)) usable.push_back(m);
    }
    if (usable.empty()) throw NoApplicableMethodError();
    const Method chosen = usable[rng.uniform_below(usable.size())];
    return apply(chosen, prog, rng, table);
}

// Like random_refactor, but falls back to an untouched copy when nothing
// applies (the augmentation pipelines must never drop a sample).
inline RefactorOutcome random_refactor_or_identity(
    const Program& prog, const std::vector<Method>& methods, Rng& rng,
    const SynonymTable& table = default_synonym_table()) {
    std::vector<Method> usable;
    for (Method m : methods) {
        if (applicable(m, prog, table)) usable.push_back(m);
    }
    if (usable.empty()) return {prog, std::nullopt, "identity"};
    const Method chosen = usable[rng.uniform_below(usable.size())];
    return apply(chosen, prog, rng, table);
}

}  // namespace mixcode::refactor
