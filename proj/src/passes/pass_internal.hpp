#pragma once

#include <functional>

#include "minivella/ast.hpp"

namespace mv::passes {

// Applies f to every statement-embedded expression slot (mutable).
inline void visit_stmt_exprs(std::vector<StmtPtr>& body,
                             const std::function<void(ExprPtr&)>& f) {
    for (auto& s : body) {
        if (s->e) f(s->e);
        if (s->e2) f(s->e2);
        for (auto& arm : s->arms) visit_stmt_exprs(arm.body, f);
    }
}

// Applies f to every top-level expression root (mutable slots).
inline void visit_expr_roots(Program& p, const std::function<void(ExprPtr&)>& f) {
    for (auto& d : p.defs) f(d.value);
    if (p.contract) {
        for (auto& fld : p.contract->fields) f(fld.init);
        for (auto& t : p.contract->transitions) visit_stmt_exprs(t.body, f);
    }
    if (p.main) f(p.main);
}

// Read-only traversal of every expression node in a tree.
inline void walk_expr(const ExprPtr& e,
                      const std::function<void(const ExprPtr&)>& f) {
    if (!e) return;
    f(e);
    auto rec = [&](const ExprPtr& c) { walk_expr(c, f); };
    rec(e->a);
    rec(e->b);
    for (auto& a : e->args) rec(a);
    for (auto& arm : e->arms) rec(arm.body);
    for (auto& fl : e->fields) rec(fl.value);
    for (auto& ent : e->entries) rec(ent.body);
}

inline void walk_program_exprs(const Program& p,
                               const std::function<void(const ExprPtr&)>& f) {
    auto& pm = const_cast<Program&>(p);
    visit_expr_roots(pm, [&](ExprPtr& root) { walk_expr(root, f); });
}

// Every name that appears anywhere in the program (binders, variables,
// parameters). Used when inventing fresh names.
inline void collect_program_names(const Program& p, std::set<std::string>& used) {
    std::function<void(const PatternPtr&)> pat = [&](const PatternPtr& q) {
        if (q->kind == Pattern::Kind::Binder) used.insert(q->name);
        for (auto& s : q->subs) pat(s);
    };
    walk_program_exprs(p, [&](const ExprPtr& e) {
        if (!e->name.empty()) used.insert(e->name);
        for (auto& q : e->params) used.insert(q);
        for (auto& arm : e->arms) pat(arm.pat);
    });
    std::function<void(const std::vector<StmtPtr>&)> stmts =
        [&](const std::vector<StmtPtr>& body) {
            for (auto& s : body) {
                if (!s->name.empty()) used.insert(s->name);
                for (auto& arm : s->arms) {
                    pat(arm.pat);
                    stmts(arm.body);
                }
            }
        };
    if (p.contract)
        for (auto& t : p.contract->transitions) {
            for (auto& par : t.params) used.insert(par.name);
            stmts(t.body);
        }
    for (auto& d : p.defs) used.insert(d.name);
}

}  // namespace mv::passes
