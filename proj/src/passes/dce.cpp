#include "minivella/builtins.hpp"
#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::passes {

namespace {

// An expression is pure-for-DCE when evaluating it cannot raise a runtime
// error or produce an observable effect. Calls stay impure: they may
// overflow, divide by zero, or recurse forever.
bool pure_for_dce(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Lit:
        case ExprKind::Var:
            return true;
        case ExprKind::Fun:
        case ExprKind::TFun:
        case ExprKind::NAryFun:
        case ExprKind::Dispatch:
            return true;  // closures are values; the body runs later
        case ExprKind::App:
        case ExprKind::Call:
        case ExprKind::TApp:
        case ExprKind::DispatchCall:
            return false;
        case ExprKind::Builtin: {
            auto bi = builtin_by_name(e->name);
            if (!bi || builtin_impure(*bi)) return false;
            for (auto& a : e->args)
                if (!pure_for_dce(a)) return false;
            return true;
        }
        case ExprKind::Constr:
            for (auto& a : e->args)
                if (!pure_for_dce(a)) return false;
            return true;
        case ExprKind::Msg:
            for (auto& f : e->fields)
                if (!pure_for_dce(f.value)) return false;
            return true;
        case ExprKind::Let:
        case ExprKind::LetRec:
            return pure_for_dce(e->a) && pure_for_dce(e->b);
        case ExprKind::Match:
            for (auto& arm : e->arms)
                if (!pure_for_dce(arm.body)) return false;
            return true;
    }
    return false;
}

ExprPtr strip_lets(const ExprPtr& e) {
    if (!e) return nullptr;
    auto c = std::make_shared<Expr>(*e);
    c->a = strip_lets(e->a);
    c->b = strip_lets(e->b);
    for (auto& a : c->args) a = strip_lets(a);
    for (auto& arm : c->arms) arm.body = strip_lets(arm.body);
    for (auto& f : c->fields) f.value = strip_lets(f.value);
    for (auto& ent : c->entries) ent.body = strip_lets(ent.body);
    if (c->kind == ExprKind::Let && pure_for_dce(c->a) &&
        !free_vars(c->b).count(c->name))
        return c->b;
    if (c->kind == ExprKind::LetRec && pure_for_dce(c->a) &&
        !free_vars(c->b).count(c->name))
        return c->b;
    return c;
}

}  // namespace

void eliminate_dead_code(Program& p) {
    visit_expr_roots(p, [](ExprPtr& root) { root = strip_lets(root); });

    // Library definitions: keep everything reachable from the program roots.
    // Definitions may only reference earlier definitions, so one right-to-left
    // sweep finds the full reachable set.
    std::set<std::string> needed;
    auto roots = [&](auto&& add) {
        if (p.main) add(free_vars(p.main));
        if (p.contract) {
            for (auto& f : p.contract->fields) add(free_vars(f.init));
            for (auto& t : p.contract->transitions)
                add(free_vars_stmts(t.body));
        }
    };
    roots([&](std::set<std::string> fv) {
        needed.insert(fv.begin(), fv.end());
    });
    for (auto it = p.defs.rbegin(); it != p.defs.rend(); ++it) {
        // top-level bindings evaluate eagerly, so an impure one is
        // observable even when nothing references it
        if (!needed.count(it->name) && pure_for_dce(it->value)) continue;
        needed.insert(it->name);
        auto fv = free_vars(it->value);
        needed.insert(fv.begin(), fv.end());
    }
    std::vector<LibDef> kept;
    for (auto& d : p.defs)
        if (needed.count(d.name)) kept.push_back(std::move(d));
    p.defs = std::move(kept);
}

}  // namespace mv::passes
