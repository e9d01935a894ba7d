#include <algorithm>
#include <climits>
#include <map>

#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::passes {

namespace {

// Rewrites every curried type into its unary n-ary form; the grouped
// prefix of an uncurried definition is handled separately by group_type.
TypePtr uncurry_type(const TypePtr& t) {
    if (!t) return t;
    switch (t->kind) {
        case TyKind::Fun:
            return SType::make_nary_fun({uncurry_type(t->a)},
                                        uncurry_type(t->b));
        case TyKind::NAryFun: {
            std::vector<TypePtr> ps;
            for (auto& a : t->args) ps.push_back(uncurry_type(a));
            return SType::make_nary_fun(std::move(ps), uncurry_type(t->b));
        }
        case TyKind::Adt: {
            std::vector<TypePtr> as;
            for (auto& a : t->args) as.push_back(uncurry_type(a));
            return SType::make_adt(t->name, std::move(as));
        }
        case TyKind::Map:
            return SType::make_map(uncurry_type(t->a), uncurry_type(t->b));
        case TyKind::Forall:
            return SType::make_forall(t->name, uncurry_type(t->a));
        default:
            return t;
    }
}

// First n arrows of a (possibly forall-wrapped) curried type become one
// n-ary function type; the remainder is uncurried arrow by arrow.
TypePtr group_type(const TypePtr& t, int n) {
    if (t->kind == TyKind::Forall)
        return SType::make_forall(t->name, group_type(t->a, n));
    std::vector<TypePtr> ps;
    TypePtr rest = t;
    for (int i = 0; i < n; ++i) {
        if (rest->kind != TyKind::Fun)
            throw CompileError("internal: uncurry arity exceeds type");
        ps.push_back(uncurry_type(rest->a));
        rest = rest->b;
    }
    return SType::make_nary_fun(std::move(ps), uncurry_type(rest));
}

struct FnInfo {
    int chain_len = 0;      // leading fun params of the bound lambda
    int min_site = INT_MAX; // smallest argument count over all call sites
    bool escaped = false;   // used outside call-head position
};

struct Uncurrier {
    std::map<std::string, FnInfo> info;

    static int lambda_chain_len(const ExprPtr& v) {
        const Expr* e = v.get();
        while (e->kind == ExprKind::TFun) e = e->a.get();
        int n = 0;
        while (e->kind == ExprKind::Fun) {
            ++n;
            e = e->a.get();
        }
        return n;
    }

    void note_def(const std::string& name, const ExprPtr& v) {
        int len = lambda_chain_len(v);
        if (len >= 2) info[name].chain_len = len;
    }

    void collect_defs(Program& p) {
        for (auto& d : p.defs) note_def(d.name, d.value);
        walk_program_exprs(p, [&](const ExprPtr& e) {
            if (e->kind == ExprKind::Let || e->kind == ExprKind::LetRec)
                note_def(e->name, e->a);
        });
        if (p.contract) {
            std::function<void(const std::vector<StmtPtr>&)> scan =
                [&](const std::vector<StmtPtr>& body) {
                    for (auto& s : body) {
                        if (s->kind == StmtKind::Bind) note_def(s->name, s->e);
                        for (auto& arm : s->arms) scan(arm.body);
                    }
                };
            for (auto& t : p.contract->transitions) scan(t.body);
        }
    }

    // head of an application spine, with type applications stripped
    static const Expr* spine_core(const ExprPtr& head) {
        const Expr* e = head.get();
        while (e->kind == ExprKind::TApp) e = e->a.get();
        return e;
    }

    void collect_uses(const ExprPtr& e) {
        if (!e) return;
        switch (e->kind) {
            case ExprKind::Var: {
                auto it = info.find(e->name);
                if (it != info.end()) it->second.escaped = true;
                return;
            }
            case ExprKind::App: {
                std::vector<ExprPtr> args;
                ExprPtr head = e;
                while (head->kind == ExprKind::App) {
                    args.push_back(head->b);
                    head = head->a;
                }
                const Expr* core = spine_core(head);
                if (core->kind == ExprKind::Var) {
                    auto it = info.find(core->name);
                    if (it != info.end())
                        it->second.min_site =
                            std::min<int>(it->second.min_site, (int)args.size());
                } else {
                    collect_uses(head);
                }
                for (auto& a : args) collect_uses(a);
                return;
            }
            case ExprKind::TApp: {
                const Expr* core = spine_core(e);
                if (core->kind == ExprKind::Var) {
                    // type application without value arguments: the
                    // instantiated closure escapes
                    auto it = info.find(core->name);
                    if (it != info.end()) it->second.escaped = true;
                } else {
                    collect_uses(e->a);
                }
                return;
            }
            default:
                collect_uses(e->a);
                collect_uses(e->b);
                for (auto& a : e->args) collect_uses(a);
                for (auto& arm : e->arms) collect_uses(arm.body);
                for (auto& f : e->fields) collect_uses(f.value);
                for (auto& ent : e->entries) collect_uses(ent.body);
                return;
        }
    }

    int arity_of(const std::string& name) const {
        auto it = info.find(name);
        if (it == info.end()) return 1;
        const FnInfo& fi = it->second;
        if (fi.escaped || fi.chain_len < 2 || fi.min_site == INT_MAX) return 1;
        return std::max(1, std::min(fi.min_site, fi.chain_len));
    }

    // --- transformation ---

    ExprPtr group_lambda(const ExprPtr& v, int n) {
        if (n <= 1) return trans(v);
        if (v->kind == ExprKind::TFun) {
            auto c = std::make_shared<Expr>(*v);
            c->a = group_lambda(v->a, n);
            return c;
        }
        auto g = make_expr(ExprKind::NAryFun, v->loc);
        const Expr* e = v.get();
        ExprPtr body;
        for (int i = 0; i < n; ++i) {
            g->params.push_back(e->name);
            g->ty_args.push_back(uncurry_type(e->ty));
            body = e->a;
            e = e->a.get();
        }
        g->a = trans(body);
        return g;
    }

    ExprPtr bind_value(const std::string& name, const ExprPtr& v) {
        return group_lambda(v, arity_of(name));
    }

    ExprPtr trans(const ExprPtr& e) {
        if (!e) return nullptr;
        switch (e->kind) {
            case ExprKind::Fun: {
                auto c = make_expr(ExprKind::NAryFun, e->loc);
                c->params.push_back(e->name);
                c->ty_args.push_back(uncurry_type(e->ty));
                c->a = trans(e->a);
                return c;
            }
            case ExprKind::App: {
                std::vector<ExprPtr> args;
                ExprPtr head = e;
                while (head->kind == ExprKind::App) {
                    args.push_back(head->b);
                    head = head->a;
                }
                std::reverse(args.begin(), args.end());
                const Expr* core = spine_core(head);
                int n = core->kind == ExprKind::Var ? arity_of(core->name) : 1;
                ExprPtr cur = trans(head);
                size_t i = 0;
                auto mk_call = [&](size_t take) {
                    auto call = make_expr(ExprKind::Call, e->loc);
                    call->a = cur;
                    for (size_t k = 0; k < take; ++k)
                        call->args.push_back(trans(args[i++]));
                    cur = call;
                };
                mk_call((size_t)n);
                while (i < args.size()) mk_call(1);
                return cur;
            }
            case ExprKind::Let: {
                auto c = std::make_shared<Expr>(*e);
                c->a = bind_value(e->name, e->a);
                c->b = trans(e->b);
                return c;
            }
            case ExprKind::LetRec: {
                auto c = std::make_shared<Expr>(*e);
                int n = arity_of(e->name);
                c->a = group_lambda(e->a, n);
                c->ty = n >= 2 ? group_type(e->ty, n) : uncurry_type(e->ty);
                c->b = trans(e->b);
                return c;
            }
            default: {
                auto c = std::make_shared<Expr>(*e);
                c->ty = uncurry_type(e->ty);
                for (auto& t : c->ty_args) t = uncurry_type(t);
                c->a = trans(e->a);
                c->b = trans(e->b);
                for (auto& a : c->args) a = trans(a);
                for (auto& arm : c->arms) arm.body = trans(arm.body);
                for (auto& f : c->fields) f.value = trans(f.value);
                for (auto& ent : c->entries) ent.body = trans(ent.body);
                return c;
            }
        }
    }

    std::vector<StmtPtr> trans_stmts(const std::vector<StmtPtr>& body) {
        std::vector<StmtPtr> out;
        for (auto& s : body) {
            auto c = std::make_shared<Stmt>(*s);
            if (c->kind == StmtKind::Bind)
                c->e = bind_value(c->name, c->e);
            else if (c->e)
                c->e = trans(c->e);
            if (c->e2) c->e2 = trans(c->e2);
            for (auto& arm : c->arms) arm.body = trans_stmts(arm.body);
            out.push_back(std::move(c));
        }
        return out;
    }
};

}  // namespace

void uncurry(Program& p) {
    Uncurrier u;
    u.collect_defs(p);
    for (auto& d : p.defs) u.collect_uses(d.value);
    if (p.contract) {
        for (auto& f : p.contract->fields) u.collect_uses(f.init);
        std::function<void(const std::vector<StmtPtr>&)> scan =
            [&](const std::vector<StmtPtr>& body) {
                for (auto& s : body) {
                    if (s->e) u.collect_uses(s->e);
                    if (s->e2) u.collect_uses(s->e2);
                    for (auto& arm : s->arms) scan(arm.body);
                }
            };
        for (auto& t : p.contract->transitions) scan(t.body);
    }
    if (p.main) u.collect_uses(p.main);

    for (auto& d : p.defs) {
        int n = u.arity_of(d.name);
        d.value = u.group_lambda(d.value, n);
        if (d.is_rec)
            d.rec_type =
                n >= 2 ? group_type(d.rec_type, n) : uncurry_type(d.rec_type);
    }
    if (p.contract) {
        for (auto& f : p.contract->fields) {
            f.init = u.trans(f.init);
            f.type = uncurry_type(f.type);
        }
        for (auto& t : p.contract->transitions) {
            for (auto& par : t.params) par.type = uncurry_type(par.type);
            t.body = u.trans_stmts(t.body);
        }
    }
    if (p.main) p.main = u.trans(p.main);
    reannotate(p);
}

}  // namespace mv::passes
