#include <map>

#include "minivella/builtins.hpp"
#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::passes {

namespace {

TypePtr maybe_subst(const TypePtr& t, const std::string* tv, const TypePtr& repl) {
    if (!t || !tv) return t;
    return subst_tyvar(t, *tv, repl);
}

PatternPtr clone_pattern(const PatternPtr& p) { return p; }  // immutable, share

}  // namespace

ExprPtr clone_expr(const ExprPtr& e, const std::string* tv, const TypePtr& repl) {
    if (!e) return nullptr;
    // a TFun that shadows the substituted variable keeps its body untouched
    const std::string* inner_tv = tv;
    if (tv && e->kind == ExprKind::TFun && e->name == *tv) inner_tv = nullptr;
    auto c = make_expr(e->kind, e->loc);
    c->ann = maybe_subst(e->ann, tv, repl);
    c->lit = e->lit;
    c->name = e->name;
    c->adt_name = e->adt_name;
    c->ty = maybe_subst(e->ty, tv, repl);
    for (auto& t : e->ty_args) c->ty_args.push_back(maybe_subst(t, tv, repl));
    c->params = e->params;
    c->a = clone_expr(e->a, inner_tv, repl);
    c->b = clone_expr(e->b, tv, repl);
    for (auto& a : e->args) c->args.push_back(clone_expr(a, tv, repl));
    for (auto& arm : e->arms)
        c->arms.push_back({clone_pattern(arm.pat), clone_expr(arm.body, tv, repl)});
    for (auto& f : e->fields)
        c->fields.push_back({f.name, clone_expr(f.value, tv, repl)});
    for (auto& ent : e->entries)
        c->entries.push_back(
            {maybe_subst(ent.type, tv, repl), clone_expr(ent.body, tv, repl)});
    return c;
}

namespace {

bool pattern_binds(const PatternPtr& p, const std::string& name) {
    switch (p->kind) {
        case Pattern::Kind::Wildcard: return false;
        case Pattern::Kind::Binder: return p->name == name;
        case Pattern::Kind::Ctor:
            for (auto& s : p->subs)
                if (pattern_binds(s, name)) return true;
            return false;
    }
    return false;
}

}  // namespace

ExprPtr subst_var(const ExprPtr& e, const std::string& from, const std::string& to) {
    if (!e) return nullptr;
    switch (e->kind) {
        case ExprKind::Var:
            if (e->name == from) {
                auto v = mk_var(to, e->loc);
                v->ann = e->ann;
                return v;
            }
            return e;
        case ExprKind::Lit:
            return e;
        default:
            break;
    }
    // binders shadow (binder names are unique after uniquify, so this is
    // only a safety net)
    bool shadows = false;
    switch (e->kind) {
        case ExprKind::Let:
            shadows = false;  // bound expr still sees `from`
            break;
        case ExprKind::LetRec:
        case ExprKind::Fun:
            shadows = e->name == from;
            break;
        case ExprKind::NAryFun:
            for (auto& p : e->params) shadows = shadows || p == from;
            break;
        default:
            break;
    }
    auto c = std::make_shared<Expr>(*e);
    if (!shadows) {
        if (e->kind == ExprKind::Let) {
            c->a = subst_var(e->a, from, to);
            if (e->name != from) c->b = subst_var(e->b, from, to);
        } else {
            c->a = subst_var(e->a, from, to);
            c->b = subst_var(e->b, from, to);
        }
        for (auto& a : c->args) a = subst_var(a, from, to);
        for (auto& arm : c->arms)
            if (!pattern_binds(arm.pat, from))
                arm.body = subst_var(arm.body, from, to);
        for (auto& f : c->fields) f.value = subst_var(f.value, from, to);
        for (auto& ent : c->entries) ent.body = subst_var(ent.body, from, to);
    }
    if ((e->kind == ExprKind::Match || e->kind == ExprKind::DispatchCall) &&
        e->name == from)
        c->name = to;
    return c;
}

std::vector<StmtPtr> subst_var_stmts(const std::vector<StmtPtr>& body,
                                     const std::string& from,
                                     const std::string& to) {
    std::vector<StmtPtr> out;
    bool rebound = false;
    for (auto& s : body) {
        if (rebound) {
            out.push_back(s);
            continue;
        }
        auto c = std::make_shared<Stmt>(*s);
        if (c->e) c->e = subst_var(c->e, from, to);
        if (c->e2) c->e2 = subst_var(c->e2, from, to);
        if (c->kind == StmtKind::MatchStmt) {
            if (c->name == from) c->name = to;
            for (auto& arm : c->arms)
                if (!pattern_binds(arm.pat, from))
                    arm.body = subst_var_stmts(arm.body, from, to);
        } else if ((c->kind == StmtKind::Bind || c->kind == StmtKind::LoadField ||
                    c->kind == StmtKind::MapGet) &&
                   c->name == from) {
            rebound = true;  // later statements see the new binding
        }
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// uniquify

namespace {

struct Uniquifier {
    std::set<std::string> used;
    std::map<std::string, std::vector<std::string>> scope;

    std::string bind(const std::string& orig) {
        std::string n = fresh_name(orig, used);
        used.insert(n);
        scope[orig].push_back(n);
        return n;
    }
    void unbind(const std::string& orig) {
        auto& v = scope[orig];
        v.pop_back();
        if (v.empty()) scope.erase(orig);
    }
    std::string resolve(const std::string& n) {
        auto it = scope.find(n);
        if (it == scope.end() || it->second.empty()) return n;
        return it->second.back();
    }

    PatternPtr rename_pattern(const PatternPtr& p,
                              std::vector<std::string>& bound_origs) {
        switch (p->kind) {
            case Pattern::Kind::Wildcard:
                return p;
            case Pattern::Kind::Binder: {
                std::string n = bind(p->name);
                bound_origs.push_back(p->name);
                return Pattern::binder(n, p->loc);
            }
            case Pattern::Kind::Ctor: {
                std::vector<PatternPtr> subs;
                for (auto& s : p->subs)
                    subs.push_back(rename_pattern(s, bound_origs));
                return Pattern::ctor(p->name, std::move(subs), p->loc);
            }
        }
        return p;
    }

    ExprPtr run(const ExprPtr& e) {
        if (!e) return nullptr;
        auto c = std::make_shared<Expr>(*e);
        switch (e->kind) {
            case ExprKind::Var:
                c->name = resolve(e->name);
                return c;
            case ExprKind::Lit:
                return c;
            case ExprKind::Let: {
                c->a = run(e->a);
                c->name = bind(e->name);
                c->b = run(e->b);
                unbind(e->name);
                return c;
            }
            case ExprKind::LetRec: {
                c->name = bind(e->name);
                c->a = run(e->a);
                c->b = run(e->b);
                unbind(e->name);
                return c;
            }
            case ExprKind::Fun: {
                c->name = bind(e->name);
                c->a = run(e->a);
                unbind(e->name);
                return c;
            }
            case ExprKind::NAryFun: {
                c->params.clear();
                for (auto& p : e->params) c->params.push_back(bind(p));
                c->a = run(e->a);
                for (auto& p : e->params) unbind(p);
                return c;
            }
            case ExprKind::Match: {
                c->name = resolve(e->name);
                c->arms.clear();
                for (auto& arm : e->arms) {
                    std::vector<std::string> origs;
                    MatchArm na;
                    na.pat = rename_pattern(arm.pat, origs);
                    na.body = run(arm.body);
                    for (auto it = origs.rbegin(); it != origs.rend(); ++it)
                        unbind(*it);
                    c->arms.push_back(std::move(na));
                }
                return c;
            }
            default: {
                c->a = run(e->a);
                c->b = run(e->b);
                for (auto& a : c->args) a = run(a);
                for (auto& f : c->fields) f.value = run(f.value);
                for (auto& ent : c->entries) ent.body = run(ent.body);
                c->arms.clear();
                for (auto& arm : e->arms) {
                    std::vector<std::string> origs;
                    MatchArm na;
                    na.pat = rename_pattern(arm.pat, origs);
                    na.body = run(arm.body);
                    for (auto it = origs.rbegin(); it != origs.rend(); ++it)
                        unbind(*it);
                    c->arms.push_back(std::move(na));
                }
                return c;
            }
        }
    }

    std::vector<StmtPtr> run_stmts(const std::vector<StmtPtr>& body) {
        std::vector<StmtPtr> out;
        std::vector<std::string> bound;
        for (auto& s : body) {
            auto c = std::make_shared<Stmt>(*s);
            switch (s->kind) {
                case StmtKind::Bind:
                    c->e = run(s->e);
                    c->name = bind(s->name);
                    bound.push_back(s->name);
                    break;
                case StmtKind::LoadField:
                    c->name = bind(s->name);
                    bound.push_back(s->name);
                    break;
                case StmtKind::MapGet:
                    c->e = run(s->e);
                    c->name = bind(s->name);
                    bound.push_back(s->name);
                    break;
                case StmtKind::StoreField:
                    c->e = run(s->e);
                    break;
                case StmtKind::MapPut:
                    c->e = run(s->e);
                    c->e2 = run(s->e2);
                    break;
                case StmtKind::Emit:
                    c->e = run(s->e);
                    break;
                case StmtKind::MatchStmt: {
                    c->name = resolve(s->name);
                    c->arms.clear();
                    for (auto& arm : s->arms) {
                        std::vector<std::string> origs;
                        StmtArm na;
                        na.pat = rename_pattern(arm.pat, origs);
                        na.body = run_stmts(arm.body);
                        for (auto it = origs.rbegin(); it != origs.rend(); ++it)
                            unbind(*it);
                        c->arms.push_back(std::move(na));
                    }
                    break;
                }
            }
            out.push_back(std::move(c));
        }
        for (auto it = bound.rbegin(); it != bound.rend(); ++it) unbind(*it);
        return out;
    }
};

}  // namespace

void uniquify(Program& p) {
    Uniquifier u;
    for (auto& d : p.defs) u.used.insert(d.name);
    for (auto& d : p.defs) {
        if (d.is_rec) {
            u.scope[d.name].push_back(d.name);
            d.value = u.run(d.value);
        } else {
            d.value = u.run(d.value);
            u.scope[d.name].push_back(d.name);
        }
    }
    if (p.contract) {
        for (auto& f : p.contract->fields) f.init = u.run(f.init);
        for (auto& t : p.contract->transitions) {
            std::vector<std::string> origs;
            for (auto& par : t.params) {
                std::string orig = par.name;
                par.name = u.bind(orig);
                origs.push_back(orig);
            }
            t.body = u.run_stmts(t.body);
            for (auto it = origs.rbegin(); it != origs.rend(); ++it)
                u.unbind(*it);
        }
    }
    if (p.main) p.main = u.run(p.main);
}

// ---------------------------------------------------------------------------
// reannotate: trusting bottom-up type reconstruction, valid at every stage

namespace {

struct Annotator {
    Program& prog;
    AdtRegistry reg;
    std::map<std::string, std::vector<TypePtr>> env;

    explicit Annotator(Program& p) : prog(p), reg(p) {}

    [[noreturn]] void die(const std::string& msg, SourceLoc loc) {
        throw CompileError("internal annotation failure: " + msg, loc);
    }

    void bind(const std::string& n, TypePtr t) { env[n].push_back(std::move(t)); }
    void unbind(const std::string& n) {
        auto& v = env[n];
        v.pop_back();
        if (v.empty()) env.erase(n);
    }
    TypePtr lookup(const std::string& n, SourceLoc loc) {
        auto it = env.find(n);
        if (it == env.end() || it->second.empty())
            die("unbound '" + n + "'", loc);
        return it->second.back();
    }

    void bind_pattern(const PatternPtr& p, const TypePtr& ty,
                      std::vector<std::string>& bound) {
        switch (p->kind) {
            case Pattern::Kind::Wildcard:
                return;
            case Pattern::Kind::Binder:
                bind(p->name, ty);
                bound.push_back(p->name);
                return;
            case Pattern::Kind::Ctor: {
                auto [d, idx] = reg.find_ctor(p->name);
                if (!d) die("unknown constructor " + p->name, p->loc);
                auto& c = d->ctors[idx];
                for (size_t i = 0; i < p->subs.size(); ++i) {
                    TypePtr ft = c.field_types[i];
                    if (ty->kind == TyKind::Adt)
                        ft = subst_tyvars(ft, d->ty_params, ty->args);
                    bind_pattern(p->subs[i], ft, bound);
                }
                return;
            }
        }
    }

    TypePtr builtin_type(const ExprPtr& e, const std::vector<TypePtr>& argt) {
        auto bi = builtin_by_name(e->name);
        if (!bi) die("unknown builtin " + e->name, e->loc);
        switch (*bi) {
            case BI::Add:
            case BI::Sub:
            case BI::Mul:
            case BI::Div:
            case BI::Rem:
                return argt[0];
            case BI::Lt:
            case BI::Eq:
            case BI::MapContains:
                return SType::make_adt("Bool", {});
            case BI::Concat:
            case BI::ToString:
                return SType::make_string();
            case BI::Strlen:
            case BI::MapSize:
                return SType::make_int(false, 32);
            case BI::Emp:
                return SType::make_map(e->ty_args[0], e->ty_args[1]);
            case BI::MapPut:
            case BI::MapRemove:
                return argt[0];
            case BI::MapGet:
                return SType::make_adt("Option", {argt[0]->b});
        }
        die("unhandled builtin", e->loc);
    }

    TypePtr ann(const ExprPtr& e) {
        TypePtr t = ann_inner(e);
        e->ann = t;
        return t;
    }

    TypePtr ann_inner(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::Lit:
                return e->lit.type();
            case ExprKind::Var:
                return lookup(e->name, e->loc);
            case ExprKind::Let: {
                TypePtr t = ann(e->a);
                bind(e->name, t);
                TypePtr r = ann(e->b);
                unbind(e->name);
                return r;
            }
            case ExprKind::LetRec: {
                bind(e->name, e->ty);
                ann(e->a);
                TypePtr r = ann(e->b);
                unbind(e->name);
                return r;
            }
            case ExprKind::Fun: {
                bind(e->name, e->ty);
                TypePtr tb = ann(e->a);
                unbind(e->name);
                return SType::make_fun(e->ty, tb);
            }
            case ExprKind::App: {
                TypePtr tf = ann(e->a);
                ann(e->b);
                if (tf->kind != TyKind::Fun) die("apply of non-function", e->loc);
                return tf->b;
            }
            case ExprKind::NAryFun: {
                for (size_t i = 0; i < e->params.size(); ++i)
                    bind(e->params[i], e->ty_args[i]);
                TypePtr tb = ann(e->a);
                for (auto it = e->params.rbegin(); it != e->params.rend(); ++it)
                    unbind(*it);
                return SType::make_nary_fun(e->ty_args, tb);
            }
            case ExprKind::Call: {
                TypePtr tf = ann(e->a);
                for (auto& a : e->args) ann(a);
                if (tf->kind != TyKind::NAryFun) die("call of non-function", e->loc);
                return tf->b;
            }
            case ExprKind::TFun: {
                TypePtr tb = ann(e->a);
                return SType::make_forall(e->name, tb);
            }
            case ExprKind::TApp: {
                TypePtr tf = ann(e->a);
                if (tf->kind != TyKind::Forall) die("tapp of non-forall", e->loc);
                return subst_tyvar(tf->a, tf->name, e->ty);
            }
            case ExprKind::Dispatch: {
                for (auto& ent : e->entries) ann(ent.body);
                if (!e->ann) die("dispatch without annotation", e->loc);
                return e->ann;  // Forall type recorded by monomorphize
            }
            case ExprKind::DispatchCall: {
                TypePtr tf = ann(e->a);
                if (tf->kind != TyKind::Forall)
                    die("dispatch call of non-forall", e->loc);
                return subst_tyvar(tf->a, tf->name, e->ty);
            }
            case ExprKind::Constr:
                for (auto& a : e->args) ann(a);
                return SType::make_adt(e->adt_name, e->ty_args);
            case ExprKind::Match: {
                TypePtr st = lookup(e->name, e->loc);
                TypePtr r;
                for (auto& arm : e->arms) {
                    std::vector<std::string> bound;
                    bind_pattern(arm.pat, st, bound);
                    TypePtr bt = ann(arm.body);
                    for (auto it = bound.rbegin(); it != bound.rend(); ++it)
                        unbind(*it);
                    if (!r) r = bt;
                }
                return r;
            }
            case ExprKind::Builtin: {
                std::vector<TypePtr> argt;
                for (auto& a : e->args) argt.push_back(ann(a));
                return builtin_type(e, argt);
            }
            case ExprKind::Msg:
                for (auto& f : e->fields) ann(f.value);
                return SType::make_message();
        }
        die("unreachable", e->loc);
    }

    void run_stmts(std::vector<StmtPtr>& body, std::vector<std::string>& bound) {
        for (auto& s : body) {
            switch (s->kind) {
                case StmtKind::Bind:
                    s->ann = ann(s->e);
                    bind(s->name, s->ann);
                    bound.push_back(s->name);
                    break;
                case StmtKind::LoadField:
                case StmtKind::MapGet: {
                    if (s->e) ann(s->e);
                    // s->ann set by typecheck; field types never change shape
                    bind(s->name, s->ann);
                    bound.push_back(s->name);
                    break;
                }
                case StmtKind::StoreField:
                    ann(s->e);
                    break;
                case StmtKind::MapPut:
                    ann(s->e);
                    ann(s->e2);
                    break;
                case StmtKind::Emit:
                    ann(s->e);
                    break;
                case StmtKind::MatchStmt: {
                    TypePtr st = lookup(s->name, s->loc);
                    for (auto& arm : s->arms) {
                        std::vector<std::string> abound;
                        bind_pattern(arm.pat, st, abound);
                        run_stmts(arm.body, abound);
                        for (auto it = abound.rbegin(); it != abound.rend(); ++it)
                            unbind(*it);
                    }
                    break;
                }
            }
        }
    }

    void run() {
        for (auto& d : prog.defs) {
            if (d.is_rec) {
                bind(d.name, d.rec_type);
                ann(d.value);
            } else {
                TypePtr t = ann(d.value);
                bind(d.name, t);
            }
        }
        if (prog.contract) {
            for (auto& f : prog.contract->fields) ann(f.init);
            for (auto& t : prog.contract->transitions) {
                std::vector<std::string> bound;
                for (auto& p : t.params) {
                    bind(p.name, p.type);
                    bound.push_back(p.name);
                }
                run_stmts(t.body, bound);
                for (auto it = bound.rbegin(); it != bound.rend(); ++it)
                    unbind(*it);
            }
        }
        if (prog.main) ann(prog.main);
    }
};

}  // namespace

void reannotate(Program& p) {
    Annotator a(p);
    a.run();
}

// ---------------------------------------------------------------------------
// invariant predicates

bool all_patterns_flat(const Program& p) {
    bool ok = true;
    walk_program_exprs(p, [&](const ExprPtr& e) {
        if (e->kind == ExprKind::Match)
            for (auto& arm : e->arms)
                if (!pattern_is_flat(arm.pat)) ok = false;
    });
    std::function<void(const std::vector<StmtPtr>&)> scan =
        [&](const std::vector<StmtPtr>& body) {
            for (auto& s : body)
                if (s->kind == StmtKind::MatchStmt)
                    for (auto& arm : s->arms) {
                        if (!pattern_is_flat(arm.pat)) ok = false;
                        scan(arm.body);
                    }
        };
    if (p.contract)
        for (auto& t : p.contract->transitions) scan(t.body);
    return ok;
}

bool calls_arity_consistent(const Program& p) {
    bool ok = true;
    walk_program_exprs(p, [&](const ExprPtr& e) {
        if (e->kind == ExprKind::App || e->kind == ExprKind::Fun) ok = false;
        if (e->kind == ExprKind::Call) {
            TypePtr tf = e->a->ann;
            if (!tf || tf->kind != TyKind::NAryFun ||
                tf->args.size() != e->args.size())
                ok = false;
        }
    });
    return ok;
}

namespace {

bool type_has_var(const TypePtr& t) { return t && !is_ground(t); }

}  // namespace

bool no_type_vars(const Program& p) {
    // Dispatch nodes themselves carry a Forall annotation (the table's
    // type); their entries and all other type operands must be ground.
    bool ok = true;
    walk_program_exprs(p, [&](const ExprPtr& e) {
        if (e->kind == ExprKind::TFun || e->kind == ExprKind::TApp) ok = false;
        if (e->kind == ExprKind::DispatchCall && type_has_var(e->ty)) ok = false;
        if (e->kind == ExprKind::Fun || e->kind == ExprKind::NAryFun) {
            if (e->ty && type_has_var(e->ty)) ok = false;
            for (auto& t : e->ty_args)
                if (type_has_var(t)) ok = false;
        }
        if (e->kind == ExprKind::Constr)
            for (auto& t : e->ty_args)
                if (type_has_var(t)) ok = false;
        for (auto& ent : e->entries)
            if (type_has_var(ent.type)) ok = false;
    });
    return ok;
}

}  // namespace mv::passes
