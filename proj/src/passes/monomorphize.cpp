#include <algorithm>
#include <map>

#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::passes {

namespace {

// Monovariant flow analysis: for every variable / constructor field /
// expression, the set of function-like nodes (TFun, NAryFun, Fun, Dispatch)
// it may evaluate to. The interesting output is inst[tfun-label]: the set of
// types the type abstraction is instantiated at.
struct Flow {
    const Program& prog;

    std::map<const Expr*, std::set<const Expr*>> val;
    std::map<std::string, std::set<const Expr*>> varval;
    std::map<std::pair<std::string, int>, std::set<const Expr*>> ctorfield;
    std::map<const Expr*, std::vector<TypePtr>> inst;  // TFun -> inst types
    bool changed = false;

    explicit Flow(const Program& p) : prog(p) {}

    void add(std::set<const Expr*>& dst, const std::set<const Expr*>& src) {
        for (auto* l : src)
            if (dst.insert(l).second) changed = true;
    }

    void add_inst(const Expr* tfun, const TypePtr& t) {
        auto& v = inst[tfun];
        for (auto& u : v)
            if (alpha_equal(u, t)) return;
        v.push_back(t);
        changed = true;
    }

    void bind_pattern(const PatternPtr& p) {
        // patterns are flat here; a ctor binder receives that field's flow
        if (p->kind != Pattern::Kind::Ctor) return;
        for (size_t i = 0; i < p->subs.size(); ++i)
            if (p->subs[i]->kind == Pattern::Kind::Binder)
                add(varval[p->subs[i]->name],
                    ctorfield[{p->name, (int)i}]);
    }

    const std::set<const Expr*>& eval(const ExprPtr& e) {
        auto& mine = val[e.get()];
        switch (e->kind) {
            case ExprKind::Lit:
                break;
            case ExprKind::Var:
                add(mine, varval[e->name]);
                break;
            case ExprKind::Let:
                add(varval[e->name], eval(e->a));
                add(mine, eval(e->b));
                break;
            case ExprKind::LetRec:
                add(varval[e->name], eval(e->a));
                add(mine, eval(e->b));
                break;
            case ExprKind::Fun:
                eval(e->a);
                mine.insert(e.get());
                break;
            case ExprKind::NAryFun:
            case ExprKind::TFun:
            case ExprKind::Dispatch:
                if (e->kind == ExprKind::TFun)
                    eval(e->a);
                else if (e->kind == ExprKind::NAryFun)
                    eval(e->a);
                else
                    for (auto& ent : e->entries) eval(ent.body);
                mine.insert(e.get());
                break;
            case ExprKind::App: {
                auto& fs = eval(e->a);
                auto& av = eval(e->b);
                for (auto* l : fs) {
                    if (l->kind != ExprKind::Fun) continue;
                    add(varval[l->name], av);
                    add(mine, val[l->a.get()]);
                }
                break;
            }
            case ExprKind::Call: {
                auto& fs = eval(e->a);
                std::vector<const std::set<const Expr*>*> avs;
                for (auto& a : e->args) avs.push_back(&eval(a));
                for (auto* l : fs) {
                    if (l->kind != ExprKind::NAryFun ||
                        l->params.size() != e->args.size())
                        continue;
                    for (size_t i = 0; i < avs.size(); ++i)
                        add(varval[l->params[i]], *avs[i]);
                    add(mine, val[l->a.get()]);
                }
                break;
            }
            case ExprKind::TApp:
            case ExprKind::DispatchCall: {
                auto& fs = eval(e->a);
                for (auto* l : fs) {
                    if (l->kind == ExprKind::TFun) {
                        if (is_ground(e->ty)) add_inst(l, e->ty);
                        add(mine, val[l->a.get()]);
                    } else if (l->kind == ExprKind::Dispatch) {
                        // record the instantiation so the table can grow a
                        // missing entry in a later round
                        if (is_ground(e->ty)) add_inst(l, e->ty);
                        for (auto& ent : l->entries)
                            add(mine, val[ent.body.get()]);
                    }
                }
                break;
            }
            case ExprKind::Constr:
                for (size_t i = 0; i < e->args.size(); ++i)
                    add(ctorfield[{e->name, (int)i}], eval(e->args[i]));
                break;
            case ExprKind::Match:
                for (auto& arm : e->arms) {
                    bind_pattern(arm.pat);
                    add(mine, eval(arm.body));
                }
                break;
            case ExprKind::Builtin:
                for (auto& a : e->args) eval(a);
                break;  // functions never live in maps or primitives
            case ExprKind::Msg:
                for (auto& f : e->fields) eval(f.value);
                break;
        }
        return mine;
    }

    void eval_stmts(const std::vector<StmtPtr>& body) {
        for (auto& s : body) {
            if (s->e) eval(s->e);
            if (s->e2) eval(s->e2);
            if (s->kind == StmtKind::Bind) add(varval[s->name], val[s->e.get()]);
            for (auto& arm : s->arms) {
                bind_pattern(arm.pat);
                eval_stmts(arm.body);
            }
        }
    }

    void run() {
        for (int iter = 0; iter < 1000; ++iter) {
            changed = false;
            for (auto& d : prog.defs) {
                add(varval[d.name], eval(d.value));
            }
            if (prog.contract) {
                for (auto& f : prog.contract->fields) eval(f.init);
                for (auto& t : prog.contract->transitions) eval_stmts(t.body);
            }
            if (prog.main) eval(prog.main);
            if (!changed) return;
        }
        throw CompileError("internal: type-flow analysis did not converge");
    }
};

// Specialization template of a converted TFun: its type variable and the
// pristine body, cloned (with substitution) once per instantiation type.
struct Template {
    std::string tv;
    ExprPtr body;
};
using Templates = std::map<const Expr*, Template>;

// Per round: TFun with >= 1 ground instantiation -> Dispatch (new entries
// are added to existing tables as more instantiations surface); ground
// TApp -> DispatchCall. TFun bodies are left untouched until cloned, so
// nested abstractions specialize inside the clones, where the outer type
// variable is already substituted.
struct Specializer {
    const Flow& flow;
    Templates& templates;
    bool finalize = false;  // analysis converged: drop uninstantiated TFuns
    bool progress = false;
    int remaining = 0;  // reachable TFun/TApp nodes left after the round

    std::vector<TypePtr> ground_insts(const Expr* label) const {
        std::vector<TypePtr> out;
        auto it = flow.inst.find(label);
        if (it != flow.inst.end())
            for (auto& t : it->second)
                if (is_ground(t)) out.push_back(t);
        return out;
    }

    static void sort_entries(std::vector<DispatchEntry>& es) {
        std::sort(es.begin(), es.end(),
                  [](const DispatchEntry& a, const DispatchEntry& b) {
                      return type_sort_key(a.type) < type_sort_key(b.type);
                  });
    }

    void rewrite(const ExprPtr& e) {
        if (!e) return;
        if (e->kind == ExprKind::TFun) {
            std::vector<TypePtr> insts = ground_insts(e.get());
            if (insts.empty() && !finalize) {
                ++remaining;  // wait for an instantiation to surface
                return;
            }
            Template tmpl{e->name, e->a};
            e->kind = ExprKind::Dispatch;
            e->name.clear();
            e->a = nullptr;
            e->entries.clear();
            for (auto& t : insts)
                e->entries.push_back({t, clone_expr(tmpl.body, &tmpl.tv, t)});
            sort_entries(e->entries);
            templates[e.get()] = std::move(tmpl);
            // ann stays the Forall type recorded by the annotator
            progress = true;
            for (auto& ent : e->entries) rewrite(ent.body);
            return;
        }
        if (e->kind == ExprKind::Dispatch) {
            auto it = templates.find(e.get());
            for (auto& t : ground_insts(e.get())) {
                bool have = false;
                for (auto& ent : e->entries)
                    have = have || alpha_equal(ent.type, t);
                if (have) continue;
                if (it == templates.end())
                    throw CompileError(
                        "cannot monomorphize: late instantiation of a "
                        "dispatch table without a template");
                e->entries.push_back(
                    {t, clone_expr(it->second.body, &it->second.tv, t)});
                progress = true;
            }
            sort_entries(e->entries);
            for (auto& ent : e->entries) rewrite(ent.body);
            return;
        }
        if (e->kind == ExprKind::TApp && is_ground(e->ty)) {
            e->kind = ExprKind::DispatchCall;
            progress = true;
        }
        if (e->kind == ExprKind::TApp) ++remaining;
        rewrite(e->a);
        rewrite(e->b);
        for (auto& a : e->args) rewrite(a);
        for (auto& arm : e->arms) rewrite(arm.body);
        for (auto& f : e->fields) rewrite(f.value);
    }

    void rewrite_stmts(const std::vector<StmtPtr>& body) {
        for (auto& s : body) {
            if (s->e) rewrite(s->e);
            if (s->e2) rewrite(s->e2);
            for (auto& arm : s->arms) rewrite_stmts(arm.body);
        }
    }

    void run(Program& p) {
        for (auto& d : p.defs) rewrite(d.value);
        if (p.contract) {
            for (auto& f : p.contract->fields) rewrite(f.init);
            for (auto& t : p.contract->transitions) rewrite_stmts(t.body);
        }
        if (p.main) rewrite(p.main);
    }
};

}  // namespace

void monomorphize(Program& p) {
    constexpr int kMaxRounds = 64;
    Templates templates;
    bool finalize = false;
    for (int round = 0; round < kMaxRounds; ++round) {
        reannotate(p);
        Flow flow(p);
        flow.run();
        Specializer spec{flow, templates, finalize};
        spec.run(p);
        if (!spec.progress) {
            if (spec.remaining == 0) {
                reannotate(p);
                return;
            }
            if (!finalize) {
                // the analysis has converged; anything still waiting for an
                // instantiation is unreachable and becomes an empty table
                finalize = true;
                continue;
            }
            throw CompileError(
                "cannot monomorphize: a type application never becomes "
                "ground (polymorphic recursion?)");
        }
        finalize = false;
    }
    throw CompileError("cannot monomorphize: specialization did not "
                       "terminate within the round limit");
}

}  // namespace mv::passes
