#include <algorithm>
#include <map>

#include "minivella/closured.hpp"
#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::cc {

namespace {

using passes::collect_program_names;

struct Converter {
    const Program& prog;
    AdtRegistry reg;
    ClosuredProgram out;
    std::set<std::string> globals;
    std::set<std::string> used;
    int temp_counter = 0;

    explicit Converter(const Program& p) : prog(p), reg(p) {
        out.adts = p.adts;
        for (auto& d : p.defs) globals.insert(d.name);
        collect_program_names(p, used);
    }

    std::string fresh_temp() {
        for (;;) {
            std::string n = "$t" + std::to_string(temp_counter++);
            if (used.insert(n).second) return n;
        }
    }

    [[noreturn]] void die(const std::string& msg, SourceLoc loc = {}) {
        throw CompileError("closure conversion: " + msg, loc);
    }

    // One frame per generated function body (or global init / transition /
    // main). Tracks local variable types and pending recursive bindings
    // whose closures need environment patching.
    struct Frame {
        std::map<std::string, TypePtr> types;
        // rec name -> (closure temp, env slot) list collected while the
        // rec value is being built
        std::map<std::string, std::vector<std::pair<std::string, std::string>>>
            rec_pending;
    };

    CStmtPtr emit(std::vector<CStmtPtr>& outl, CK k) {
        auto s = std::make_shared<CStmt>();
        s->kind = k;
        outl.push_back(s);
        return s;
    }

    CAtom var_atom(const std::string& n, const TypePtr& ty) {
        CAtom a;
        a.kind = globals.count(n) ? CAtom::Kind::Global : CAtom::Kind::Var;
        a.name = n;
        a.ty = ty;
        return a;
    }

    TypePtr local_type(Frame& fr, const std::string& n) {
        auto it = fr.types.find(n);
        if (it != fr.types.end()) return it->second;
        die("no type for captured variable " + n);
    }

    int lift(Frame& parent, const std::string& hint,
             const std::vector<std::string>& params,
             const std::vector<TypePtr>& param_types, const ExprPtr& body,
             std::vector<std::string>& captures_out) {
        std::set<std::string> fv = free_vars(body);
        for (auto& p : params) fv.erase(p);
        for (auto& g : globals) fv.erase(g);
        captures_out.assign(fv.begin(), fv.end());
        return lift_with_env(parent, hint, params, param_types, body,
                             captures_out);
    }

    // env prescribed by the caller (shared across dispatch-table entries)
    int lift_with_env(Frame& parent, const std::string& hint,
                      const std::vector<std::string>& params,
                      const std::vector<TypePtr>& param_types,
                      const ExprPtr& body,
                      const std::vector<std::string>& env) {
        CFunc fn;
        fn.id = (int)out.funcs.size();
        fn.name = hint + "$" + std::to_string(fn.id);
        fn.params = params;
        fn.param_types = param_types;
        fn.ret_type = body->ann;
        for (auto& v : env) {
            fn.env.push_back(v);
            fn.env_types.push_back(local_type(parent, v));
        }

        Frame fr;
        for (size_t i = 0; i < params.size(); ++i)
            fr.types[params[i]] = param_types[i];
        for (size_t i = 0; i < fn.env.size(); ++i)
            fr.types[fn.env[i]] = fn.env_types[i];

        // reserve the slot first: the body may lift further functions
        out.funcs.push_back({});
        std::vector<CStmtPtr> stmts;
        CAtom r = conv(fr, body, stmts);
        auto ret = emit(stmts, CK::Ret);
        ret->args.push_back(r);
        fn.body = std::move(stmts);
        out.funcs[fn.id] = std::move(fn);
        return out.funcs[fn.id].id;
    }

    CAtom emit_closure(Frame& fr, std::vector<CStmtPtr>& outl,
                       const std::string& hint,
                       const std::vector<std::string>& params,
                       const std::vector<TypePtr>& param_types,
                       const ExprPtr& body, const TypePtr& clo_ty) {
        std::vector<std::string> captures;
        int id = lift(fr, hint, params, param_types, body, captures);
        std::string dst = fresh_temp();
        auto s = emit(outl, CK::MakeClosure);
        s->dst = dst;
        s->dst_ty = clo_ty;
        s->fn_id = id;
        for (auto& c : captures) {
            s->args.push_back(var_atom(c, local_type(fr, c)));
            // capturing a rec name before it is bound: remember the env
            // slot so it can be patched once the binding completes
            auto it = fr.rec_pending.find(c);
            if (it != fr.rec_pending.end())
                it->second.emplace_back(dst, c);
        }
        fr.types[dst] = clo_ty;
        return var_atom(dst, clo_ty);
    }

    void bind_name(Frame& fr, std::vector<CStmtPtr>& outl,
                   const std::string& name, const CAtom& value) {
        auto s = emit(outl, CK::Copy);
        s->dst = name;
        s->dst_ty = value.ty;
        s->args.push_back(value);
        fr.types[name] = value.ty;
    }

    CAtom conv(Frame& fr, const ExprPtr& e, std::vector<CStmtPtr>& outl) {
        switch (e->kind) {
            case ExprKind::Lit: {
                CAtom a;
                a.kind = CAtom::Kind::Lit;
                a.lit = e->lit;
                a.ty = e->ann;
                return a;
            }
            case ExprKind::Var:
                return var_atom(e->name, e->ann);
            case ExprKind::Let: {
                CAtom v = conv(fr, e->a, outl);
                bind_name(fr, outl, e->name, v);
                return conv(fr, e->b, outl);
            }
            case ExprKind::LetRec: {
                fr.rec_pending[e->name];
                fr.types[e->name] = e->ty;
                CAtom v = conv(fr, e->a, outl);
                bind_name(fr, outl, e->name, v);
                for (auto& [clo, slot] : fr.rec_pending[e->name]) {
                    auto s = emit(outl, CK::EnvPatch);
                    s->field = slot;
                    s->args.push_back(var_atom(clo, fr.types[clo]));
                    s->args.push_back(var_atom(e->name, e->ty));
                }
                fr.rec_pending.erase(e->name);
                return conv(fr, e->b, outl);
            }
            case ExprKind::NAryFun:
                return emit_closure(fr, outl, "fn", e->params, e->ty_args,
                                    e->a, e->ann);
            case ExprKind::Call: {
                CAtom f = conv(fr, e->a, outl);
                std::vector<CAtom> args;
                for (auto& a : e->args) args.push_back(conv(fr, a, outl));
                std::string dst = fresh_temp();
                auto s = emit(outl, CK::Call);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->args.push_back(f);
                for (auto& a : args) s->args.push_back(a);
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::Dispatch: {
                // all entries of the table share one environment: the union
                // of their free variables
                std::set<std::string> fv;
                for (auto& ent : e->entries) {
                    auto f = free_vars(ent.body);
                    fv.insert(f.begin(), f.end());
                }
                for (auto& g : globals) fv.erase(g);
                std::vector<std::string> env(fv.begin(), fv.end());

                CDispatchTable tbl;
                tbl.id = (int)out.dispatch_tables.size();
                tbl.env = env;
                for (auto& v : env) tbl.env_types.push_back(local_type(fr, v));
                out.dispatch_tables.push_back({});
                for (auto& ent : e->entries) {
                    // each entry is a zero-parameter thunk
                    int id = lift_with_env(fr, "inst", {}, {}, ent.body, env);
                    tbl.entries.emplace_back(ent.type, id);
                }
                out.dispatch_tables[tbl.id] = tbl;

                std::string dst = fresh_temp();
                auto s = emit(outl, CK::MakeDispatch);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->table_id = tbl.id;
                for (auto& v : env) {
                    s->args.push_back(var_atom(v, local_type(fr, v)));
                    auto it = fr.rec_pending.find(v);
                    if (it != fr.rec_pending.end())
                        it->second.emplace_back(dst, v);
                }
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::DispatchCall: {
                CAtom t = conv(fr, e->a, outl);
                std::string dst = fresh_temp();
                auto s = emit(outl, CK::DispatchCall);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->key_ty = e->ty;
                s->args.push_back(t);
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::Constr: {
                std::vector<CAtom> args;
                for (auto& a : e->args) args.push_back(conv(fr, a, outl));
                std::string dst = fresh_temp();
                auto s = emit(outl, CK::MakeConstr);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->op = e->name;
                s->adt_name = e->adt_name;
                s->ty_args = e->ty_args;
                s->args = std::move(args);
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::Builtin: {
                std::vector<CAtom> args;
                for (auto& a : e->args) args.push_back(conv(fr, a, outl));
                std::string dst = fresh_temp();
                auto s = emit(outl, CK::BuiltinOp);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->op = e->name;
                s->ty_args = e->ty_args;
                s->args = std::move(args);
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::Msg: {
                std::vector<std::pair<std::string, CAtom>> fields;
                for (auto& f : e->fields)
                    fields.emplace_back(f.name, conv(fr, f.value, outl));
                std::string dst = fresh_temp();
                auto s = emit(outl, CK::MakeMsg);
                s->dst = dst;
                s->dst_ty = e->ann;
                s->msg_fields = std::move(fields);
                fr.types[dst] = e->ann;
                return var_atom(dst, e->ann);
            }
            case ExprKind::Match: {
                std::string dst = fresh_temp();
                fr.types[dst] = e->ann;
                auto s = emit(outl, CK::Switch);
                s->dst = dst;  // informational; arms assign it
                s->dst_ty = e->ann;
                TypePtr scrut_ty = local_type(fr, e->name);
                s->args.push_back(var_atom(e->name, scrut_ty));
                for (auto& arm : e->arms)
                    s->arms.push_back(
                        conv_arm(fr, arm.pat, scrut_ty, [&](Frame& f2,
                                                            std::vector<CStmtPtr>& body) {
                            CAtom r = conv(f2, arm.body, body);
                            auto cp = emit(body, CK::Copy);
                            cp->dst = dst;
                            cp->dst_ty = e->ann;
                            cp->args.push_back(r);
                        }));
                return var_atom(dst, e->ann);
            }
            case ExprKind::Fun:
            case ExprKind::App:
            case ExprKind::TFun:
            case ExprKind::TApp:
                die("unexpected pre-lowering form", e->loc);
        }
        die("unreachable", e->loc);
    }

    template <class BodyFn>
    CArm conv_arm(Frame& fr, const PatternPtr& pat, const TypePtr& scrut_ty,
                  BodyFn&& fill) {
        CArm arm;
        if (pat->kind == Pattern::Kind::Ctor) {
            auto [decl, idx] = reg.find_ctor(pat->name);
            if (!decl) die("unknown constructor " + pat->name, pat->loc);
            arm.ctor = pat->name;
            arm.tag = idx;
            auto& c = decl->ctors[idx];
            for (size_t i = 0; i < pat->subs.size(); ++i) {
                TypePtr ft = c.field_types[i];
                if (scrut_ty->kind == TyKind::Adt)
                    ft = subst_tyvars(ft, decl->ty_params, scrut_ty->args);
                arm.binder_types.push_back(ft);
                if (pat->subs[i]->kind == Pattern::Kind::Binder) {
                    arm.binders.push_back(pat->subs[i]->name);
                    fr.types[pat->subs[i]->name] = ft;
                } else {
                    arm.binders.push_back("");
                }
            }
        } else {
            // wildcard / bare binder arm: tag -1 = default
            arm.tag = -1;
            if (pat->kind == Pattern::Kind::Binder) {
                arm.ctor = pat->name;  // reuse: bind scrutinee to this name
                fr.types[pat->name] = scrut_ty;
            }
        }
        fill(fr, arm.body);
        return arm;
    }

    std::vector<CStmtPtr> conv_body(Frame& fr, const ExprPtr& e) {
        std::vector<CStmtPtr> stmts;
        CAtom r = conv(fr, e, stmts);
        auto ret = emit(stmts, CK::Ret);
        ret->args.push_back(r);
        return stmts;
    }

    void conv_stmts(Frame& fr, const std::vector<StmtPtr>& body,
                    std::vector<CStmtPtr>& outl) {
        for (auto& s : body) {
            switch (s->kind) {
                case StmtKind::Bind: {
                    CAtom v = conv(fr, s->e, outl);
                    bind_name(fr, outl, s->name, v);
                    break;
                }
                case StmtKind::LoadField: {
                    auto c = emit(outl, CK::LoadField);
                    c->dst = s->name;
                    c->dst_ty = s->ann;
                    c->field = s->field;
                    fr.types[s->name] = s->ann;
                    break;
                }
                case StmtKind::StoreField: {
                    CAtom v = conv(fr, s->e, outl);
                    auto c = emit(outl, CK::StoreField);
                    c->field = s->field;
                    c->args.push_back(v);
                    break;
                }
                case StmtKind::MapGet: {
                    CAtom k = conv(fr, s->e, outl);
                    auto c = emit(outl, CK::MapGetS);
                    c->dst = s->name;
                    c->dst_ty = s->ann;
                    c->field = s->field;
                    c->args.push_back(k);
                    fr.types[s->name] = s->ann;
                    break;
                }
                case StmtKind::MapPut: {
                    CAtom k = conv(fr, s->e, outl);
                    CAtom v = conv(fr, s->e2, outl);
                    auto c = emit(outl, CK::MapPutS);
                    c->field = s->field;
                    c->args.push_back(k);
                    c->args.push_back(v);
                    break;
                }
                case StmtKind::Emit: {
                    CAtom v = conv(fr, s->e, outl);
                    auto c = emit(outl, CK::Emit);
                    c->is_event = s->is_event;
                    c->args.push_back(v);
                    break;
                }
                case StmtKind::MatchStmt: {
                    auto c = emit(outl, CK::Switch);
                    TypePtr scrut_ty = local_type(fr, s->name);
                    c->args.push_back(var_atom(s->name, scrut_ty));
                    for (auto& arm : s->arms)
                        c->arms.push_back(conv_arm(
                            fr, arm.pat, scrut_ty,
                            [&](Frame& f2, std::vector<CStmtPtr>& b) {
                                conv_stmts(f2, arm.body, b);
                            }));
                    break;
                }
            }
        }
    }

    void run() {
        for (auto& d : prog.defs) {
            Frame fr;
            CGlobal g;
            g.name = d.name;
            g.ty = d.is_rec ? d.rec_type : d.value->ann;
            fr.types[d.name] = g.ty;  // self-reference goes via Global
            g.body = conv_body(fr, d.value);
            out.globals.push_back(std::move(g));
        }
        if (prog.contract) {
            CContract cc;
            cc.name = prog.contract->name;
            for (auto& f : prog.contract->fields) {
                Frame fr;
                CField cf;
                cf.name = f.name;
                cf.ty = f.type;
                cf.init = conv_body(fr, f.init);
                cc.fields.push_back(std::move(cf));
            }
            for (auto& t : prog.contract->transitions) {
                Frame fr;
                CTransition ct;
                ct.name = t.name;
                for (auto& p : t.params) {
                    ct.params.push_back(p.name);
                    ct.param_types.push_back(p.type);
                    fr.types[p.name] = p.type;
                }
                conv_stmts(fr, t.body, ct.body);
                cc.transitions.push_back(std::move(ct));
            }
            out.contract = std::move(cc);
        }
        if (prog.main) {
            Frame fr;
            out.main = conv_body(fr, prog.main);
            out.main_ty = prog.main->ann;
        }
    }
};

}  // namespace

ClosuredProgram closure_convert(const Program& p) {
    Converter c(p);
    c.run();
    return std::move(c.out);
}

// ---------------------------------------------------------------------------

namespace {

void collect_defined(const std::vector<CStmtPtr>& body,
                     std::set<std::string>& defined) {
    for (auto& s : body) {
        if (!s->dst.empty()) defined.insert(s->dst);
        for (auto& arm : s->arms) {
            for (auto& b : arm.binders)
                if (!b.empty()) defined.insert(b);
            if (arm.tag == -1 && !arm.ctor.empty()) defined.insert(arm.ctor);
            collect_defined(arm.body, defined);
        }
    }
}

bool check_uses(const std::vector<CStmtPtr>& body,
                const std::set<std::string>& defined,
                const std::set<std::string>& globals) {
    for (auto& s : body) {
        for (auto& a : s->args) {
            if (a.kind == CAtom::Kind::Var && !defined.count(a.name))
                return false;
            if (a.kind == CAtom::Kind::Global && !globals.count(a.name))
                return false;
        }
        for (auto& [n, a] : s->msg_fields)
            if (a.kind == CAtom::Kind::Var && !defined.count(a.name))
                return false;
        for (auto& arm : s->arms)
            if (!check_uses(arm.body, defined, globals)) return false;
    }
    return true;
}

bool check_body(const std::vector<CStmtPtr>& body,
                std::set<std::string> defined,
                const std::set<std::string>& globals) {
    collect_defined(body, defined);
    return check_uses(body, defined, globals);
}

}  // namespace

bool no_residual_free_vars(const ClosuredProgram& cp) {
    std::set<std::string> globals;
    for (auto& g : cp.globals) globals.insert(g.name);
    for (auto& f : cp.funcs) {
        std::set<std::string> defined(f.params.begin(), f.params.end());
        defined.insert(f.env.begin(), f.env.end());
        if (!check_body(f.body, defined, globals)) return false;
    }
    for (auto& g : cp.globals)
        if (!check_body(g.body, {}, globals)) return false;
    if (cp.contract) {
        for (auto& f : cp.contract->fields)
            if (!check_body(f.init, {}, globals)) return false;
        for (auto& t : cp.contract->transitions) {
            std::set<std::string> defined(t.params.begin(), t.params.end());
            if (!check_body(t.body, defined, globals)) return false;
        }
    }
    if (!cp.main.empty() && !check_body(cp.main, {}, globals)) return false;
    return true;
}

}  // namespace mv::cc
