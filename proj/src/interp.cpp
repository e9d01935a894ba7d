#include <pthread.h>

#include <unordered_map>

#include "minivella/builtins.hpp"
#include "minivella/interp.hpp"

namespace mv::interp {

using rt::RVal;
using rt::RValPtr;
using rt::WideInt;

namespace {

struct IVal;
using IValPtr = std::shared_ptr<const IVal>;

struct Env {
    std::shared_ptr<Env> parent;
    std::unordered_map<std::string, IValPtr> vars;
};
using EnvPtr = std::shared_ptr<Env>;

struct TEnv {
    std::shared_ptr<const TEnv> parent;
    std::string name;
    TypePtr ty;
};
using TEnvPtr = std::shared_ptr<const TEnv>;

struct IVal {
    enum class Kind { Int, Str, Bytes, Adt, Map, Msg, Clo, TClo, NClo, Disp };
    Kind kind;
    WideInt i;
    std::string s;
    std::vector<uint8_t> bytes;
    std::string ctor;
    int tag = 0;
    std::vector<IValPtr> fields;
    rt::MapPtr map;
    rt::MsgPtr msg;
    // function-like values
    std::string param;                // Clo parameter / TClo type variable
    std::vector<std::string> params;  // NClo
    ExprPtr body;
    std::vector<DispatchEntry> entries;  // Disp
    EnvPtr env;
    TEnvPtr tenv;
};

IValPtr mk(IVal v) { return std::make_shared<IVal>(std::move(v)); }

}  // namespace

struct Interp::Impl {
    const Program& prog;
    AdtRegistry reg;
    rt::Limits limits;
    EnvPtr genv = std::make_shared<Env>();
    rt::StateStore st;
    std::unordered_map<std::string, TypePtr> field_types;
    std::vector<rt::MsgPtr> out_messages, out_events;
    uint64_t steps = 0;

    Impl(const Program& p, rt::Limits lim) : prog(p), reg(p), limits(lim) {
        if (p.contract)
            for (auto& f : p.contract->fields) field_types[f.name] = f.type;
    }

    [[noreturn]] void internal(const std::string& msg) {
        throw RtError(RtErrorKind::Internal, msg);
    }

    void bump() {
        if (++steps > limits.step_limit)
            throw RtError(RtErrorKind::StepLimitExceeded,
                          "step limit exceeded");
    }

    // ----- type resolution under the type environment -----

    TypePtr resolve(const TypePtr& t, const TEnvPtr& tenv) {
        if (!t) internal("missing type annotation");
        if (is_ground(t)) return t;
        TypePtr r = t;
        for (const TEnv* e = tenv.get(); e; e = e->parent.get())
            r = subst_tyvar(r, e->name, e->ty);
        return r;
    }

    // ----- IVal <-> RVal (at map / message / state boundaries) -----

    RValPtr to_rval(const TypePtr& ty, const IValPtr& v) {
        switch (v->kind) {
            case IVal::Kind::Int:
                return RVal::make_int(v->i);
            case IVal::Kind::Str:
                return RVal::make_str(v->s);
            case IVal::Kind::Bytes:
                return RVal::make_bytes(v->bytes);
            case IVal::Kind::Map:
                return RVal::make_map(v->map);
            case IVal::Kind::Msg:
                return RVal::make_msg(v->msg);
            case IVal::Kind::Adt: {
                if (!ty || ty->kind != TyKind::Adt)
                    internal("constructor value without ADT type");
                const ADTDecl* d = reg.find_adt(ty->name);
                if (!d) internal("unknown ADT " + ty->name);
                const ADTCtor& c = d->ctors[v->tag];
                std::vector<RValPtr> fs;
                for (size_t i = 0; i < c.field_types.size(); ++i) {
                    TypePtr ft = c.field_types[i];
                    for (size_t k = 0; k < d->ty_params.size(); ++k)
                        ft = subst_tyvar(ft, d->ty_params[k], ty->args[k]);
                    fs.push_back(to_rval(ft, v->fields[i]));
                }
                return RVal::make_adt(v->ctor, v->tag, std::move(fs));
            }
            default:
                throw RtError(RtErrorKind::SerializationError,
                              "function values cannot be serialized");
        }
    }

    IValPtr from_rval(const TypePtr& ty, const RValPtr& v) {
        IVal r{};
        switch (v->kind) {
            case RVal::Kind::Int:
                r.kind = IVal::Kind::Int;
                r.i = v->i;
                break;
            case RVal::Kind::Str:
                r.kind = IVal::Kind::Str;
                r.s = v->s;
                break;
            case RVal::Kind::Bytes:
                r.kind = IVal::Kind::Bytes;
                r.bytes = v->bytes;
                break;
            case RVal::Kind::Map:
                r.kind = IVal::Kind::Map;
                r.map = v->map;
                break;
            case RVal::Kind::Msg:
                r.kind = IVal::Kind::Msg;
                r.msg = v->msg;
                break;
            case RVal::Kind::Adt: {
                r.kind = IVal::Kind::Adt;
                r.ctor = v->ctor;
                r.tag = v->tag;
                if (!ty || ty->kind != TyKind::Adt)
                    internal("ADT value without ADT type");
                const ADTDecl* d = reg.find_adt(ty->name);
                if (!d) internal("unknown ADT " + ty->name);
                const ADTCtor& c = d->ctors[v->tag];
                for (size_t i = 0; i < c.field_types.size(); ++i) {
                    TypePtr ft = c.field_types[i];
                    for (size_t k = 0; k < d->ty_params.size(); ++k)
                        ft = subst_tyvar(ft, d->ty_params[k], ty->args[k]);
                    r.fields.push_back(from_rval(ft, v->fields[i]));
                }
                break;
            }
        }
        return mk(std::move(r));
    }

    // ----- constructors for common values -----

    IValPtr make_adt(const std::string& ctor, std::vector<IValPtr> fields) {
        auto [d, tag] = reg.find_ctor(ctor);
        if (!d) internal("unknown constructor " + ctor);
        IVal v{};
        v.kind = IVal::Kind::Adt;
        v.ctor = ctor;
        v.tag = tag;
        v.fields = std::move(fields);
        return mk(std::move(v));
    }

    IValPtr make_bool(bool b) { return make_adt(b ? "True" : "False", {}); }

    IValPtr make_u32(uint64_t n) {
        IVal v{};
        v.kind = IVal::Kind::Int;
        v.i = WideInt::make(false, 32, (int64_t)n);
        return mk(std::move(v));
    }

    // ----- environments -----

    IValPtr lookup(const EnvPtr& env, const std::string& name) {
        for (Env* e = env.get(); e; e = e->parent.get()) {
            auto it = e->vars.find(name);
            if (it != e->vars.end()) return it->second;
        }
        internal("unbound variable " + name);
    }

    static EnvPtr child(EnvPtr parent) {
        auto e = std::make_shared<Env>();
        e->parent = std::move(parent);
        return e;
    }

    // ----- pattern matching -----

    bool match_pattern(const PatternPtr& p, const IValPtr& v, EnvPtr& env) {
        switch (p->kind) {
            case Pattern::Kind::Wildcard:
                return true;
            case Pattern::Kind::Binder:
                env->vars[p->name] = v;
                return true;
            case Pattern::Kind::Ctor: {
                if (v->kind != IVal::Kind::Adt || v->ctor != p->name)
                    return false;
                for (size_t i = 0; i < p->subs.size(); ++i)
                    if (!match_pattern(p->subs[i], v->fields[i], env))
                        return false;
                return true;
            }
        }
        return false;
    }

    // ----- application -----

    IValPtr apply(const IValPtr& f, const std::vector<IValPtr>& args) {
        if (f->kind == IVal::Kind::Clo) {
            if (args.size() != 1) internal("curried call with wrong arity");
            EnvPtr e = child(f->env);
            e->vars[f->param] = args[0];
            return eval(f->body, e, f->tenv);
        }
        if (f->kind == IVal::Kind::NClo) {
            if (args.size() != f->params.size())
                internal("call arity mismatch");
            EnvPtr e = child(f->env);
            for (size_t i = 0; i < args.size(); ++i)
                e->vars[f->params[i]] = args[i];
            return eval(f->body, e, f->tenv);
        }
        internal("applied a non-function value");
    }

    // ----- expression evaluation -----

    IValPtr eval(const ExprPtr& e, const EnvPtr& env, const TEnvPtr& tenv) {
        bump();
        switch (e->kind) {
            case ExprKind::Lit: {
                IVal v{};
                switch (e->lit.kind) {
                    case Literal::Kind::Int:
                        v.kind = IVal::Kind::Int;
                        v.i = e->lit.i;
                        break;
                    case Literal::Kind::Str:
                        v.kind = IVal::Kind::Str;
                        v.s = e->lit.s;
                        break;
                    case Literal::Kind::ByStrX:
                        v.kind = IVal::Kind::Bytes;
                        v.bytes = e->lit.bytes;
                        break;
                }
                return mk(std::move(v));
            }
            case ExprKind::Var:
                return lookup(env, e->name);
            case ExprKind::Let: {
                EnvPtr inner = child(env);
                inner->vars[e->name] = eval(e->a, env, tenv);
                return eval(e->b, inner, tenv);
            }
            case ExprKind::LetRec: {
                // the bound value's closures capture `inner`; by the time
                // they run, the name is present
                EnvPtr inner = child(env);
                inner->vars[e->name] = eval(e->a, inner, tenv);
                return eval(e->b, inner, tenv);
            }
            case ExprKind::Fun: {
                IVal v{};
                v.kind = IVal::Kind::Clo;
                v.param = e->name;
                v.body = e->a;
                v.env = env;
                v.tenv = tenv;
                return mk(std::move(v));
            }
            case ExprKind::App: {
                IValPtr f = eval(e->a, env, tenv);
                IValPtr a = eval(e->b, env, tenv);
                return apply(f, {a});
            }
            case ExprKind::TFun: {
                IVal v{};
                v.kind = IVal::Kind::TClo;
                v.param = e->name;
                v.body = e->a;
                v.env = env;
                v.tenv = tenv;
                return mk(std::move(v));
            }
            case ExprKind::TApp: {
                IValPtr f = eval(e->a, env, tenv);
                if (f->kind != IVal::Kind::TClo)
                    internal("type application of a non-type-function");
                auto t = std::make_shared<TEnv>();
                t->parent = f->tenv;
                t->name = f->param;
                t->ty = resolve(e->ty, tenv);
                return eval(f->body, f->env, t);
            }
            case ExprKind::Constr: {
                std::vector<IValPtr> fields;
                for (auto& a : e->args) fields.push_back(eval(a, env, tenv));
                return make_adt(e->name, std::move(fields));
            }
            case ExprKind::Match: {
                IValPtr scrut = lookup(env, e->name);
                for (auto& arm : e->arms) {
                    EnvPtr inner = child(env);
                    if (match_pattern(arm.pat, scrut, inner))
                        return eval(arm.body, inner, tenv);
                }
                internal("no arm matched");
            }
            case ExprKind::Builtin:
                return eval_builtin(e, env, tenv);
            case ExprKind::Msg: {
                auto m = std::make_shared<rt::MsgVal>();
                for (auto& f : e->fields) {
                    IValPtr v = eval(f.value, env, tenv);
                    TypePtr ft = resolve(f.value->ann, tenv);
                    m->fields.push_back({f.name, ft, to_rval(ft, v)});
                }
                IVal v{};
                v.kind = IVal::Kind::Msg;
                v.msg = std::move(m);
                return mk(std::move(v));
            }
            case ExprKind::NAryFun: {
                IVal v{};
                v.kind = IVal::Kind::NClo;
                v.params = e->params;
                v.body = e->a;
                v.env = env;
                v.tenv = tenv;
                return mk(std::move(v));
            }
            case ExprKind::Call: {
                IValPtr f = eval(e->a, env, tenv);
                std::vector<IValPtr> args;
                for (auto& a : e->args) args.push_back(eval(a, env, tenv));
                return apply(f, args);
            }
            case ExprKind::Dispatch: {
                IVal v{};
                v.kind = IVal::Kind::Disp;
                v.entries = e->entries;
                v.env = env;
                v.tenv = tenv;
                return mk(std::move(v));
            }
            case ExprKind::DispatchCall: {
                IValPtr f = eval(e->a, env, tenv);
                if (f->kind != IVal::Kind::Disp)
                    internal("dispatch call on a non-dispatch value");
                TypePtr key = resolve(e->ty, tenv);
                for (auto& ent : f->entries)
                    if (alpha_equal(ent.type, key))
                        return eval(ent.body, f->env, f->tenv);
                internal("dispatch table has no entry for " + show_type(key));
            }
        }
        internal("bad expression kind");
    }

    bool prim_eq(const IValPtr& a, const IValPtr& b) {
        if (a->kind != b->kind) internal("eq on mismatched values");
        switch (a->kind) {
            case IVal::Kind::Int:
                return rt::wi_eq(a->i, b->i);
            case IVal::Kind::Str:
                return a->s == b->s;
            case IVal::Kind::Bytes:
                return a->bytes == b->bytes;
            default:
                internal("eq on non-primitive value");
        }
    }

    IValPtr eval_builtin(const ExprPtr& e, const EnvPtr& env,
                         const TEnvPtr& tenv) {
        auto bi = builtin_by_name(e->name);
        if (!bi) internal("unknown builtin " + e->name);
        std::vector<IValPtr> as;
        for (auto& a : e->args) as.push_back(eval(a, env, tenv));
        auto ty_arg = [&](int i) { return resolve(e->ty_args[i], tenv); };
        switch (*bi) {
            case BI::Add:
            case BI::Sub:
            case BI::Mul:
            case BI::Div:
            case BI::Rem: {
                IVal v{};
                v.kind = IVal::Kind::Int;
                switch (*bi) {
                    case BI::Add: v.i = rt::wi_add(as[0]->i, as[1]->i); break;
                    case BI::Sub: v.i = rt::wi_sub(as[0]->i, as[1]->i); break;
                    case BI::Mul: v.i = rt::wi_mul(as[0]->i, as[1]->i); break;
                    case BI::Div: v.i = rt::wi_div(as[0]->i, as[1]->i); break;
                    default: v.i = rt::wi_rem(as[0]->i, as[1]->i); break;
                }
                return mk(std::move(v));
            }
            case BI::Lt:
                return make_bool(rt::wi_lt(as[0]->i, as[1]->i));
            case BI::Eq:
                return make_bool(prim_eq(as[0], as[1]));
            case BI::Concat: {
                IVal v{};
                v.kind = IVal::Kind::Str;
                v.s = as[0]->s + as[1]->s;
                return mk(std::move(v));
            }
            case BI::Strlen:
                return make_u32(as[0]->s.size());
            case BI::ToString: {
                IVal v{};
                v.kind = IVal::Kind::Str;
                v.s = as[0]->i.to_decimal();
                return mk(std::move(v));
            }
            case BI::Emp: {
                IVal v{};
                v.kind = IVal::Kind::Map;
                v.map = rt::map_empty(ty_arg(0), ty_arg(1));
                return mk(std::move(v));
            }
            case BI::MapPut: {
                IVal v{};
                v.kind = IVal::Kind::Map;
                v.map = rt::map_put(as[0]->map, to_rval(ty_arg(0), as[1]),
                                    to_rval(ty_arg(1), as[2]));
                return mk(std::move(v));
            }
            case BI::MapGet: {
                auto got = rt::map_get(as[0]->map, to_rval(ty_arg(0), as[1]));
                if (!got) return make_adt("None", {});
                return make_adt("Some", {from_rval(ty_arg(1), *got)});
            }
            case BI::MapContains:
                return make_bool(
                    rt::map_contains(as[0]->map, to_rval(ty_arg(0), as[1])));
            case BI::MapRemove: {
                IVal v{};
                v.kind = IVal::Kind::Map;
                v.map = rt::map_remove(as[0]->map, to_rval(ty_arg(0), as[1]));
                return mk(std::move(v));
            }
            case BI::MapSize:
                return make_u32(as[0]->map->entries.size());
        }
        internal("bad builtin");
    }

    // ----- statements -----

    TypePtr field_type(const std::string& name) {
        auto it = field_types.find(name);
        if (it == field_types.end()) internal("no state field " + name);
        return it->second;
    }

    void exec_stmts(const std::vector<StmtPtr>& body, const EnvPtr& env,
                    const TEnvPtr& tenv) {
        for (auto& s : body) {
            bump();
            switch (s->kind) {
                case StmtKind::Bind:
                    env->vars[s->name] = eval(s->e, env, tenv);
                    break;
                case StmtKind::LoadField: {
                    auto* f = st.find(s->field);
                    if (!f) internal("no state field " + s->field);
                    env->vars[s->name] =
                        from_rval(field_type(s->field), f->value);
                    break;
                }
                case StmtKind::StoreField: {
                    auto* f = st.find(s->field);
                    if (!f) internal("no state field " + s->field);
                    f->value = to_rval(field_type(s->field),
                                       eval(s->e, env, tenv));
                    break;
                }
                case StmtKind::MapGet: {
                    auto* f = st.find(s->field);
                    if (!f) internal("no state field " + s->field);
                    TypePtr mt = field_type(s->field);
                    RValPtr key = to_rval(mt->a, eval(s->e, env, tenv));
                    auto got = rt::map_get(f->value->map, key);
                    env->vars[s->name] =
                        got ? make_adt("Some", {from_rval(mt->b, *got)})
                            : make_adt("None", {});
                    break;
                }
                case StmtKind::MapPut: {
                    auto* f = st.find(s->field);
                    if (!f) internal("no state field " + s->field);
                    TypePtr mt = field_type(s->field);
                    RValPtr key = to_rval(mt->a, eval(s->e, env, tenv));
                    RValPtr val = to_rval(mt->b, eval(s->e2, env, tenv));
                    f->value = RVal::make_map(
                        rt::map_put(f->value->map, key, val));
                    break;
                }
                case StmtKind::MatchStmt: {
                    IValPtr scrut = lookup(env, s->name);
                    bool done = false;
                    for (auto& arm : s->arms) {
                        EnvPtr inner = child(env);
                        if (match_pattern(arm.pat, scrut, inner)) {
                            exec_stmts(arm.body, inner, tenv);
                            done = true;
                            break;
                        }
                    }
                    if (!done) internal("no arm matched");
                    break;
                }
                case StmtKind::Emit: {
                    IValPtr v = eval(s->e, env, tenv);
                    if (v->kind != IVal::Kind::Msg)
                        internal("emit of a non-message value");
                    (s->is_event ? out_events : out_messages).push_back(v->msg);
                    break;
                }
            }
        }
    }

    void init() {
        for (auto& d : prog.defs)
            genv->vars[d.name] = eval(d.value, genv, nullptr);
    }
};

Interp::Interp(const Program& p, rt::Limits limits)
    : impl(std::make_unique<Impl>(p, limits)) {}
Interp::~Interp() = default;

void Interp::init() { impl->init(); }

rt::RValPtr Interp::run_main() {
    if (!impl->prog.main)
        throw RtError(RtErrorKind::Internal, "program has no main");
    IValPtr v = impl->eval(impl->prog.main, impl->genv, nullptr);
    return impl->to_rval(impl->prog.main->ann, v);
}

void Interp::set_state(rt::StateStore st) { impl->st = std::move(st); }
rt::StateStore& Interp::state() { return impl->st; }

void Interp::run_field_inits() {
    if (!impl->prog.contract)
        throw RtError(RtErrorKind::Internal, "not a contract program");
    impl->st.fields.clear();
    for (auto& f : impl->prog.contract->fields) {
        IValPtr v = impl->eval(f.init, impl->genv, nullptr);
        impl->st.fields.push_back({f.name, f.type, impl->to_rval(f.type, v)});
    }
}

TxResult Interp::run_transition(const std::string& name,
                                const std::vector<rt::RValPtr>& args) {
    if (!impl->prog.contract)
        throw RtError(RtErrorKind::Internal, "not a contract program");
    const Transition* tr = nullptr;
    for (auto& t : impl->prog.contract->transitions)
        if (t.name == name) tr = &t;
    if (!tr)
        throw RtError(RtErrorKind::DeserializationError,
                      "no transition named " + name);
    if (args.size() != tr->params.size())
        throw RtError(RtErrorKind::DeserializationError,
                      "wrong argument count for transition " + name);
    impl->out_messages.clear();
    impl->out_events.clear();
    EnvPtr env = Impl::child(impl->genv);
    for (size_t i = 0; i < args.size(); ++i)
        env->vars[tr->params[i].name] =
            impl->from_rval(tr->params[i].type, args[i]);
    impl->exec_stmts(tr->body, env, nullptr);
    return {impl->out_messages, impl->out_events};
}

uint64_t Interp::steps() const { return impl->steps; }

void run_big_stack(const std::function<void()>& fn, size_t stack_bytes) {
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, stack_bytes);
    struct Ctx {
        const std::function<void()>* fn;
        std::exception_ptr err;
    } ctx{&fn, nullptr};
    auto body = [](void* p) -> void* {
        Ctx* c = (Ctx*)p;
        try {
            (*c->fn)();
        } catch (...) {
            c->err = std::current_exception();
        }
        return nullptr;
    };
    pthread_t th;
    if (pthread_create(&th, &attr, body, &ctx) != 0) {
        pthread_attr_destroy(&attr);
        fn();  // fall back to the current stack
        return;
    }
    pthread_join(th, nullptr);
    pthread_attr_destroy(&attr);
    if (ctx.err) std::rethrow_exception(ctx.err);
}

}  // namespace mv::interp
