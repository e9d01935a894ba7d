#pragma once

#include <random>

#include "minivella/ast.hpp"
#include "minivella/builtins.hpp"

// Seeded generator of random well-typed expression programs, used for the
// differential interpreter-vs-VM tests and the pass-invariant sweeps.
// Programs are correct by construction: every node is generated at a known
// type against a typed environment.

namespace mvtest {

using namespace mv;

struct Gen {
    std::mt19937_64 rng;
    int counter = 0;

    explicit Gen(uint64_t seed) : rng(seed) {}

    size_t pick(size_t n) { return rng() % n; }
    bool chance(int pct) { return (int)(rng() % 100) < pct; }
    std::string fresh() { return "g" + std::to_string(counter++); }

    using Env = std::vector<std::pair<std::string, TypePtr>>;

    TypePtr int_type() {
        switch (pick(6)) {
            case 0: return SType::make_int(true, 32);
            case 1: return SType::make_int(false, 32);
            case 2: return SType::make_int(true, 64);
            case 3: return SType::make_int(false, 64);
            case 4: return SType::make_int(false, 128);
            default: return SType::make_int(true, 256);
        }
    }

    TypePtr prim_type() {
        switch (pick(3)) {
            case 0: return int_type();
            case 1: return SType::make_string();
            default: return int_type();
        }
    }

    // serializable result/value types
    TypePtr value_type(int depth) {
        if (depth <= 0 || chance(50)) return prim_type();
        switch (pick(5)) {
            case 0: return SType::make_adt("Option", {value_type(depth - 1)});
            case 1: return SType::make_adt("List", {value_type(depth - 1)});
            case 2:
                return SType::make_adt(
                    "Pair", {value_type(depth - 1), value_type(depth - 1)});
            case 3: return SType::make_adt("Bool", {});
            default:
                return SType::make_map(prim_type(), value_type(depth - 1));
        }
    }

    Literal int_literal(const TypePtr& ty) {
        // mostly small values; occasionally near the width boundary so the
        // overflow behaviour gets exercised on both engines
        rt::WideInt v;
        if (chance(6)) {
            std::string digits(ty->width / 4, '9');  // huge, near/above max
            auto w = rt::WideInt::from_decimal(ty->is_signed, ty->width,
                                               digits.substr(0, 1 + pick(digits.size())));
            v = w ? *w : rt::WideInt::make(ty->is_signed, ty->width, 1);
        } else {
            int64_t small = (int64_t)pick(100);
            if (ty->is_signed && chance(25)) small = -small;
            v = rt::WideInt::make(ty->is_signed, ty->width, small);
        }
        return Literal::make_int(v);
    }

    ExprPtr lit_of(const TypePtr& ty) {
        if (ty->kind == TyKind::Int) return mk_lit(int_literal(ty));
        std::string s;
        for (size_t i = 0, n = pick(8); i < n; ++i)
            s += (char)('a' + pick(26));
        return mk_lit(Literal::make_str(s));
    }

    ExprPtr var_of(const Env& env, const TypePtr& ty) {
        std::vector<const std::pair<std::string, TypePtr>*> hits;
        for (auto& b : env)
            if (alpha_equal(b.second, ty)) hits.push_back(&b);
        if (hits.empty()) return nullptr;
        return mk_var(hits[pick(hits.size())]->first);
    }

    ExprPtr builtin(const char* name, std::vector<TypePtr> ty_args,
                    std::vector<ExprPtr> args) {
        auto e = make_expr(ExprKind::Builtin);
        e->name = name;
        e->ty_args = std::move(ty_args);
        e->args = std::move(args);
        return e;
    }

    ExprPtr constr(const std::string& ctor, std::vector<TypePtr> ty_args,
                   std::vector<ExprPtr> args) {
        auto e = make_expr(ExprKind::Constr);
        e->name = ctor;
        e->ty_args = std::move(ty_args);
        e->args = std::move(args);
        return e;
    }

    PatternPtr pbind(const std::string& n) { return Pattern::binder(n); }

    // generate an expression of exactly type `ty`
    ExprPtr gen(const TypePtr& ty, int depth, Env& env) {
        if (depth <= 0) return leaf(ty, env);
        switch (pick(8)) {
            case 0:
                return leaf(ty, env);
            case 1: {  // let
                TypePtr bt = chance(60) ? prim_type() : value_type(1);
                ExprPtr bound = gen(bt, depth - 1, env);
                std::string x = fresh();
                env.push_back({x, bt});
                ExprPtr body = gen(ty, depth - 1, env);
                env.pop_back();
                return mk_let(x, bound, body);
            }
            case 2:
                return typed_op(ty, depth, env);
            case 3:
                return match_expr(ty, depth, env);
            case 4: {  // immediately applied lambda
                TypePtr pt = prim_type();
                std::string x = fresh();
                env.push_back({x, pt});
                ExprPtr body = gen(ty, depth - 1, env);
                env.pop_back();
                return mk_app(mk_fun(x, pt, body), gen(pt, depth - 1, env));
            }
            case 5: {  // polymorphic identity instantiated at ty
                auto tf = make_expr(ExprKind::TFun);
                tf->name = "T";
                std::string x = fresh();
                tf->a = mk_fun(x, SType::make_tyvar("T"),
                               mk_var(x));
                auto ta = make_expr(ExprKind::TApp);
                ta->a = tf;
                ta->ty = ty;
                return mk_app(ta, gen(ty, depth - 1, env));
            }
            case 6: {  // let-bound function used twice
                TypePtr pt = prim_type();
                std::string f = fresh(), x = fresh();
                env.push_back({x, pt});
                ExprPtr body = gen(ty, depth - 2, env);
                env.pop_back();
                ExprPtr fn = mk_fun(x, pt, body);
                std::string fname = fresh();
                env.push_back({fname, SType::make_fun(pt, ty)});
                ExprPtr use = mk_app(mk_var(fname), gen(pt, depth - 2, env));
                env.pop_back();
                (void)f;
                return mk_let(fname, fn, use);
            }
            default:
                return typed_op(ty, depth, env);
        }
    }

    ExprPtr leaf(const TypePtr& ty, Env& env) {
        if (chance(40)) {
            if (ExprPtr v = var_of(env, ty)) return v;
        }
        switch (ty->kind) {
            case TyKind::Int:
            case TyKind::String:
                return lit_of(ty);
            case TyKind::Adt: {
                if (ty->name == "Bool")
                    return constr(chance(50) ? "True" : "False", {}, {});
                if (ty->name == "Option") {
                    if (chance(50)) return constr("None", {ty->args[0]}, {});
                    Env e2 = env;
                    return constr("Some", {ty->args[0]},
                                  {leaf(ty->args[0], e2)});
                }
                if (ty->name == "List") {
                    ExprPtr l = constr("Nil", {ty->args[0]}, {});
                    for (size_t i = 0, n = pick(3); i < n; ++i)
                        l = constr("Cons", {ty->args[0]},
                                   {leaf(ty->args[0], env), l});
                    return l;
                }
                // Pair
                return constr("Pair", {ty->args[0], ty->args[1]},
                              {leaf(ty->args[0], env), leaf(ty->args[1], env)});
            }
            case TyKind::Map: {
                ExprPtr m = builtin("emp", {ty->a, ty->b}, {});
                for (size_t i = 0, n = pick(3); i < n; ++i)
                    m = builtin("put", {ty->a, ty->b},
                                {m, leaf(ty->a, env), leaf(ty->b, env)});
                return m;
            }
            default:
                return lit_of(SType::make_int(true, 32));
        }
    }

    // an operation whose result type is `ty`
    ExprPtr typed_op(const TypePtr& ty, int depth, Env& env) {
        if (ty->kind == TyKind::Int) {
            static const char* ops[] = {"add", "sub", "mul", "div", "rem"};
            const char* op = ops[pick(5)];
            return builtin(op, {},
                           {gen(ty, depth - 1, env), gen(ty, depth - 1, env)});
        }
        if (ty->kind == TyKind::String) {
            switch (pick(3)) {
                case 0:
                    return builtin("concat", {},
                                   {gen(SType::make_string(), depth - 1, env),
                                    gen(SType::make_string(), depth - 1, env)});
                case 1:
                    return builtin("to_string", {},
                                   {gen(int_type(), depth - 1, env)});
                default:
                    return leaf(ty, env);
            }
        }
        if (ty->kind == TyKind::Adt && ty->name == "Bool") {
            TypePtr t = prim_type();
            if (chance(50) && t->kind == TyKind::Int)
                return builtin("lt", {},
                               {gen(t, depth - 1, env), gen(t, depth - 1, env)});
            return builtin("eq", {t},
                           {gen(t, depth - 1, env), gen(t, depth - 1, env)});
        }
        if (ty->kind == TyKind::Adt && ty->name == "Option" && chance(50)) {
            TypePtr k = prim_type();
            TypePtr mt = SType::make_map(k, ty->args[0]);
            return builtin("get", {k, ty->args[0]},
                           {gen(mt, depth - 1, env), gen(k, depth - 1, env)});
        }
        if (ty->kind == TyKind::Map && chance(60)) {
            switch (pick(2)) {
                case 0:
                    return builtin("put", {ty->a, ty->b},
                                   {gen(ty, depth - 1, env),
                                    gen(ty->a, depth - 1, env),
                                    gen(ty->b, depth - 1, env)});
                default:
                    return builtin("remove", {ty->a, ty->b},
                                   {gen(ty, depth - 1, env),
                                    gen(ty->a, depth - 1, env)});
            }
        }
        return leaf(ty, env);
    }

    ExprPtr match_expr(const TypePtr& ty, int depth, Env& env) {
        // scrutinee over a small ADT; arms generated exhaustively
        TypePtr st;
        switch (pick(4)) {
            case 0: st = SType::make_adt("Bool", {}); break;
            case 1: st = SType::make_adt("Option", {prim_type()}); break;
            case 2: st = SType::make_adt("List", {prim_type()}); break;
            default:
                st = SType::make_adt(
                    "List", {SType::make_adt("Option", {prim_type()})});
        }
        ExprPtr scrut = gen(st, depth - 1, env);
        std::string sv = fresh();
        auto m = make_expr(ExprKind::Match);
        m->name = sv;
        auto arm = [&](PatternPtr pat, const Env& extra) {
            Env saved = env;
            for (auto& b : extra) env.push_back(b);
            m->arms.push_back({pat, gen(ty, depth - 1, env)});
            env = saved;
        };
        if (st->name == "Bool") {
            arm(Pattern::ctor("True", {}), {});
            arm(Pattern::ctor("False", {}), {});
        } else if (st->name == "Option") {
            std::string x = fresh();
            arm(Pattern::ctor("Some", {pbind(x)}), {{x, st->args[0]}});
            arm(Pattern::ctor("None", {}), {});
        } else if (st->args[0]->kind == TyKind::Adt &&
                   st->args[0]->name == "Option") {
            // nested patterns: exercises the match flattener
            TypePtr inner = st->args[0]->args[0];
            std::string x = fresh(), xs = fresh(), ys = fresh();
            arm(Pattern::ctor("Cons", {Pattern::ctor("Some", {pbind(x)}),
                                       pbind(xs)}),
                {{x, inner}, {xs, st}});
            arm(Pattern::ctor("Cons",
                              {Pattern::ctor("None", {}), pbind(ys)}),
                {{ys, st}});
            arm(Pattern::ctor("Nil", {}), {});
        } else {
            std::string h = fresh(), t = fresh();
            arm(Pattern::ctor("Cons", {pbind(h), pbind(t)}),
                {{h, st->args[0]}, {t, st}});
            arm(Pattern::ctor("Nil", {}), {});
        }
        return mk_let(sv, scrut, m);
    }

    Program gen_program() {
        Program p;
        p.adts = builtin_adts();
        Env env;
        // a couple of library definitions so the pipeline's whole-program
        // passes (dce, uncurry, monomorphize) always have something to chew
        {
            TypePtr pt = prim_type();
            std::string x = fresh();
            ExprPtr dbl = mk_fun(x, pt, mk_var(x));
            p.defs.push_back({"lib0", dbl, false, nullptr, {}});
            env.push_back({"lib0", SType::make_fun(pt, pt)});
        }
        {
            auto tf = make_expr(ExprKind::TFun);
            tf->name = "A";
            std::string x = fresh();
            tf->a = mk_fun(x, SType::make_tyvar("A"), mk_var(x));
            p.defs.push_back({"polyid", tf, false, nullptr, {}});
        }
        TypePtr rt = value_type(2);
        p.main = gen(rt, 4, env);
        return p;
    }
};

}  // namespace mvtest
