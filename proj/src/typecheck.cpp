#include "minivella/typecheck.hpp"

#include <map>

#include "minivella/builtins.hpp"

namespace mv {

namespace {

struct TCBail {};

TypePtr bool_ty() { return SType::make_adt("Bool", {}); }
TypePtr option_ty(TypePtr v) { return SType::make_adt("Option", {std::move(v)}); }

// substitute an ADT's type params into a constructor field type
TypePtr inst_field(const ADTDecl& d, const std::vector<TypePtr>& ty_args,
                   TypePtr ft) {
    return subst_tyvars(ft, d.ty_params, ty_args);
}

struct Checker {
    Program& prog;
    AdtRegistry reg;
    std::vector<Diagnostic>& diags;
    std::map<std::string, std::vector<TypePtr>> env;  // scope stack per name
    std::set<std::string> bound_tyvars;

    Checker(Program& p, std::vector<Diagnostic>& d) : prog(p), reg(p), diags(d) {}

    [[noreturn]] void fail(const std::string& msg, SourceLoc loc) {
        diags.push_back({Severity::Error, msg, loc});
        throw TCBail{};
    }

    struct Scope {
        Checker& c;
        std::vector<std::string> names;
        Scope(Checker& c) : c(c) {}
        void bind(const std::string& n, TypePtr t) {
            c.env[n].push_back(std::move(t));
            names.push_back(n);
        }
        ~Scope() {
            for (auto it = names.rbegin(); it != names.rend(); ++it) {
                auto& v = c.env[*it];
                v.pop_back();
                if (v.empty()) c.env.erase(*it);
            }
        }
    };

    TypePtr lookup(const std::string& n, SourceLoc loc) {
        auto it = env.find(n);
        if (it == env.end() || it->second.empty())
            fail("unbound identifier '" + n + "'", loc);
        return it->second.back();
    }

    void validate_type(const TypePtr& t, SourceLoc loc) {
        switch (t->kind) {
            case TyKind::Int:
                if (!rt::valid_int_width(t->width))
                    fail("invalid integer width", loc);
                return;
            case TyKind::ByStrX:
                if (t->byte_len < 1) fail("ByStrX length must be >= 1", loc);
                return;
            case TyKind::Adt: {
                const ADTDecl* d = reg.find_adt(t->name);
                if (!d) fail("unknown type '" + t->name + "'", loc);
                if (d->ty_params.size() != t->args.size())
                    fail("type '" + t->name + "' expects " +
                             std::to_string(d->ty_params.size()) +
                             " type arguments",
                         loc);
                for (auto& a : t->args) validate_type(a, loc);
                return;
            }
            case TyKind::Map:
                if (!is_prim_key_type(t->a))
                    fail("map key type must be a primitive type", loc);
                validate_type(t->a, loc);
                validate_type(t->b, loc);
                return;
            case TyKind::Fun:
                validate_type(t->a, loc);
                validate_type(t->b, loc);
                return;
            case TyKind::TyVar:
                if (!bound_tyvars.count(t->name))
                    fail("unbound type variable '" + t->name + "'", loc);
                return;
            case TyKind::Forall: {
                bool had = bound_tyvars.count(t->name);
                bound_tyvars.insert(t->name);
                validate_type(t->a, loc);
                if (!had) bound_tyvars.erase(t->name);
                return;
            }
            case TyKind::NAryFun:
                fail("uncurried function type not valid in source", loc);
            default:
                return;
        }
    }

    void require_equal(const TypePtr& want, const TypePtr& got, SourceLoc loc,
                       const std::string& what) {
        if (!alpha_equal(want, got))
            fail("type mismatch in " + what + ": expected " + show_type(want) +
                     ", found " + show_type(got),
                 loc);
    }

    TypePtr check_int_operand(const ExprPtr& arg, const char* op) {
        TypePtr t = check(arg);
        if (t->kind != TyKind::Int)
            fail(std::string("builtin ") + op + " requires integer operands, found " +
                     show_type(t),
                 arg->loc);
        return t;
    }

    void check_pattern(const PatternPtr& p, const TypePtr& ty, Scope& scope,
                       std::set<std::string>& seen) {
        switch (p->kind) {
            case Pattern::Kind::Wildcard:
                return;
            case Pattern::Kind::Binder:
                if (!seen.insert(p->name).second)
                    fail("duplicate binder '" + p->name + "' in pattern", p->loc);
                scope.bind(p->name, ty);
                return;
            case Pattern::Kind::Ctor: {
                if (ty->kind != TyKind::Adt)
                    fail("constructor pattern against non-ADT type " + show_type(ty),
                         p->loc);
                auto [d, idx] = reg.find_ctor(p->name);
                if (!d) fail("unknown constructor '" + p->name + "'", p->loc);
                if (d->name != ty->name)
                    fail("constructor '" + p->name + "' does not belong to type " +
                             show_type(ty),
                         p->loc);
                auto& ctor = d->ctors[idx];
                if (ctor.field_types.size() != p->subs.size())
                    fail("constructor '" + p->name + "' expects " +
                             std::to_string(ctor.field_types.size()) +
                             " sub-patterns",
                         p->loc);
                for (size_t i = 0; i < p->subs.size(); ++i) {
                    TypePtr ft = inst_field(*d, ty->args, ctor.field_types[i]);
                    check_pattern(p->subs[i], ft, scope, seen);
                }
                return;
            }
        }
    }

    TypePtr check(const ExprPtr& e) {
        TypePtr t = check_inner(e);
        e->ann = t;
        return t;
    }

    TypePtr check_inner(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::Lit:
                return e->lit.type();
            case ExprKind::Var:
                return lookup(e->name, e->loc);
            case ExprKind::Let: {
                TypePtr t1 = check(e->a);
                Scope s(*this);
                s.bind(e->name, t1);
                return check(e->b);
            }
            case ExprKind::LetRec: {
                validate_type(e->ty, e->loc);
                Scope s(*this);
                s.bind(e->name, e->ty);
                TypePtr t1 = check(e->a);
                require_equal(e->ty, t1, e->loc, "recursive binding");
                return check(e->b);
            }
            case ExprKind::Fun: {
                validate_type(e->ty, e->loc);
                Scope s(*this);
                s.bind(e->name, e->ty);
                TypePtr tb = check(e->a);
                return SType::make_fun(e->ty, tb);
            }
            case ExprKind::App: {
                TypePtr tf = check(e->a);
                if (tf->kind != TyKind::Fun)
                    fail("not a function type: " + show_type(tf), e->loc);
                TypePtr ta = check(e->b);
                require_equal(tf->a, ta, e->b->loc, "function application");
                return tf->b;
            }
            case ExprKind::TFun: {
                bool had = bound_tyvars.count(e->name);
                bound_tyvars.insert(e->name);
                TypePtr tb = check(e->a);
                if (!had) bound_tyvars.erase(e->name);
                return SType::make_forall(e->name, tb);
            }
            case ExprKind::TApp: {
                TypePtr tf = check(e->a);
                if (tf->kind != TyKind::Forall)
                    fail("type application of non-polymorphic value of type " +
                             show_type(tf),
                         e->loc);
                validate_type(e->ty, e->loc);
                return subst_tyvar(tf->a, tf->name, e->ty);
            }
            case ExprKind::Constr: {
                auto [d, idx] = reg.find_ctor(e->name);
                if (!d) fail("unknown constructor '" + e->name + "'", e->loc);
                e->adt_name = d->name;
                if (e->ty_args.size() != d->ty_params.size())
                    fail("constructor '" + e->name + "' expects " +
                             std::to_string(d->ty_params.size()) +
                             " type arguments",
                         e->loc);
                for (auto& t : e->ty_args) validate_type(t, e->loc);
                auto& ctor = d->ctors[idx];
                if (e->args.size() != ctor.field_types.size())
                    fail("constructor '" + e->name + "' expects " +
                             std::to_string(ctor.field_types.size()) + " arguments",
                         e->loc);
                for (size_t i = 0; i < e->args.size(); ++i) {
                    TypePtr ft = inst_field(*d, e->ty_args, ctor.field_types[i]);
                    TypePtr at = check(e->args[i]);
                    require_equal(ft, at, e->args[i]->loc,
                                  "argument of constructor " + e->name);
                }
                return SType::make_adt(d->name, e->ty_args);
            }
            case ExprKind::Match: {
                TypePtr st = lookup(e->name, e->loc);
                if (st->kind != TyKind::Adt)
                    fail("match scrutinee must have an ADT type, found " +
                             show_type(st),
                         e->loc);
                TypePtr result;
                std::vector<PatternPtr> pats;
                for (auto& arm : e->arms) {
                    Scope s(*this);
                    std::set<std::string> seen;
                    check_pattern(arm.pat, st, s, seen);
                    TypePtr bt = check(arm.body);
                    if (!result)
                        result = bt;
                    else
                        require_equal(result, bt, arm.body->loc, "match arm");
                    pats.push_back(arm.pat);
                }
                if (!patterns_exhaustive(reg, pats, st))
                    fail("non-exhaustive match on " + show_type(st), e->loc);
                return result;
            }
            case ExprKind::Builtin:
                return check_builtin(e);
            case ExprKind::Msg: {
                std::set<std::string> seen;
                for (auto& f : e->fields) {
                    if (!seen.insert(f.name).second)
                        fail("duplicate message field '" + f.name + "'", e->loc);
                    TypePtr ft = check(f.value);
                    if (ft->kind == TyKind::Fun || ft->kind == TyKind::Forall)
                        fail("message field '" + f.name +
                                 "' cannot hold a function value",
                             f.value->loc);
                }
                return SType::make_message();
            }
            default:
                fail("internal: unexpected expression form during typechecking",
                     e->loc);
        }
    }

    TypePtr check_builtin(const ExprPtr& e) {
        auto bi = builtin_by_name(e->name);
        if (!bi) fail("unknown builtin '" + e->name + "'", e->loc);
        if ((int)e->args.size() != builtin_arity(*bi))
            fail("builtin '" + e->name + "' expects " +
                     std::to_string(builtin_arity(*bi)) + " arguments",
                 e->loc);
        switch (*bi) {
            case BI::Add:
            case BI::Sub:
            case BI::Mul:
            case BI::Div:
            case BI::Rem: {
                TypePtr t1 = check_int_operand(e->args[0], e->name.c_str());
                TypePtr t2 = check(e->args[1]);
                require_equal(t1, t2, e->args[1]->loc, "builtin " + e->name);
                return t1;
            }
            case BI::Lt: {
                TypePtr t1 = check_int_operand(e->args[0], "lt");
                TypePtr t2 = check(e->args[1]);
                require_equal(t1, t2, e->args[1]->loc, "builtin lt");
                return bool_ty();
            }
            case BI::Eq: {
                TypePtr t1 = check(e->args[0]);
                TypePtr t2 = check(e->args[1]);
                require_equal(t1, t2, e->args[1]->loc, "builtin eq");
                if (!is_prim_key_type(t1))
                    fail("builtin eq requires primitive operands, found " +
                             show_type(t1),
                         e->loc);
                if (!e->ty_args.empty()) {
                    if (e->ty_args.size() != 1)
                        fail("builtin eq takes one type argument", e->loc);
                    require_equal(e->ty_args[0], t1, e->loc, "builtin eq");
                } else {
                    e->ty_args = {t1};  // inserted for monomorphization
                }
                return bool_ty();
            }
            case BI::Concat: {
                TypePtr t1 = check(e->args[0]);
                TypePtr t2 = check(e->args[1]);
                require_equal(SType::make_string(), t1, e->args[0]->loc,
                              "builtin concat");
                require_equal(SType::make_string(), t2, e->args[1]->loc,
                              "builtin concat");
                return SType::make_string();
            }
            case BI::Strlen: {
                TypePtr t1 = check(e->args[0]);
                require_equal(SType::make_string(), t1, e->args[0]->loc,
                              "builtin strlen");
                return SType::make_int(false, 32);
            }
            case BI::ToString: {
                TypePtr t1 = check_int_operand(e->args[0], "to_string");
                if (e->ty_args.empty()) e->ty_args = {t1};
                return SType::make_string();
            }
            case BI::Emp: {
                for (auto& t : e->ty_args) validate_type(t, e->loc);
                return SType::make_map(e->ty_args[0], e->ty_args[1]);
            }
            case BI::MapPut:
            case BI::MapGet:
            case BI::MapContains:
            case BI::MapRemove:
            case BI::MapSize: {
                TypePtr tm = check(e->args[0]);
                if (tm->kind != TyKind::Map)
                    fail("builtin " + e->name + " requires a map, found " +
                             show_type(tm),
                         e->args[0]->loc);
                if (!e->ty_args.empty()) {
                    if (e->ty_args.size() != 2)
                        fail("map builtin takes two type arguments", e->loc);
                    require_equal(SType::make_map(e->ty_args[0], e->ty_args[1]),
                                  tm, e->loc, "builtin " + e->name);
                } else {
                    e->ty_args = {tm->a, tm->b};
                }
                if (*bi == BI::MapSize) return SType::make_int(false, 32);
                TypePtr tk = check(e->args[1]);
                require_equal(tm->a, tk, e->args[1]->loc, "map key");
                switch (*bi) {
                    case BI::MapGet: return option_ty(tm->b);
                    case BI::MapContains: return bool_ty();
                    case BI::MapRemove: return tm;
                    case BI::MapPut: {
                        TypePtr tv = check(e->args[2]);
                        require_equal(tm->b, tv, e->args[2]->loc, "map value");
                        return tm;
                    }
                    default: break;
                }
                break;
            }
        }
        fail("internal: unhandled builtin", e->loc);
    }

    void check_stmts(const std::vector<StmtPtr>& body, Scope& scope) {
        auto& c = *prog.contract;
        auto find_field = [&](const std::string& n, SourceLoc loc) -> ContractField& {
            for (auto& f : c.fields)
                if (f.name == n) return f;
            fail("unknown contract field '" + n + "'", loc);
        };
        for (auto& s : body) {
            switch (s->kind) {
                case StmtKind::Bind: {
                    TypePtr t = check(s->e);
                    s->ann = t;
                    scope.bind(s->name, t);
                    break;
                }
                case StmtKind::LoadField: {
                    auto& f = find_field(s->field, s->loc);
                    s->ann = f.type;
                    scope.bind(s->name, f.type);
                    break;
                }
                case StmtKind::StoreField: {
                    auto& f = find_field(s->field, s->loc);
                    TypePtr t = check(s->e);
                    require_equal(f.type, t, s->loc, "field store");
                    break;
                }
                case StmtKind::MapGet: {
                    auto& f = find_field(s->field, s->loc);
                    if (f.type->kind != TyKind::Map)
                        fail("field '" + s->field + "' is not a map", s->loc);
                    TypePtr tk = check(s->e);
                    require_equal(f.type->a, tk, s->loc, "map key");
                    s->ann = option_ty(f.type->b);
                    scope.bind(s->name, s->ann);
                    break;
                }
                case StmtKind::MapPut: {
                    auto& f = find_field(s->field, s->loc);
                    if (f.type->kind != TyKind::Map)
                        fail("field '" + s->field + "' is not a map", s->loc);
                    TypePtr tk = check(s->e);
                    require_equal(f.type->a, tk, s->loc, "map key");
                    TypePtr tv = check(s->e2);
                    require_equal(f.type->b, tv, s->loc, "map value");
                    break;
                }
                case StmtKind::Emit: {
                    TypePtr t = check(s->e);
                    require_equal(SType::make_message(), t, s->loc,
                                  s->is_event ? "event" : "send");
                    break;
                }
                case StmtKind::MatchStmt: {
                    TypePtr st = lookup(s->name, s->loc);
                    if (st->kind != TyKind::Adt)
                        fail("match scrutinee must have an ADT type, found " +
                                 show_type(st),
                             s->loc);
                    std::vector<PatternPtr> pats;
                    for (auto& arm : s->arms) {
                        Scope as(*this);
                        std::set<std::string> seen;
                        check_pattern(arm.pat, st, as, seen);
                        check_stmts(arm.body, as);
                        pats.push_back(arm.pat);
                    }
                    if (!patterns_exhaustive(reg, pats, st))
                        fail("non-exhaustive match on " + show_type(st), s->loc);
                    break;
                }
            }
        }
    }

    void check_adt_decls() {
        std::set<std::string> adt_names, builtin_ctors, user_ctors;
        for (auto& d : prog.adts) {
            if (!adt_names.insert(d.name).second)
                fail("duplicate type name '" + d.name + "'", d.loc);
            if (d.ctors.empty())
                fail("ADT '" + d.name + "' has no constructors", d.loc);
            if (d.ctors.size() > 255)
                fail("ADT '" + d.name + "' has more than 255 constructors", d.loc);
            for (auto& c : d.ctors) {
                // user constructors may shadow builtin ones (a Fig.-3-style
                // list redeclares Nil/Cons) but not each other
                auto& names = d.builtin ? builtin_ctors : user_ctors;
                if (!names.insert(c.name).second)
                    fail("duplicate constructor name '" + c.name + "'", d.loc);
            }
        }
        // user ADTs may recurse directly into themselves (list-style), but
        // only applied to exactly their own parameters, and may otherwise
        // reference only earlier declarations (no mutual recursion)
        std::set<std::string> seen;
        for (auto& d : prog.adts)
            if (d.builtin) seen.insert(d.name);
        for (auto& d : prog.adts) {
            if (d.builtin) continue;
            std::set<std::string> saved = bound_tyvars;
            bound_tyvars.clear();
            for (auto& tp : d.ty_params) bound_tyvars.insert(tp);
            for (auto& c : d.ctors) {
                for (auto& ft : c.field_types) {
                    validate_type(ft, d.loc);
                    check_adt_refs(ft, d, seen);
                }
            }
            bound_tyvars = std::move(saved);
            seen.insert(d.name);
        }
    }

    void check_adt_refs(const TypePtr& t, const ADTDecl& d,
                        const std::set<std::string>& seen) {
        switch (t->kind) {
            case TyKind::Adt: {
                if (t->name == d.name) {
                    bool regular = t->args.size() == d.ty_params.size();
                    for (size_t i = 0; regular && i < t->args.size(); ++i)
                        regular = t->args[i]->kind == TyKind::TyVar &&
                                  t->args[i]->name == d.ty_params[i];
                    if (!regular)
                        fail("recursive occurrence of '" + d.name +
                                 "' must be applied to its own parameters",
                             d.loc);
                } else if (!seen.count(t->name)) {
                    fail("ADT '" + d.name + "' may only reference itself or "
                         "earlier declarations",
                         d.loc);
                }
                for (auto& a : t->args) check_adt_refs(a, d, seen);
                break;
            }
            case TyKind::Map:
            case TyKind::Fun:
                check_adt_refs(t->a, d, seen);
                check_adt_refs(t->b, d, seen);
                break;
            case TyKind::Forall:
                check_adt_refs(t->a, d, seen);
                break;
            default:
                break;
        }
    }

    static bool mentions_adt(const TypePtr& t, const std::string& name) {
        switch (t->kind) {
            case TyKind::Adt: {
                if (t->name == name) return true;
                for (auto& a : t->args)
                    if (mentions_adt(a, name)) return true;
                return false;
            }
            case TyKind::Map:
            case TyKind::Fun:
                return mentions_adt(t->a, name) || mentions_adt(t->b, name);
            case TyKind::Forall:
                return mentions_adt(t->a, name);
            default:
                return false;
        }
    }

    void run() {
        check_adt_decls();
        Scope top(*this);
        for (auto& d : prog.defs) {
            if (d.is_rec) {
                validate_type(d.rec_type, d.loc);
                top.bind(d.name, d.rec_type);
                TypePtr t = check(d.value);
                require_equal(d.rec_type, t, d.loc, "recursive definition");
            } else {
                TypePtr t = check(d.value);
                top.bind(d.name, t);
            }
        }
        if (prog.contract) {
            auto& c = *prog.contract;
            std::set<std::string> field_names;
            for (auto& f : c.fields) {
                if (!field_names.insert(f.name).second)
                    fail("duplicate field '" + f.name + "'", f.loc);
                validate_type(f.type, f.loc);
                if (!is_ground(f.type))
                    fail("field type must be ground", f.loc);
                if (f.type->kind == TyKind::Fun ||
                    f.type->kind == TyKind::Message)
                    fail("field '" + f.name + "' has a non-storable type", f.loc);
                TypePtr t = check(f.init);
                require_equal(f.type, t, f.loc, "field initializer");
            }
            std::set<std::string> trans_names;
            for (auto& t : c.transitions) {
                if (!trans_names.insert(t.name).second)
                    fail("duplicate transition '" + t.name + "'", t.loc);
                Scope s(*this);
                for (auto& p : t.params) {
                    validate_type(p.type, t.loc);
                    if (!is_ground(p.type))
                        fail("transition parameter type must be ground", t.loc);
                    s.bind(p.name, p.type);
                }
                check_stmts(t.body, s);
            }
        } else if (prog.main) {
            check(prog.main);
        } else {
            fail("program has neither a main expression nor a contract", {});
        }
    }
};

// ---------------------------------------------------------------------------
// exhaustiveness: Maranget's usefulness check

struct Usefulness {
    const AdtRegistry& reg;

    bool useful(std::vector<std::vector<PatternPtr>> matrix,
                std::vector<PatternPtr> q, std::vector<TypePtr> types) {
        if (q.empty()) return matrix.empty();
        PatternPtr q0 = q.front();
        TypePtr t0 = types.front();
        if (q0->kind == Pattern::Kind::Ctor) {
            return useful_specialized(matrix, q, types, q0->name);
        }
        // wildcard head: check whether the matrix's head constructors form a
        // complete signature for t0
        std::set<std::string> heads;
        for (auto& row : matrix)
            if (row.front()->kind == Pattern::Kind::Ctor)
                heads.insert(row.front()->name);
        const ADTDecl* d = t0->kind == TyKind::Adt ? reg.find_adt(t0->name) : nullptr;
        bool complete = d && heads.size() == d->ctors.size();
        if (complete) {
            for (auto& c : d->ctors) {
                std::vector<PatternPtr> subs(c.field_types.size(),
                                             Pattern::wildcard());
                auto q2 = q;
                q2.front() = Pattern::ctor(c.name, subs);
                if (useful_specialized(matrix, q2, types, c.name)) return true;
            }
            return false;
        }
        // default matrix
        std::vector<std::vector<PatternPtr>> dm;
        for (auto& row : matrix) {
            if (row.front()->kind != Pattern::Kind::Ctor) {
                std::vector<PatternPtr> r(row.begin() + 1, row.end());
                dm.push_back(std::move(r));
            }
        }
        std::vector<PatternPtr> q2(q.begin() + 1, q.end());
        std::vector<TypePtr> t2(types.begin() + 1, types.end());
        return useful(std::move(dm), std::move(q2), std::move(t2));
    }

    bool useful_specialized(const std::vector<std::vector<PatternPtr>>& matrix,
                            const std::vector<PatternPtr>& q,
                            const std::vector<TypePtr>& types,
                            const std::string& ctor) {
        auto [d, idx] = reg.find_ctor(ctor);
        if (!d) return false;
        auto& c = d->ctors[idx];
        size_t nf = c.field_types.size();
        TypePtr t0 = types.front();
        std::vector<TypePtr> ftypes;
        for (auto& ft : c.field_types)
            ftypes.push_back(t0->kind == TyKind::Adt ? inst_field(*d, t0->args, ft)
                                                     : ft);
        std::vector<std::vector<PatternPtr>> sm;
        for (auto& row : matrix) {
            auto& h = row.front();
            if (h->kind == Pattern::Kind::Ctor) {
                if (h->name != ctor) continue;
                std::vector<PatternPtr> r(h->subs.begin(), h->subs.end());
                r.insert(r.end(), row.begin() + 1, row.end());
                sm.push_back(std::move(r));
            } else {
                std::vector<PatternPtr> r(nf, Pattern::wildcard());
                r.insert(r.end(), row.begin() + 1, row.end());
                sm.push_back(std::move(r));
            }
        }
        auto& h = q.front();
        std::vector<PatternPtr> q2(h->subs.begin(), h->subs.end());
        q2.insert(q2.end(), q.begin() + 1, q.end());
        std::vector<TypePtr> t2 = ftypes;
        t2.insert(t2.end(), types.begin() + 1, types.end());
        return useful(std::move(sm), std::move(q2), std::move(t2));
    }
};

}  // namespace

bool patterns_exhaustive(const AdtRegistry& reg,
                         const std::vector<PatternPtr>& pats, const TypePtr& ty) {
    Usefulness u{reg};
    std::vector<std::vector<PatternPtr>> matrix;
    for (auto& p : pats) matrix.push_back({p});
    return !u.useful(std::move(matrix), {Pattern::wildcard()}, {ty});
}

TypecheckResult typecheck(Program& p) {
    TypecheckResult r;
    Checker c(p, r.diags);
    try {
        c.run();
        r.ok = true;
    } catch (TCBail&) {
        r.ok = false;
    }
    return r;
}

}  // namespace mv
