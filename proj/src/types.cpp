#include "minivella/types.hpp"

#include <map>

namespace mv {

static TypePtr mk(SType t) { return std::make_shared<const SType>(std::move(t)); }

TypePtr SType::make_int(bool is_signed, int width) {
    SType t;
    t.kind = TyKind::Int;
    t.is_signed = is_signed;
    t.width = width;
    return mk(std::move(t));
}
TypePtr SType::make_string() {
    SType t;
    t.kind = TyKind::String;
    return mk(std::move(t));
}
TypePtr SType::make_bystr() {
    SType t;
    t.kind = TyKind::ByStr;
    return mk(std::move(t));
}
TypePtr SType::make_bystrx(int len) {
    SType t;
    t.kind = TyKind::ByStrX;
    t.byte_len = len;
    return mk(std::move(t));
}
TypePtr SType::make_adt(std::string name, std::vector<TypePtr> args) {
    SType t;
    t.kind = TyKind::Adt;
    t.name = std::move(name);
    t.args = std::move(args);
    return mk(std::move(t));
}
TypePtr SType::make_map(TypePtr k, TypePtr v) {
    SType t;
    t.kind = TyKind::Map;
    t.a = std::move(k);
    t.b = std::move(v);
    return mk(std::move(t));
}
TypePtr SType::make_fun(TypePtr param, TypePtr result) {
    SType t;
    t.kind = TyKind::Fun;
    t.a = std::move(param);
    t.b = std::move(result);
    return mk(std::move(t));
}
TypePtr SType::make_nary_fun(std::vector<TypePtr> params, TypePtr result) {
    SType t;
    t.kind = TyKind::NAryFun;
    t.args = std::move(params);
    t.b = std::move(result);
    return mk(std::move(t));
}
TypePtr SType::make_tyvar(std::string name) {
    SType t;
    t.kind = TyKind::TyVar;
    t.name = std::move(name);
    return mk(std::move(t));
}
TypePtr SType::make_forall(std::string var, TypePtr body) {
    SType t;
    t.kind = TyKind::Forall;
    t.name = std::move(var);
    t.a = std::move(body);
    return mk(std::move(t));
}
TypePtr SType::make_message() {
    SType t;
    t.kind = TyKind::Message;
    return mk(std::move(t));
}

namespace {

bool alpha_eq_rec(const TypePtr& t1, const TypePtr& t2,
                  std::map<std::string, std::string>& l2r,
                  std::map<std::string, std::string>& r2l, int& fresh) {
    if (t1->kind != t2->kind) return false;
    switch (t1->kind) {
        case TyKind::Int:
            return t1->is_signed == t2->is_signed && t1->width == t2->width;
        case TyKind::String:
        case TyKind::ByStr:
        case TyKind::Message:
            return true;
        case TyKind::ByStrX:
            return t1->byte_len == t2->byte_len;
        case TyKind::Adt: {
            if (t1->name != t2->name || t1->args.size() != t2->args.size())
                return false;
            for (size_t i = 0; i < t1->args.size(); ++i)
                if (!alpha_eq_rec(t1->args[i], t2->args[i], l2r, r2l, fresh))
                    return false;
            return true;
        }
        case TyKind::Map:
        case TyKind::Fun:
            return alpha_eq_rec(t1->a, t2->a, l2r, r2l, fresh) &&
                   alpha_eq_rec(t1->b, t2->b, l2r, r2l, fresh);
        case TyKind::NAryFun: {
            if (t1->args.size() != t2->args.size()) return false;
            for (size_t i = 0; i < t1->args.size(); ++i)
                if (!alpha_eq_rec(t1->args[i], t2->args[i], l2r, r2l, fresh))
                    return false;
            return alpha_eq_rec(t1->b, t2->b, l2r, r2l, fresh);
        }
        case TyKind::TyVar: {
            auto i1 = l2r.find(t1->name);
            auto i2 = r2l.find(t2->name);
            if (i1 == l2r.end() && i2 == r2l.end()) return t1->name == t2->name;
            if (i1 == l2r.end() || i2 == r2l.end()) return false;
            return i1->second == i2->second;
        }
        case TyKind::Forall: {
            std::string canon = "#" + std::to_string(fresh++);
            auto s1 = l2r.find(t1->name);
            auto s2 = r2l.find(t2->name);
            std::string o1 = s1 == l2r.end() ? "" : s1->second;
            std::string o2 = s2 == r2l.end() ? "" : s2->second;
            bool had1 = s1 != l2r.end(), had2 = s2 != r2l.end();
            l2r[t1->name] = canon;
            r2l[t2->name] = canon;
            bool ok = alpha_eq_rec(t1->a, t2->a, l2r, r2l, fresh);
            if (had1) l2r[t1->name] = o1; else l2r.erase(t1->name);
            if (had2) r2l[t2->name] = o2; else r2l.erase(t2->name);
            return ok;
        }
    }
    return false;
}

}  // namespace

bool alpha_equal(const TypePtr& t1, const TypePtr& t2) {
    std::map<std::string, std::string> l2r, r2l;
    int fresh = 0;
    return alpha_eq_rec(t1, t2, l2r, r2l, fresh);
}

bool is_ground(const TypePtr& t) {
    switch (t->kind) {
        case TyKind::TyVar:
        case TyKind::Forall:
            return false;
        case TyKind::Adt:
            for (auto& a : t->args)
                if (!is_ground(a)) return false;
            return true;
        case TyKind::Map:
        case TyKind::Fun:
            return is_ground(t->a) && is_ground(t->b);
        case TyKind::NAryFun:
            for (auto& a : t->args)
                if (!is_ground(a)) return false;
            return is_ground(t->b);
        default:
            return true;
    }
}

bool is_prim_key_type(const TypePtr& t) {
    switch (t->kind) {
        case TyKind::Int:
        case TyKind::String:
        case TyKind::ByStr:
        case TyKind::ByStrX:
            return true;
        default:
            return false;
    }
}

TypePtr subst_tyvars(const TypePtr& t, const std::vector<std::string>& vars,
                     const std::vector<TypePtr>& repls) {
    switch (t->kind) {
        case TyKind::TyVar: {
            for (size_t i = 0; i < vars.size(); ++i)
                if (t->name == vars[i]) return repls[i];
            return t;
        }
        case TyKind::Forall: {
            std::vector<std::string> vs;
            std::vector<TypePtr> rs;
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i] != t->name) {  // shadowed pair drops out
                    vs.push_back(vars[i]);
                    rs.push_back(repls[i]);
                }
            return SType::make_forall(t->name, subst_tyvars(t->a, vs, rs));
        }
        case TyKind::Adt: {
            std::vector<TypePtr> args;
            args.reserve(t->args.size());
            for (auto& a : t->args) args.push_back(subst_tyvars(a, vars, repls));
            return SType::make_adt(t->name, std::move(args));
        }
        case TyKind::Map:
            return SType::make_map(subst_tyvars(t->a, vars, repls),
                                   subst_tyvars(t->b, vars, repls));
        case TyKind::Fun:
            return SType::make_fun(subst_tyvars(t->a, vars, repls),
                                   subst_tyvars(t->b, vars, repls));
        case TyKind::NAryFun: {
            std::vector<TypePtr> params;
            params.reserve(t->args.size());
            for (auto& a : t->args)
                params.push_back(subst_tyvars(a, vars, repls));
            return SType::make_nary_fun(std::move(params),
                                        subst_tyvars(t->b, vars, repls));
        }
        default:
            return t;
    }
}

TypePtr subst_tyvar(const TypePtr& t, const std::string& var, const TypePtr& repl) {
    switch (t->kind) {
        case TyKind::TyVar:
            return t->name == var ? repl : t;
        case TyKind::Forall: {
            if (t->name == var) return t;  // shadowed
            // repl is ground at every call site in this compiler, so a
            // binder of the Forall can never capture variables of repl
            return SType::make_forall(t->name, subst_tyvar(t->a, var, repl));
        }
        case TyKind::Adt: {
            std::vector<TypePtr> args;
            args.reserve(t->args.size());
            for (auto& a : t->args) args.push_back(subst_tyvar(a, var, repl));
            return SType::make_adt(t->name, std::move(args));
        }
        case TyKind::Map:
            return SType::make_map(subst_tyvar(t->a, var, repl),
                                   subst_tyvar(t->b, var, repl));
        case TyKind::Fun:
            return SType::make_fun(subst_tyvar(t->a, var, repl),
                                   subst_tyvar(t->b, var, repl));
        case TyKind::NAryFun: {
            std::vector<TypePtr> params;
            params.reserve(t->args.size());
            for (auto& a : t->args) params.push_back(subst_tyvar(a, var, repl));
            return SType::make_nary_fun(std::move(params),
                                        subst_tyvar(t->b, var, repl));
        }
        default:
            return t;
    }
}

namespace {

// parenthesize non-atomic types when used as arguments
bool atomic(const TypePtr& t) {
    switch (t->kind) {
        case TyKind::Adt:
            return t->args.empty();
        case TyKind::Map:
        case TyKind::Fun:
        case TyKind::NAryFun:
        case TyKind::Forall:
            return false;
        default:
            return true;
    }
}

std::string show_arg(const TypePtr& t) {
    return atomic(t) ? show_type(t) : "(" + show_type(t) + ")";
}

}  // namespace

std::string show_type(const TypePtr& t) {
    switch (t->kind) {
        case TyKind::Int:
            return (t->is_signed ? "Int" : "Uint") + std::to_string(t->width);
        case TyKind::String:
            return "String";
        case TyKind::ByStr:
            return "ByStr";
        case TyKind::ByStrX:
            return "ByStr" + std::to_string(t->byte_len);
        case TyKind::Adt: {
            std::string s = t->name;
            for (auto& a : t->args) s += " " + show_arg(a);
            return s;
        }
        case TyKind::Map:
            return "Map " + show_arg(t->a) + " " + show_arg(t->b);
        case TyKind::Fun:
            return show_arg(t->a) + " -> " + show_type(t->b);
        case TyKind::NAryFun: {
            std::string s = "(";
            for (size_t i = 0; i < t->args.size(); ++i) {
                if (i) s += ", ";
                s += show_type(t->args[i]);
            }
            return s + ") -> " + show_type(t->b);
        }
        case TyKind::TyVar:
            return "'" + t->name;
        case TyKind::Forall:
            return "forall '" + t->name + " . " + show_type(t->a);
        case TyKind::Message:
            return "Message";
    }
    return "?";
}

std::string type_sort_key(const TypePtr& t) { return show_type(t); }

}  // namespace mv
