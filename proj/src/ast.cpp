#include "minivella/ast.hpp"

#include <algorithm>
#include <sstream>

namespace mv {

TypePtr Literal::type() const {
    switch (kind) {
        case Kind::Int: return SType::make_int(i.is_signed, i.width);
        case Kind::Str: return SType::make_string();
        case Kind::ByStrX: return SType::make_bystrx((int)bytes.size());
    }
    return nullptr;
}

Literal Literal::make_int(rt::WideInt v) {
    Literal l;
    l.kind = Kind::Int;
    l.i = v;
    return l;
}
Literal Literal::make_str(std::string v) {
    Literal l;
    l.kind = Kind::Str;
    l.s = std::move(v);
    return l;
}
Literal Literal::make_bystrx(std::vector<uint8_t> v) {
    Literal l;
    l.kind = Kind::ByStrX;
    l.bytes = std::move(v);
    return l;
}

bool literal_equal(const Literal& a, const Literal& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Literal::Kind::Int: return a.i == b.i;
        case Literal::Kind::Str: return a.s == b.s;
        case Literal::Kind::ByStrX: return a.bytes == b.bytes;
    }
    return false;
}

PatternPtr Pattern::wildcard(SourceLoc loc) {
    Pattern p;
    p.kind = Kind::Wildcard;
    p.loc = loc;
    return std::make_shared<const Pattern>(std::move(p));
}
PatternPtr Pattern::binder(std::string name, SourceLoc loc) {
    Pattern p;
    p.kind = Kind::Binder;
    p.name = std::move(name);
    p.loc = loc;
    return std::make_shared<const Pattern>(std::move(p));
}
PatternPtr Pattern::ctor(std::string name, std::vector<PatternPtr> subs,
                         SourceLoc loc) {
    Pattern p;
    p.kind = Kind::Ctor;
    p.name = std::move(name);
    p.subs = std::move(subs);
    p.loc = loc;
    return std::make_shared<const Pattern>(std::move(p));
}

bool pattern_is_flat(const PatternPtr& p) {
    if (p->kind != Pattern::Kind::Ctor) return true;
    for (auto& s : p->subs)
        if (s->kind == Pattern::Kind::Ctor) return false;
    return true;
}

ExprPtr make_expr(ExprKind k, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->loc = loc;
    return e;
}

ExprPtr mk_lit(Literal l, SourceLoc loc) {
    auto e = make_expr(ExprKind::Lit, loc);
    e->lit = std::move(l);
    return e;
}
ExprPtr mk_var(std::string name, SourceLoc loc) {
    auto e = make_expr(ExprKind::Var, loc);
    e->name = std::move(name);
    return e;
}
ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body, SourceLoc loc) {
    auto e = make_expr(ExprKind::Let, loc);
    e->name = std::move(name);
    e->a = std::move(bound);
    e->b = std::move(body);
    return e;
}
ExprPtr mk_fun(std::string param, TypePtr pty, ExprPtr body, SourceLoc loc) {
    auto e = make_expr(ExprKind::Fun, loc);
    e->name = std::move(param);
    e->ty = std::move(pty);
    e->a = std::move(body);
    return e;
}
ExprPtr mk_app(ExprPtr f, ExprPtr arg, SourceLoc loc) {
    auto e = make_expr(ExprKind::App, loc);
    e->a = std::move(f);
    e->b = std::move(arg);
    return e;
}

const ADTDecl* AdtRegistry::find_adt(const std::string& name) const {
    for (auto& d : prog->adts)
        if (d.name == name) return &d;
    return nullptr;
}

std::pair<const ADTDecl*, int> AdtRegistry::find_ctor(const std::string& ctor) const {
    // reverse: user declarations shadow builtin constructors (Fig.-3-style
    // lists redeclare Nil/Cons)
    for (auto it = prog->adts.rbegin(); it != prog->adts.rend(); ++it) {
        for (size_t i = 0; i < it->ctors.size(); ++i)
            if (it->ctors[i].name == ctor) return {&*it, (int)i};
    }
    return {nullptr, -1};
}

std::vector<ADTDecl> builtin_adts() {
    std::vector<ADTDecl> adts;
    {
        ADTDecl d;
        d.name = "Bool";
        d.ctors = {{"True", {}}, {"False", {}}};
        d.builtin = true;
        adts.push_back(std::move(d));
    }
    {
        ADTDecl d;
        d.name = "Option";
        d.ty_params = {"A"};
        d.ctors = {{"Some", {SType::make_tyvar("A")}}, {"None", {}}};
        d.builtin = true;
        adts.push_back(std::move(d));
    }
    {
        ADTDecl d;
        d.name = "List";
        d.ty_params = {"A"};
        d.ctors = {
            {"Cons",
             {SType::make_tyvar("A"),
              SType::make_adt("List", {SType::make_tyvar("A")})}},
            {"Nil", {}},
        };
        d.builtin = true;
        adts.push_back(std::move(d));
    }
    {
        ADTDecl d;
        d.name = "Pair";
        d.ty_params = {"A", "B"};
        d.ctors = {{"Pair", {SType::make_tyvar("A"), SType::make_tyvar("B")}}};
        d.builtin = true;
        adts.push_back(std::move(d));
    }
    return adts;
}

namespace {

void pattern_binders(const PatternPtr& p, std::set<std::string>& out) {
    switch (p->kind) {
        case Pattern::Kind::Wildcard: return;
        case Pattern::Kind::Binder: out.insert(p->name); return;
        case Pattern::Kind::Ctor:
            for (auto& s : p->subs) pattern_binders(s, out);
            return;
    }
}

void fv_rec(const ExprPtr& e, std::set<std::string>& bound,
            std::set<std::string>& out) {
    if (!e) return;
    switch (e->kind) {
        case ExprKind::Lit: return;
        case ExprKind::Var:
            if (!bound.count(e->name)) out.insert(e->name);
            return;
        case ExprKind::Let: {
            fv_rec(e->a, bound, out);
            bool had = bound.count(e->name);
            bound.insert(e->name);
            fv_rec(e->b, bound, out);
            if (!had) bound.erase(e->name);
            return;
        }
        case ExprKind::LetRec: {
            bool had = bound.count(e->name);
            bound.insert(e->name);
            fv_rec(e->a, bound, out);
            fv_rec(e->b, bound, out);
            if (!had) bound.erase(e->name);
            return;
        }
        case ExprKind::Fun: {
            bool had = bound.count(e->name);
            bound.insert(e->name);
            fv_rec(e->a, bound, out);
            if (!had) bound.erase(e->name);
            return;
        }
        case ExprKind::App:
            fv_rec(e->a, bound, out);
            fv_rec(e->b, bound, out);
            return;
        case ExprKind::TFun:
        case ExprKind::TApp:
        case ExprKind::DispatchCall:
            fv_rec(e->a, bound, out);
            return;
        case ExprKind::Constr:
        case ExprKind::Builtin:
            for (auto& a : e->args) fv_rec(a, bound, out);
            return;
        case ExprKind::Match: {
            if (!bound.count(e->name)) out.insert(e->name);
            for (auto& arm : e->arms) {
                std::set<std::string> binders;
                pattern_binders(arm.pat, binders);
                std::vector<std::string> added;
                for (auto& b : binders)
                    if (bound.insert(b).second) added.push_back(b);
                fv_rec(arm.body, bound, out);
                for (auto& b : added) bound.erase(b);
            }
            return;
        }
        case ExprKind::Msg:
            for (auto& f : e->fields) fv_rec(f.value, bound, out);
            return;
        case ExprKind::NAryFun: {
            std::vector<std::string> added;
            for (auto& p : e->params)
                if (bound.insert(p).second) added.push_back(p);
            fv_rec(e->a, bound, out);
            for (auto& p : added) bound.erase(p);
            return;
        }
        case ExprKind::Call:
            fv_rec(e->a, bound, out);
            for (auto& a : e->args) fv_rec(a, bound, out);
            return;
        case ExprKind::Dispatch:
            for (auto& ent : e->entries) fv_rec(ent.body, bound, out);
            return;
    }
}

void fv_stmts_rec(const std::vector<StmtPtr>& body, std::set<std::string>& bound,
                  std::set<std::string>& out) {
    std::vector<std::string> added;
    for (auto& s : body) {
        switch (s->kind) {
            case StmtKind::Bind:
            case StmtKind::StoreField:
                fv_rec(s->e, bound, out);
                break;
            case StmtKind::LoadField:
                break;
            case StmtKind::MapGet:
                fv_rec(s->e, bound, out);
                break;
            case StmtKind::MapPut:
                fv_rec(s->e, bound, out);
                fv_rec(s->e2, bound, out);
                break;
            case StmtKind::Emit:
                fv_rec(s->e, bound, out);
                break;
            case StmtKind::MatchStmt: {
                if (!bound.count(s->name)) out.insert(s->name);
                for (auto& arm : s->arms) {
                    std::set<std::string> binders;
                    pattern_binders(arm.pat, binders);
                    std::vector<std::string> arm_added;
                    for (auto& b : binders)
                        if (bound.insert(b).second) arm_added.push_back(b);
                    fv_stmts_rec(arm.body, bound, out);
                    for (auto& b : arm_added) bound.erase(b);
                }
                break;
            }
        }
        if (!s->name.empty() && s->kind != StmtKind::MatchStmt &&
            s->kind != StmtKind::Emit) {
            if (bound.insert(s->name).second) added.push_back(s->name);
        }
    }
    for (auto& a : added) bound.erase(a);
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
    std::set<std::string> bound, out;
    fv_rec(e, bound, out);
    return out;
}

std::set<std::string> free_vars_stmts(const std::vector<StmtPtr>& body) {
    std::set<std::string> bound, out;
    fv_stmts_rec(body, bound, out);
    return out;
}

std::string fresh_name(const std::string& hint, const std::set<std::string>& used) {
    if (!used.count(hint)) return hint;
    for (int i = 1;; ++i) {
        std::string cand = hint + "_" + std::to_string(i);
        if (!used.count(cand)) return cand;
    }
}

// ---------------------------------------------------------------------------
// pretty printing

namespace {

std::string hex_of(const std::vector<uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (uint8_t b : bytes) {
        s += digits[b >> 4];
        s += digits[b & 0xf];
    }
    return s;
}

std::string quote_str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += "\"";
    return out;
}

struct Printer {
    std::ostringstream os;
    int indent = 0;

    void nl() {
        os << "\n";
        for (int i = 0; i < indent; ++i) os << "  ";
    }

    bool atomic(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::Var:
                return true;
            case ExprKind::Lit:
                return e->lit.kind != Literal::Kind::Int;
            case ExprKind::Constr:
                return e->args.empty() && e->ty_args.empty();
            case ExprKind::Msg:
                return true;
            default:
                return false;
        }
    }

    void atom(const ExprPtr& e) {
        if (atomic(e)) {
            print(e);
        } else {
            os << "(";
            print(e);
            os << ")";
        }
    }

    void print(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::Lit:
                switch (e->lit.kind) {
                    case Literal::Kind::Int:
                        os << show_type(e->lit.type()) << " " << e->lit.i.to_decimal();
                        break;
                    case Literal::Kind::Str:
                        os << quote_str(e->lit.s);
                        break;
                    case Literal::Kind::ByStrX:
                        os << hex_of(e->lit.bytes);
                        break;
                }
                break;
            case ExprKind::Var:
                os << e->name;
                break;
            case ExprKind::Let:
                os << "let " << e->name << " = ";
                print(e->a);
                os << " in";
                nl();
                print(e->b);
                break;
            case ExprKind::LetRec:
                os << "let rec " << e->name << " : " << show_type(e->ty) << " = ";
                print(e->a);
                os << " in";
                nl();
                print(e->b);
                break;
            case ExprKind::Fun:
                os << "fun (" << e->name << " : " << show_type(e->ty) << ") => ";
                print(e->a);
                break;
            case ExprKind::App:
                // left-nested application spine
                if (e->a->kind == ExprKind::App || e->a->kind == ExprKind::TApp)
                    print(e->a);
                else
                    atom(e->a);
                os << " ";
                atom(e->b);
                break;
            case ExprKind::TFun:
                os << "tfun '" << e->name << " => ";
                print(e->a);
                break;
            case ExprKind::TApp:
                os << "@";
                atom(e->a);
                os << " " << (type_arg_atomic(e->ty) ? show_type(e->ty)
                                                    : "(" + show_type(e->ty) + ")");
                break;
            case ExprKind::Constr: {
                os << e->name;
                if (!e->ty_args.empty()) {
                    os << " {";
                    for (size_t i = 0; i < e->ty_args.size(); ++i) {
                        if (i) os << " ";
                        os << type_arg(e->ty_args[i]);
                    }
                    os << "}";
                }
                for (auto& a : e->args) {
                    os << " ";
                    atom(a);
                }
                break;
            }
            case ExprKind::Match: {
                os << "match " << e->name << " with";
                indent++;
                for (auto& arm : e->arms) {
                    nl();
                    os << "| " << pretty_print(arm.pat) << " => ";
                    print(arm.body);
                }
                indent--;
                nl();
                os << "end";
                break;
            }
            case ExprKind::Builtin: {
                os << "builtin " << e->name;
                if (!e->ty_args.empty()) {
                    os << " {";
                    for (size_t i = 0; i < e->ty_args.size(); ++i) {
                        if (i) os << " ";
                        os << type_arg(e->ty_args[i]);
                    }
                    os << "}";
                }
                for (auto& a : e->args) {
                    os << " ";
                    atom(a);
                }
                break;
            }
            case ExprKind::Msg: {
                os << "{ ";
                for (size_t i = 0; i < e->fields.size(); ++i) {
                    if (i) os << " ; ";
                    os << e->fields[i].name << " : ";
                    print(e->fields[i].value);
                }
                os << " }";
                break;
            }
            case ExprKind::NAryFun: {
                os << "funn (";
                for (size_t i = 0; i < e->params.size(); ++i) {
                    if (i) os << ", ";
                    os << e->params[i] << " : " << show_type(e->ty_args[i]);
                }
                os << ") => ";
                print(e->a);
                break;
            }
            case ExprKind::Call: {
                os << "call ";
                atom(e->a);
                os << " (";
                for (size_t i = 0; i < e->args.size(); ++i) {
                    if (i) os << ", ";
                    print(e->args[i]);
                }
                os << ")";
                break;
            }
            case ExprKind::Dispatch: {
                os << "dispatch {";
                indent++;
                for (auto& ent : e->entries) {
                    nl();
                    os << show_type(ent.type) << " => ";
                    print(ent.body);
                }
                indent--;
                nl();
                os << "}";
                break;
            }
            case ExprKind::DispatchCall:
                os << "dispatchcall ";
                atom(e->a);
                os << " [" << show_type(e->ty) << "]";
                break;
        }
    }

    static bool type_arg_atomic(const TypePtr& t) {
        switch (t->kind) {
            case TyKind::Adt: return t->args.empty();
            case TyKind::Map:
            case TyKind::Fun:
            case TyKind::NAryFun:
            case TyKind::Forall:
                return false;
            default: return true;
        }
    }
    static std::string type_arg(const TypePtr& t) {
        return type_arg_atomic(t) ? show_type(t) : "(" + show_type(t) + ")";
    }
};

}  // namespace

std::string pretty_print(const PatternPtr& p) {
    switch (p->kind) {
        case Pattern::Kind::Wildcard: return "_";
        case Pattern::Kind::Binder: return p->name;
        case Pattern::Kind::Ctor: {
            std::string s = p->name;
            for (auto& sub : p->subs) {
                s += " ";
                if (sub->kind == Pattern::Kind::Ctor)
                    s += "(" + pretty_print(sub) + ")";
                else
                    s += pretty_print(sub);
            }
            return s;
        }
    }
    return "_";
}

std::string pretty_print(const ExprPtr& e) {
    Printer p;
    p.print(e);
    return p.os.str();
}

std::string pretty_print_stmts(const std::vector<StmtPtr>& body, int indent) {
    std::ostringstream os;
    std::string pad(indent * 2, ' ');
    for (auto& s : body) {
        os << pad;
        switch (s->kind) {
            case StmtKind::Bind:
                os << s->name << " = " << pretty_print(s->e);
                break;
            case StmtKind::LoadField:
                os << s->name << " <- " << s->field;
                break;
            case StmtKind::StoreField:
                os << s->field << " := " << pretty_print(s->e);
                break;
            case StmtKind::MapGet:
                os << s->name << " <- " << s->field << "[" << pretty_print(s->e)
                   << "]";
                break;
            case StmtKind::MapPut:
                os << s->field << "[" << pretty_print(s->e)
                   << "] := " << pretty_print(s->e2);
                break;
            case StmtKind::Emit:
                os << (s->is_event ? "event " : "send ") << pretty_print(s->e);
                break;
            case StmtKind::MatchStmt: {
                os << "match " << s->name << " with\n";
                for (auto& arm : s->arms) {
                    os << pad << "| " << pretty_print(arm.pat) << " =>\n";
                    os << pretty_print_stmts(arm.body, indent + 1);
                }
                os << pad << "end";
                break;
            }
        }
        os << ";\n";
    }
    return os.str();
}

std::string pretty_print_program(const Program& p) {
    std::ostringstream os;
    for (auto& d : p.adts) {
        if (d.builtin) continue;
        os << "type " << d.name;
        for (auto& tp : d.ty_params) os << " '" << tp;
        os << " =";
        for (auto& c : d.ctors) {
            os << "\n| " << c.name;
            if (!c.field_types.empty()) {
                os << " of";
                for (auto& ft : c.field_types) {
                    os << " ";
                    if (Printer::type_arg_atomic(ft))
                        os << show_type(ft);
                    else
                        os << "(" << show_type(ft) << ")";
                }
            }
        }
        os << "\n\n";
    }
    for (auto& d : p.defs) {
        if (d.is_rec)
            os << "let rec " << d.name << " : " << show_type(d.rec_type) << " = "
               << pretty_print(d.value) << "\n\n";
        else
            os << "let " << d.name << " = " << pretty_print(d.value) << "\n\n";
    }
    if (p.contract) {
        auto& c = *p.contract;
        os << "contract " << c.name << "()\n";
        for (auto& f : c.fields)
            os << "field " << f.name << " : " << show_type(f.type) << " = "
               << pretty_print(f.init) << "\n";
        for (auto& t : c.transitions) {
            os << "transition " << t.name << "(";
            for (size_t i = 0; i < t.params.size(); ++i) {
                if (i) os << ", ";
                os << t.params[i].name << " : " << show_type(t.params[i].type);
            }
            os << ")\n";
            os << pretty_print_stmts(t.body, 1);
            os << "end\n";
        }
        os << "end\n";
    } else if (p.main) {
        os << pretty_print(p.main) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// structural equality (ignores locations and annotations)

namespace {

bool pat_equal(const PatternPtr& a, const PatternPtr& b) {
    if (a->kind != b->kind) return false;
    if (a->name != b->name) return false;
    if (a->subs.size() != b->subs.size()) return false;
    for (size_t i = 0; i < a->subs.size(); ++i)
        if (!pat_equal(a->subs[i], b->subs[i])) return false;
    return true;
}

bool opt_type_equal(const TypePtr& a, const TypePtr& b) {
    if (!a && !b) return true;
    if (!a || !b) return false;
    return alpha_equal(a, b);
}

}  // namespace

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a && !b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->name != b->name || a->adt_name != b->adt_name) return false;
    if (a->kind == ExprKind::Lit && !literal_equal(a->lit, b->lit)) return false;
    if (!opt_type_equal(a->ty, b->ty)) return false;
    if (a->ty_args.size() != b->ty_args.size()) return false;
    for (size_t i = 0; i < a->ty_args.size(); ++i)
        if (!alpha_equal(a->ty_args[i], b->ty_args[i])) return false;
    if (a->params != b->params) return false;
    if (!expr_equal(a->a, b->a) || !expr_equal(a->b, b->b)) return false;
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!expr_equal(a->args[i], b->args[i])) return false;
    if (a->arms.size() != b->arms.size()) return false;
    for (size_t i = 0; i < a->arms.size(); ++i) {
        if (!pat_equal(a->arms[i].pat, b->arms[i].pat)) return false;
        if (!expr_equal(a->arms[i].body, b->arms[i].body)) return false;
    }
    if (a->fields.size() != b->fields.size()) return false;
    for (size_t i = 0; i < a->fields.size(); ++i) {
        if (a->fields[i].name != b->fields[i].name) return false;
        if (!expr_equal(a->fields[i].value, b->fields[i].value)) return false;
    }
    if (a->entries.size() != b->entries.size()) return false;
    for (size_t i = 0; i < a->entries.size(); ++i) {
        if (!alpha_equal(a->entries[i].type, b->entries[i].type)) return false;
        if (!expr_equal(a->entries[i].body, b->entries[i].body)) return false;
    }
    return true;
}

namespace {

bool stmts_equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        auto& x = *a[i];
        auto& y = *b[i];
        if (x.kind != y.kind || x.name != y.name || x.field != y.field ||
            x.is_event != y.is_event)
            return false;
        if (!expr_equal(x.e, y.e) || !expr_equal(x.e2, y.e2)) return false;
        if (x.arms.size() != y.arms.size()) return false;
        for (size_t j = 0; j < x.arms.size(); ++j) {
            if (!pat_equal(x.arms[j].pat, y.arms[j].pat)) return false;
            if (!stmts_equal(x.arms[j].body, y.arms[j].body)) return false;
        }
    }
    return true;
}

}  // namespace

bool program_equal(const Program& a, const Program& b) {
    if (a.adts.size() != b.adts.size()) return false;
    for (size_t i = 0; i < a.adts.size(); ++i) {
        auto& x = a.adts[i];
        auto& y = b.adts[i];
        if (x.name != y.name || x.ty_params != y.ty_params ||
            x.ctors.size() != y.ctors.size())
            return false;
        for (size_t j = 0; j < x.ctors.size(); ++j) {
            if (x.ctors[j].name != y.ctors[j].name) return false;
            if (x.ctors[j].field_types.size() != y.ctors[j].field_types.size())
                return false;
            for (size_t k = 0; k < x.ctors[j].field_types.size(); ++k)
                if (!alpha_equal(x.ctors[j].field_types[k],
                                 y.ctors[j].field_types[k]))
                    return false;
        }
    }
    if (a.defs.size() != b.defs.size()) return false;
    for (size_t i = 0; i < a.defs.size(); ++i) {
        if (a.defs[i].name != b.defs[i].name) return false;
        if (a.defs[i].is_rec != b.defs[i].is_rec) return false;
        if (a.defs[i].is_rec &&
            !alpha_equal(a.defs[i].rec_type, b.defs[i].rec_type))
            return false;
        if (!expr_equal(a.defs[i].value, b.defs[i].value)) return false;
    }
    if (a.contract.has_value() != b.contract.has_value()) return false;
    if (a.contract) {
        auto& x = *a.contract;
        auto& y = *b.contract;
        if (x.name != y.name || x.fields.size() != y.fields.size() ||
            x.transitions.size() != y.transitions.size())
            return false;
        for (size_t i = 0; i < x.fields.size(); ++i) {
            if (x.fields[i].name != y.fields[i].name) return false;
            if (!alpha_equal(x.fields[i].type, y.fields[i].type)) return false;
            if (!expr_equal(x.fields[i].init, y.fields[i].init)) return false;
        }
        for (size_t i = 0; i < x.transitions.size(); ++i) {
            auto& tx = x.transitions[i];
            auto& ty = y.transitions[i];
            if (tx.name != ty.name || tx.params.size() != ty.params.size())
                return false;
            for (size_t j = 0; j < tx.params.size(); ++j) {
                if (tx.params[j].name != ty.params[j].name) return false;
                if (!alpha_equal(tx.params[j].type, ty.params[j].type))
                    return false;
            }
            if (!stmts_equal(tx.body, ty.body)) return false;
        }
    }
    return expr_equal(a.main, b.main);
}

}  // namespace mv
