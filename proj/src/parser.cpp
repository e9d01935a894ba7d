#include "minivella/parser.hpp"

#include <cctype>

#include "minivella/builtins.hpp"
#include "minivella/lexer.hpp"

namespace mv {

namespace {

struct ParseBail {};

struct Parser {
    std::vector<Token> toks;
    size_t pos = 0;
    std::vector<Diagnostic>& diags;
    int fresh_counter = 0;

    explicit Parser(std::vector<Token> t, std::vector<Diagnostic>& d)
        : toks(std::move(t)), diags(d) {}

    const Token& peek(int k = 0) const {
        size_t i = pos + k;
        return i < toks.size() ? toks[i] : toks.back();
    }
    bool at(Tok k, int ahead = 0) const { return peek(ahead).kind == k; }
    const Token& next() {
        const Token& t = peek();
        if (pos < toks.size() - 1) ++pos;
        return t;
    }
    [[noreturn]] void fail(const std::string& msg, SourceLoc loc) {
        diags.push_back({Severity::Error, msg, loc});
        throw ParseBail{};
    }
    [[noreturn]] void fail_here(const std::string& msg) { fail(msg, peek().loc); }
    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail_here(std::string("expected ") + what);
        return next();
    }

    std::string fresh_scrutinee() {
        return "$ms" + std::to_string(fresh_counter++);
    }

    // ---- types --------------------------------------------------------

    // Int32/Uint256/String/ByStr/ByStr20/Message return a primitive type;
    // anything else is an ADT name.
    static TypePtr classify_prim(const std::string& n) {
        auto int_ty = [&](bool s, size_t pfx) -> TypePtr {
            std::string w = n.substr(pfx);
            if (w == "32") return SType::make_int(s, 32);
            if (w == "64") return SType::make_int(s, 64);
            if (w == "128") return SType::make_int(s, 128);
            if (w == "256") return SType::make_int(s, 256);
            return nullptr;
        };
        if (n.rfind("Int", 0) == 0 && n.size() > 3) {
            if (auto t = int_ty(true, 3)) return t;
        }
        if (n.rfind("Uint", 0) == 0 && n.size() > 4) {
            if (auto t = int_ty(false, 4)) return t;
        }
        if (n == "String") return SType::make_string();
        if (n == "Message") return SType::make_message();
        if (n == "ByStr") return SType::make_bystr();
        if (n.rfind("ByStr", 0) == 0 && n.size() > 5) {
            std::string d = n.substr(5);
            bool all = !d.empty();
            for (char c : d) all = all && std::isdigit((unsigned char)c);
            if (all) {
                int len = std::stoi(d);
                if (len >= 1) return SType::make_bystrx(len);
            }
        }
        return nullptr;
    }

    TypePtr parse_type() {
        if (at(Tok::KwForall)) {
            next();
            std::string v = expect(Tok::TyVar, "type variable").text;
            expect(Tok::Dot, "'.'");
            return SType::make_forall(v, parse_type());
        }
        TypePtr t = parse_app_type();
        if (at(Tok::Arrow)) {
            next();
            return SType::make_fun(t, parse_type());
        }
        return t;
    }

    TypePtr parse_app_type() {
        if (at(Tok::UIdent)) {
            std::string n = peek().text;
            if (n == "Map") {
                next();
                TypePtr k = parse_type_atom();
                TypePtr v = parse_type_atom();
                if (!is_prim_key_type(k))
                    fail("map key type must be a primitive type", peek().loc);
                return SType::make_map(k, v);
            }
            if (auto prim = classify_prim(n)) {
                next();
                return prim;
            }
            next();
            std::vector<TypePtr> args;
            while (type_atom_start()) args.push_back(parse_type_atom());
            return SType::make_adt(n, std::move(args));
        }
        return parse_type_atom();
    }

    bool type_atom_start() const {
        return at(Tok::UIdent) || at(Tok::TyVar) || at(Tok::LParen);
    }

    TypePtr parse_type_atom() {
        if (at(Tok::LParen)) {
            next();
            TypePtr t = parse_type();
            expect(Tok::RParen, "')'");
            return t;
        }
        if (at(Tok::TyVar)) return SType::make_tyvar(next().text);
        if (at(Tok::UIdent)) {
            std::string n = next().text;
            if (n == "Map") fail_here("Map requires key and value type arguments");
            if (auto prim = classify_prim(n)) return prim;
            return SType::make_adt(n, {});
        }
        fail_here("expected a type");
    }

    // ---- patterns -----------------------------------------------------

    PatternPtr parse_pattern_atom() {
        SourceLoc loc = peek().loc;
        if (at(Tok::Underscore)) {
            next();
            return Pattern::wildcard(loc);
        }
        if (at(Tok::Ident)) return Pattern::binder(next().text, loc);
        if (at(Tok::UIdent)) return Pattern::ctor(next().text, {}, loc);
        if (at(Tok::LParen)) {
            next();
            PatternPtr p = parse_pattern();
            expect(Tok::RParen, "')'");
            return p;
        }
        fail_here("expected a pattern");
    }

    PatternPtr parse_pattern() {
        SourceLoc loc = peek().loc;
        if (at(Tok::UIdent)) {
            std::string name = next().text;
            std::vector<PatternPtr> subs;
            while (at(Tok::Underscore) || at(Tok::Ident) || at(Tok::UIdent) ||
                   at(Tok::LParen))
                subs.push_back(parse_pattern_atom());
            return Pattern::ctor(name, std::move(subs), loc);
        }
        return parse_pattern_atom();
    }

    // ---- expressions --------------------------------------------------

    bool atom_start() const {
        switch (peek().kind) {
            case Tok::Ident:
            case Tok::UIdent:
            case Tok::Str:
            case Tok::Hex:
            case Tok::KwEmp:
            case Tok::LParen:
            case Tok::LBrace:
                return true;
            default:
                return false;
        }
    }

    ExprPtr parse_int_literal(const TypePtr& ity, SourceLoc loc) {
        bool neg = false;
        if (at(Tok::Minus)) {
            next();
            neg = true;
        }
        std::string digits = expect(Tok::Number, "integer literal").text;
        auto v = rt::WideInt::from_decimal(ity->is_signed, ity->width,
                                           neg ? "-" + digits : digits);
        if (!v) fail("integer literal out of range for " + show_type(ity), loc);
        return mk_lit(Literal::make_int(*v), loc);
    }

    std::vector<TypePtr> parse_brace_types() {
        std::vector<TypePtr> tys;
        if (at(Tok::LBrace)) {
            next();
            while (!at(Tok::RBrace)) tys.push_back(parse_type_atom());
            expect(Tok::RBrace, "'}'");
        }
        return tys;
    }

    ExprPtr parse_atom() {
        SourceLoc loc = peek().loc;
        switch (peek().kind) {
            case Tok::Ident:
                return mk_var(next().text, loc);
            case Tok::Str:
                return mk_lit(Literal::make_str(next().text), loc);
            case Tok::Hex: {
                auto t = next();
                return mk_lit(Literal::make_bystrx(t.bytes), loc);
            }
            case Tok::KwEmp: {
                next();
                auto e = make_expr(ExprKind::Builtin, loc);
                e->name = builtin_name(BI::Emp);
                e->ty_args = parse_brace_types();
                if (e->ty_args.size() != 2)
                    fail("Emp requires {key value} type arguments", loc);
                if (!is_prim_key_type(e->ty_args[0]))
                    fail("map key type must be a primitive type", loc);
                return e;
            }
            case Tok::UIdent: {
                std::string n = peek().text;
                if (auto prim = classify_prim(n)) {
                    if (prim->kind == TyKind::Int &&
                        (at(Tok::Number, 1) || at(Tok::Minus, 1))) {
                        next();
                        return parse_int_literal(prim, loc);
                    }
                    fail("type name used as an expression", loc);
                }
                next();
                auto e = make_expr(ExprKind::Constr, loc);
                e->name = n;
                e->ty_args = parse_brace_types();
                return e;  // argument atoms are attached by the spine parser
            }
            case Tok::LParen: {
                next();
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::LBrace: {
                next();
                auto e = make_expr(ExprKind::Msg, loc);
                while (!at(Tok::RBrace)) {
                    MsgField f;
                    if (at(Tok::Ident) || at(Tok::UIdent))
                        f.name = next().text;
                    else
                        fail_here("expected message field name");
                    expect(Tok::Colon, "':'");
                    f.value = parse_expr();
                    e->fields.push_back(std::move(f));
                    if (at(Tok::Semi))
                        next();
                    else
                        break;
                }
                expect(Tok::RBrace, "'}'");
                return e;
            }
            default:
                fail_here("expected an expression");
        }
    }

    ExprPtr parse_spine() {
        SourceLoc loc = peek().loc;
        ExprPtr head;
        if (at(Tok::At)) {
            next();
            ExprPtr f = parse_atom();
            if (!type_atom_start()) fail_here("expected a type argument after '@'");
            while (type_atom_start()) {
                auto e = make_expr(ExprKind::TApp, loc);
                e->a = f;
                e->ty = parse_type_atom();
                f = e;
            }
            head = f;
        } else {
            head = parse_atom();
        }
        if (head->kind == ExprKind::Constr) {
            // constructors are fully applied at their occurrence
            while (atom_start()) head->args.push_back(parse_atom());
            return head;
        }
        while (atom_start()) head = mk_app(head, parse_atom(), loc);
        return head;
    }

    ExprPtr parse_expr() {
        SourceLoc loc = peek().loc;
        switch (peek().kind) {
            case Tok::KwLet: {
                next();
                bool is_rec = at(Tok::KwRec);
                if (is_rec) next();
                std::string name = expect(Tok::Ident, "binder name").text;
                TypePtr rec_ty;
                if (is_rec) {
                    expect(Tok::Colon, "':' (recursive bindings need a type)");
                    rec_ty = parse_type();
                }
                expect(Tok::Eq, "'='");
                ExprPtr bound = parse_expr();
                expect(Tok::KwIn, "'in'");
                ExprPtr body = parse_expr();
                auto e = make_expr(is_rec ? ExprKind::LetRec : ExprKind::Let, loc);
                e->name = name;
                e->ty = rec_ty;
                e->a = bound;
                e->b = body;
                return e;
            }
            case Tok::KwFun: {
                next();
                expect(Tok::LParen, "'('");
                std::string p = expect(Tok::Ident, "parameter name").text;
                expect(Tok::Colon, "':'");
                TypePtr pty = parse_type();
                expect(Tok::RParen, "')'");
                expect(Tok::FatArrow, "'=>'");
                return mk_fun(p, pty, parse_expr(), loc);
            }
            case Tok::KwTfun: {
                next();
                std::string v = expect(Tok::TyVar, "type variable").text;
                expect(Tok::FatArrow, "'=>'");
                auto e = make_expr(ExprKind::TFun, loc);
                e->name = v;
                e->a = parse_expr();
                return e;
            }
            case Tok::KwMatch: {
                next();
                ExprPtr scrut = parse_spine();
                expect(Tok::KwWith, "'with'");
                auto m = make_expr(ExprKind::Match, loc);
                while (at(Tok::Bar)) {
                    next();
                    MatchArm arm;
                    arm.pat = parse_pattern();
                    expect(Tok::FatArrow, "'=>'");
                    arm.body = parse_expr();
                    m->arms.push_back(std::move(arm));
                }
                expect(Tok::KwEnd, "'end'");
                if (m->arms.empty()) fail("match must have at least one arm", loc);
                if (scrut->kind == ExprKind::Var) {
                    m->name = scrut->name;
                    return m;
                }
                // scrutinee must be a variable; normalize through a let
                std::string tmp = fresh_scrutinee();
                m->name = tmp;
                return mk_let(tmp, scrut, m, loc);
            }
            case Tok::KwBuiltin: {
                next();
                std::string op = expect(Tok::Ident, "builtin name").text;
                auto bi = builtin_by_name(op);
                if (!bi) fail("unknown builtin '" + op + "'", loc);
                auto e = make_expr(ExprKind::Builtin, loc);
                e->name = op;
                e->ty_args = parse_brace_types();
                for (int i = 0; i < builtin_arity(*bi); ++i) {
                    if (!atom_start())
                        fail("builtin '" + op + "' expects " +
                                 std::to_string(builtin_arity(*bi)) + " arguments",
                             peek().loc);
                    e->args.push_back(parse_atom());
                }
                return e;
            }
            default:
                return parse_spine();
        }
    }

    // ---- statements ---------------------------------------------------

    std::vector<StmtPtr> parse_stmts() {
        std::vector<StmtPtr> out;
        while (!at(Tok::KwEnd) && !at(Tok::Bar) && !at(Tok::Eof))
            out.push_back(parse_stmt());
        return out;
    }

    StmtPtr parse_stmt() {
        SourceLoc loc = peek().loc;
        auto s = std::make_shared<Stmt>();
        s->loc = loc;
        if (at(Tok::KwMatch)) {
            next();
            s->kind = StmtKind::MatchStmt;
            s->name = expect(Tok::Ident, "scrutinee variable").text;
            expect(Tok::KwWith, "'with'");
            while (at(Tok::Bar)) {
                next();
                StmtArm arm;
                arm.pat = parse_pattern();
                expect(Tok::FatArrow, "'=>'");
                arm.body = parse_stmts();
                s->arms.push_back(std::move(arm));
            }
            expect(Tok::KwEnd, "'end'");
            if (at(Tok::Semi)) next();
            return s;
        }
        if (at(Tok::KwSend) || at(Tok::KwEvent)) {
            s->kind = StmtKind::Emit;
            s->is_event = at(Tok::KwEvent);
            next();
            s->e = parse_expr();
            expect(Tok::Semi, "';'");
            return s;
        }
        std::string name = expect(Tok::Ident, "a statement").text;
        if (at(Tok::Eq)) {
            next();
            s->kind = StmtKind::Bind;
            s->name = name;
            s->e = parse_expr();
        } else if (at(Tok::LArrow)) {
            next();
            s->name = name;
            s->field = expect(Tok::Ident, "field name").text;
            if (at(Tok::LBracket)) {
                next();
                s->kind = StmtKind::MapGet;
                s->e = parse_expr();
                expect(Tok::RBracket, "']'");
            } else {
                s->kind = StmtKind::LoadField;
            }
        } else if (at(Tok::Assign)) {
            next();
            s->kind = StmtKind::StoreField;
            s->field = name;
            s->e = parse_expr();
        } else if (at(Tok::LBracket)) {
            next();
            s->kind = StmtKind::MapPut;
            s->field = name;
            s->e = parse_expr();
            expect(Tok::RBracket, "']'");
            expect(Tok::Assign, "':='");
            s->e2 = parse_expr();
        } else {
            fail_here("expected '=', '<-', ':=' or '[' in statement");
        }
        expect(Tok::Semi, "';'");
        return s;
    }

    // ---- top level ----------------------------------------------------

    ADTDecl parse_adt_decl() {
        ADTDecl d;
        d.loc = peek().loc;
        expect(Tok::KwType, "'type'");
        d.name = expect(Tok::UIdent, "type name").text;
        while (at(Tok::TyVar)) d.ty_params.push_back(next().text);
        expect(Tok::Eq, "'='");
        while (at(Tok::Bar)) {
            next();
            ADTCtor c;
            c.name = expect(Tok::UIdent, "constructor name").text;
            if (at(Tok::KwOf)) {
                next();
                while (type_atom_start()) c.field_types.push_back(parse_type_atom());
            }
            d.ctors.push_back(std::move(c));
        }
        if (d.ctors.empty()) fail("ADT must declare at least one constructor", d.loc);
        return d;
    }

    Program parse_program_toplevel() {
        Program p;
        p.adts = builtin_adts();
        while (at(Tok::KwType)) p.adts.push_back(parse_adt_decl());
        // library definitions; a trailing `let .. in ..` belongs to the main
        // expression, detected by the `in` after the bound value
        while (at(Tok::KwLet)) {
            size_t save = pos;
            LibDef d;
            d.loc = peek().loc;
            next();
            d.is_rec = at(Tok::KwRec);
            if (d.is_rec) next();
            d.name = expect(Tok::Ident, "definition name").text;
            if (d.is_rec) {
                expect(Tok::Colon, "':' (recursive bindings need a type)");
                d.rec_type = parse_type();
            }
            expect(Tok::Eq, "'='");
            d.value = parse_expr();
            if (at(Tok::KwIn)) {
                pos = save;
                break;
            }
            p.defs.push_back(std::move(d));
        }
        if (at(Tok::KwContract)) {
            Contract c;
            next();
            c.name = expect(Tok::UIdent, "contract name").text;
            expect(Tok::LParen, "'('");
            expect(Tok::RParen, "')'");
            while (at(Tok::KwField)) {
                next();
                ContractField f;
                f.loc = peek().loc;
                f.name = expect(Tok::Ident, "field name").text;
                expect(Tok::Colon, "':'");
                f.type = parse_type();
                expect(Tok::Eq, "'='");
                f.init = parse_expr();
                c.fields.push_back(std::move(f));
            }
            while (at(Tok::KwTransition)) {
                next();
                Transition t;
                t.loc = peek().loc;
                t.name = expect(Tok::UIdent, "transition name").text;
                expect(Tok::LParen, "'('");
                while (!at(Tok::RParen)) {
                    TransParam tp;
                    tp.name = expect(Tok::Ident, "parameter name").text;
                    expect(Tok::Colon, "':'");
                    tp.type = parse_type();
                    t.params.push_back(std::move(tp));
                    if (at(Tok::Comma))
                        next();
                    else
                        break;
                }
                expect(Tok::RParen, "')'");
                t.body = parse_stmts();
                expect(Tok::KwEnd, "'end'");
                c.transitions.push_back(std::move(t));
            }
            expect(Tok::KwEnd, "'end'");
            p.contract = std::move(c);
        } else {
            p.main = parse_expr();
        }
        expect(Tok::Eof, "end of input");
        return p;
    }
};

}  // namespace

ParseResult parse_program(const std::string& text) {
    ParseResult r;
    auto toks = lex(text, r.diags);
    if (!r.diags.empty()) return r;
    Parser parser(std::move(toks), r.diags);
    try {
        r.program = parser.parse_program_toplevel();
    } catch (ParseBail&) {
        r.program.reset();
    }
    return r;
}

std::optional<TypePtr> parse_type_string(const std::string& text) {
    std::vector<Diagnostic> diags;
    auto toks = lex(text, diags);
    if (!diags.empty()) return std::nullopt;
    Parser parser(std::move(toks), diags);
    try {
        TypePtr t = parser.parse_type();
        if (!parser.at(Tok::Eof)) return std::nullopt;
        return t;
    } catch (ParseBail&) {
        return std::nullopt;
    }
}

std::optional<ExprPtr> parse_expr_string(const std::string& text) {
    std::vector<Diagnostic> diags;
    auto toks = lex(text, diags);
    if (!diags.empty()) return std::nullopt;
    Parser parser(std::move(toks), diags);
    try {
        ExprPtr e = parser.parse_expr();
        if (!parser.at(Tok::Eof)) return std::nullopt;
        return e;
    } catch (ParseBail&) {
        return std::nullopt;
    }
}

}  // namespace mv
