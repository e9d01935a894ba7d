#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "minivella/parser.hpp"
#include "minivella/typecheck.hpp"

#include "doctest.h"

using namespace mv;

namespace {

Program checked(const std::string& src) {
    auto pr = parse_program(src);
    REQUIRE_MESSAGE(pr.ok(), "parse failed: ",
                    pr.diags.empty() ? "" : pr.diags[0].message);
    auto tr = typecheck(*pr.program);
    REQUIRE_MESSAGE(tr.ok, "typecheck failed: ",
                    tr.diags.empty() ? "" : tr.diags[0].message);
    return std::move(*pr.program);
}

std::vector<Diagnostic> reject(const std::string& src) {
    auto pr = parse_program(src);
    if (!pr.ok()) return pr.diags;
    auto tr = typecheck(*pr.program);
    REQUIRE_FALSE(tr.ok);
    REQUIRE_FALSE(tr.diags.empty());
    return tr.diags;
}

}  // namespace

TEST_CASE("nested-pattern match parses with the right shape") {
    auto e = parse_expr_string(
        "fun (p : List (Option Int32)) => match p with"
        " | Nil => z"
        " | Cons (Some x) xs => x"
        " | Cons _ _ => z"
        " end");
    REQUIRE(e.has_value());
    CHECK_EQ((*e)->kind, ExprKind::Fun);
    const ExprPtr& m = (*e)->a;
    REQUIRE_EQ(m->kind, ExprKind::Match);
    REQUIRE_EQ(m->arms.size(), 3);
    // arm 2: Cons (Some x) xs — constructor pattern nested at depth 2
    const PatternPtr& p = m->arms[1].pat;
    CHECK_EQ(p->kind, Pattern::Kind::Ctor);
    CHECK_EQ(p->name, "Cons");
    REQUIRE_EQ(p->subs.size(), 2);
    CHECK_EQ(p->subs[0]->kind, Pattern::Kind::Ctor);
    CHECK_EQ(p->subs[0]->name, "Some");
    CHECK_EQ(p->subs[0]->subs[0]->kind, Pattern::Kind::Binder);
    CHECK_FALSE(pattern_is_flat(p));
    CHECK(pattern_is_flat(m->arms[0].pat));
}

TEST_CASE("malformed input produces a located diagnostic") {
    auto pr = parse_program("let x = in");
    CHECK_FALSE(pr.ok());
    REQUIRE_FALSE(pr.diags.empty());
    CHECK_EQ(pr.diags[0].loc.line, 1);
    CHECK_EQ(pr.diags[0].loc.col, 9);  // points at the 'in' token
}

TEST_CASE("non-variable match scrutinees are normalized through a let") {
    auto e = parse_expr_string(
        "match Some {Int32} (Int32 1) with"
        " | Some x => x | None => Int32 0 end");
    REQUIRE(e.has_value());
    CHECK_EQ((*e)->kind, ExprKind::Let);
    CHECK_EQ((*e)->b->kind, ExprKind::Match);
    CHECK_EQ((*e)->b->name, (*e)->name);
}

TEST_CASE("typecheck annotates every binding use with its type") {
    Program p = checked("let x = Uint64 7 in builtin add x x");
    REQUIRE(p.main);
    CHECK_EQ(show_type(p.main->ann), "Uint64");
    CHECK_EQ(show_type(p.main->a->ann), "Uint64");  // bound literal
    // the variable uses inside the builtin
    for (auto& a : p.main->b->args) CHECK_EQ(show_type(a->ann), "Uint64");
}

TEST_CASE("polymorphic annotation carries the Forall") {
    Program p = checked("let id = tfun 'A => fun (x : 'A) => x in\n"
                        "let f = @id Int32 in f (Int32 1)");
    CHECK_EQ(show_type(p.main->a->ann), "forall 'A . 'A -> 'A");
}

TEST_CASE("typecheck rejections") {
    // unbound variable
    CHECK_FALSE(reject("builtin add missing (Int32 1)").empty());
    // argument type mismatch
    CHECK_FALSE(reject("builtin add (Int32 1) (Uint32 1)").empty());
    // applying a non-function
    CHECK_FALSE(reject("let x = Int32 1 in x (Int32 2)").empty());
    // type application of a non-polymorphic value
    CHECK_FALSE(reject("let x = Int32 1 in @x Int32").empty());
    // non-exhaustive match
    CHECK_FALSE(reject("let o = Some {Int32} (Int32 1) in match o with"
                       " | Some x => x end")
                    .empty());
    // constructor arity
    CHECK_FALSE(reject("Some {Int32}").empty());
    // message fields must be serializable
    CHECK_FALSE(
        reject("let f = fun (x : Int32) => x in { _tag : \"T\"; cb : f }")
            .empty());
    // eq only applies to primitive types
    CHECK_FALSE(reject("let a = Some {Int32} (Int32 1) in"
                       " builtin eq {Option Int32} a a")
                    .empty());
}

TEST_CASE("ADT declaration rules") {
    // duplicate user constructors
    CHECK_FALSE(reject("type A = | C of Int32\ntype B = | C\nlet x = Int32 0 "
                       "in x")
                    .empty());
    // irregular recursion
    CHECK_FALSE(reject("type T 'A = | L | N of (T (Option 'A))\n"
                       "let x = Int32 0 in x")
                    .empty());
    // mutual recursion between user ADTs
    CHECK_FALSE(reject("type A = | MkA of B\ntype B = | MkB of A\n"
                       "let x = Int32 0 in x")
                    .empty());
    // regular direct recursion is fine, and user ctors shadow builtin ones
    Program p = checked("type MyList =\n | Nil\n | Cons of Int32 MyList\n"
                        "let l = Cons (Int32 7) Nil in\n"
                        "match l with | Nil => Int32 0 | Cons h t => h end");
    AdtRegistry reg(p);
    auto [d, tag] = reg.find_ctor("Cons");
    REQUIRE(d);
    CHECK_EQ(d->name, "MyList");
    CHECK_EQ(tag, 1);
}

TEST_CASE("pattern exhaustiveness checker") {
    Program p = checked("let x = Int32 0 in x");
    AdtRegistry reg(p);
    TypePtr opt_i32 =
        SType::make_adt("Option", {SType::make_int(true, 32)});
    TypePtr list_opt = SType::make_adt("List", {opt_i32});

    std::vector<PatternPtr> full = {
        Pattern::ctor("Some", {Pattern::wildcard()}), Pattern::ctor("None", {})};
    CHECK(patterns_exhaustive(reg, full, opt_i32));

    std::vector<PatternPtr> partial = {
        Pattern::ctor("Some", {Pattern::wildcard()})};
    CHECK_FALSE(patterns_exhaustive(reg, partial, opt_i32));

    std::vector<PatternPtr> nested = {
        Pattern::ctor("Cons",
                      {Pattern::ctor("Some", {Pattern::wildcard()}),
                       Pattern::wildcard()}),
        Pattern::ctor("Nil", {})};
    CHECK_FALSE(patterns_exhaustive(reg, nested, list_opt));  // misses Cons None _

    nested.push_back(Pattern::ctor(
        "Cons", {Pattern::ctor("None", {}), Pattern::wildcard()}));
    CHECK(patterns_exhaustive(reg, nested, list_opt));

    std::vector<PatternPtr> wild = {Pattern::wildcard()};
    CHECK(patterns_exhaustive(reg, wild, list_opt));
}

TEST_CASE("contract programs typecheck with the statement sublanguage") {
    Program p = checked(
        "contract C()\n"
        "field n : Uint32 = Uint32 0\n"
        "field m : Map String Uint32 = Emp {String Uint32}\n"
        "transition T(k : String, v : Uint32)\n"
        "  old <- m[k];\n"
        "  match old with\n"
        "  | Some o => acc = builtin add o v; m[k] := acc;\n"
        "  | None => m[k] := v;\n"
        "  end\n"
        "  n := v;\n"
        "  send { _tag : \"Done\"; k : k };\n"
        "end\n"
        "end");
    REQUIRE(p.contract.has_value());
    CHECK_EQ(p.contract->fields.size(), 2);
    CHECK_EQ(p.contract->transitions.size(), 1);

    // state mutations must match the declared field type
    CHECK_FALSE(reject("contract C()\n"
                       "field n : Uint32 = Uint32 0\n"
                       "transition T()\n  n := Int32 1;\nend\nend")
                    .empty());
    // unknown field
    CHECK_FALSE(reject("contract C()\n"
                       "transition T()\n  x <- nope;\nend\nend")
                    .empty());
}
