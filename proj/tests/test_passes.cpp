#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <functional>

#include "minivella/closured.hpp"
#include "minivella/passes.hpp"
#include "minivella/pipeline.hpp"
#include "minivella/typecheck.hpp"

#include "doctest.h"
#include "gen_random.hpp"

using namespace mv;
namespace fs = std::filesystem;

namespace {

Program front(const std::string& src) { return pipeline::frontend(src); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "cannot open ", p.string());
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

std::vector<fs::path> corpus_sources() {
    std::vector<fs::path> out;
    for (auto& e : fs::directory_iterator(fs::path(MV_SOURCE_DIR) / "tests" /
                                          "corpus")) {
        auto ext = e.path().extension();
        if (ext == ".mvexp" || ext == ".mv") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    REQUIRE_GE(out.size(), 30);
    return out;
}

Program gen_checked(uint64_t seed) {
    mvtest::Gen g(seed);
    Program p = g.gen_program();
    auto tr = typecheck(p);
    REQUIRE_MESSAGE(tr.ok, "generated program does not typecheck (seed ", seed,
                    "): ", tr.diags.empty() ? "" : tr.diags[0].message);
    return p;
}

// run the pipeline up to and including monomorphize, asserting the invariant
// introduced by each pass right after it runs
void run_passes_checked(Program& p) {
    passes::uniquify(p);
    passes::eliminate_dead_code(p);
    passes::flatten_matches(p);
    CHECK(passes::all_patterns_flat(p));
    passes::uncurry(p);
    CHECK(passes::calls_arity_consistent(p));
    CHECK(passes::all_patterns_flat(p));  // preserved
    passes::monomorphize(p);
    CHECK(passes::no_type_vars(p));
    CHECK(passes::all_patterns_flat(p));
    CHECK(passes::calls_arity_consistent(p));
}

}  // namespace

TEST_CASE("flatten_matches leaves only flat patterns and is idempotent") {
    Program p = front(slurp(fs::path(MV_SOURCE_DIR) / "tests" / "corpus" /
                            "06_option_nested.mvexp"));
    passes::uniquify(p);
    CHECK_FALSE(passes::all_patterns_flat(p));
    passes::flatten_matches(p);
    CHECK(passes::all_patterns_flat(p));
    std::string once = pretty_print_program(p);
    passes::flatten_matches(p);
    CHECK_EQ(pretty_print_program(p), once);
}

TEST_CASE("dead code elimination drops unreachable library definitions") {
    Program p = front("let used = Int32 1 in\n"
                      "let dead = Int32 2 in\n"
                      "builtin add used used");
    // unused let of a pure expression disappears
    passes::uniquify(p);
    passes::eliminate_dead_code(p);
    CHECK(pretty_print_program(p).find("dead") == std::string::npos);

    // a binding that can raise must survive even when unused
    Program q = front("let boom = builtin div (Int32 1) (Int32 0) in Int32 7");
    passes::uniquify(q);
    passes::eliminate_dead_code(q);
    CHECK(pretty_print_program(q).find("boom") != std::string::npos);
}

TEST_CASE("uncurry collapses saturated curried applications") {
    Program p = front(
        "let add3 = fun (a : Int32) => fun (b : Int32) => fun (c : Int32) =>\n"
        "  let t = builtin add a b in builtin add t c in\n"
        "add3 (Int32 1) (Int32 2) (Int32 3)");
    passes::uniquify(p);
    passes::eliminate_dead_code(p);
    passes::flatten_matches(p);
    passes::uncurry(p);
    CHECK(passes::calls_arity_consistent(p));
    // the single consistent call site gives a 3-ary function
    bool saw_3ary = false;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
        if (!e) return;
        if (e->kind == ExprKind::NAryFun && e->params.size() == 3)
            saw_3ary = true;
        walk(e->a);
        walk(e->b);
        for (auto& a : e->args) walk(a);
        for (auto& arm : e->arms) walk(arm.body);
        for (auto& f : e->fields) walk(f.value);
    };
    walk(p.main);
    CHECK(saw_3ary);
}

TEST_CASE("monomorphize specializes one polymorphic function at two types") {
    Program p = front(
        "let first = tfun 'A => fun (l : List 'A) => fun (d : 'A) =>\n"
        "  match l with | Cons h t => h | Nil => d end in\n"
        "let fi = @first Int32 in\n"
        "let fs = @first String in\n"
        "let li = Cons {Int32} (Int32 41) (Nil {Int32}) in\n"
        "let ls = Cons {String} \"hi\" (Nil {String}) in\n"
        "let a = fi li (Int32 0) in\n"
        "let b = fs ls \"no\" in\n"
        "let n = builtin strlen b in\n"
        "let m = builtin add a (Int32 1) in\n"
        "builtin to_string m");
    nlohmann::ordered_json before =
        pipeline::run_expr_interp(p, rt::Limits{});
    run_passes_checked(p);

    // both instantiations live in one dispatch table
    int tables = 0;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
        if (!e) return;
        if (e->kind == ExprKind::Dispatch && !e->entries.empty()) {
            ++tables;
            CHECK_EQ(e->entries.size(), 2);
            CHECK_EQ(show_type(e->entries[0].type), "Int32");
            CHECK_EQ(show_type(e->entries[1].type), "String");
        }
        walk(e->a);
        walk(e->b);
        for (auto& a : e->args) walk(a);
        for (auto& ent : e->entries) walk(ent.body);
        for (auto& arm : e->arms) walk(arm.body);
    };
    for (auto& d : p.defs) walk(d.value);
    walk(p.main);
    CHECK_EQ(tables, 1);

    // semantics preserved across the whole pass sequence
    CHECK_EQ(pipeline::run_expr_interp(p, rt::Limits{}).dump(), before.dump());
    CHECK_EQ(before["result"], "42");
}

TEST_CASE("closure conversion leaves no residual free variables") {
    Program p = front(
        "let make = fun (n : Int32) => fun (m : Int32) => builtin add n m in\n"
        "let add5 = make (Int32 5) in\n"
        "add5 (Int32 37)");
    run_passes_checked(p);
    cc::ClosuredProgram cp = cc::closure_convert(p);
    CHECK(cc::no_residual_free_vars(cp));
    // the partial application forces at least one captured environment
    bool captures = false;
    for (auto& f : cp.funcs) captures = captures || !f.env.empty();
    CHECK(captures);
}

TEST_CASE("pass invariants hold across the hand-written corpus") {
    for (auto& path : corpus_sources()) {
        CAPTURE(path.string());
        Program p = front(slurp(path));
        run_passes_checked(p);
        cc::ClosuredProgram cp = cc::closure_convert(p);
        CHECK(cc::no_residual_free_vars(cp));
    }
}

TEST_CASE("pass invariants and semantics hold on random programs") {
    const int kCount = 200;
    for (int i = 0; i < kCount; ++i) {
        uint64_t seed = 0xBADA55 + i;
        CAPTURE(seed);
        Program p = gen_checked(seed);
        nlohmann::ordered_json before =
            pipeline::run_expr_interp(p, rt::Limits{});
        run_passes_checked(p);
        cc::ClosuredProgram cp = cc::closure_convert(p);
        CHECK(cc::no_residual_free_vars(cp));
        // the transformed program still means the same thing
        nlohmann::ordered_json after =
            pipeline::run_expr_interp(p, rt::Limits{});
        CHECK_EQ(after.dump(), before.dump());
    }
}
