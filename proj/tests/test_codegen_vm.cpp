#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "minivella/pipeline.hpp"
#include "minivella/vm.hpp"

#include "doctest.h"

using namespace mv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "cannot open ", p.string());
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

tgt::TargetModule compile_src(const std::string& src) {
    Program p = pipeline::frontend(src);
    return pipeline::compile(p);
}

const char* kMyListSrc =
    "type MyList =\n"
    "  | Nil\n"
    "  | Cons of Int32 MyList\n"
    "let l = Cons (Int32 7) (Cons (Int32 8) Nil) in\n"
    "match l with\n"
    "| Cons h t => h\n"
    "| Nil => Int32 0\n"
    "end";

const tgt::TypeDescriptor* find_adt_td(const tgt::TargetModule& m,
                                       const std::string& name) {
    for (auto& d : m.tds)
        if (d.kind == tgt::TypeDescriptor::Kind::Adt && d.adt_name == name)
            return &d;
    return nullptr;
}

}  // namespace

TEST_CASE("recursive ADT lowers to descriptors for Int32 and itself") {
    tgt::TargetModule m = compile_src(kMyListSrc);
    const tgt::TypeDescriptor* ml = find_adt_td(m, "MyList");
    REQUIRE(ml);
    int ml_idx = (int)(ml - m.tds.data());
    REQUIRE_EQ(ml->ctors.size(), 2);

    CHECK_EQ(ml->ctors[0].name, "Nil");
    CHECK_EQ(ml->ctors[0].tag, 0);
    CHECK(ml->ctors[0].field_tds.empty());
    CHECK_EQ(ml->ctors[0].cell_size, 1);  // just the tag byte

    CHECK_EQ(ml->ctors[1].name, "Cons");
    CHECK_EQ(ml->ctors[1].tag, 1);
    REQUIRE_EQ(ml->ctors[1].field_tds.size(), 2);
    const tgt::TypeDescriptor& f0 = m.tds[ml->ctors[1].field_tds[0]];
    CHECK_EQ(f0.kind, tgt::TypeDescriptor::Kind::Int);
    CHECK(f0.is_signed);
    CHECK_EQ(f0.width, 32);
    CHECK_EQ(ml->ctors[1].field_tds[1], ml_idx);  // recursive reference
}

TEST_CASE("packed cell layout: 1 tag byte + packed fields") {
    tgt::TargetModule m = compile_src(kMyListSrc);
    const tgt::TypeDescriptor* ml = find_adt_td(m, "MyList");
    REQUIRE(ml);
    // Cons = tag(1) + Int32(4) + pointer(8), packed
    CHECK_EQ(ml->ctors[1].cell_size, 13);
    CHECK_EQ(ml->ctors[1].offsets, std::vector<int>({1, 5}));
}

TEST_CASE("value layouts under the fixed reference model") {
    auto l_i32 = tgt::layout_of(SType::make_int(true, 32));
    CHECK_FALSE(l_i32.boxed);
    CHECK_EQ(l_i32.inline_size, 4);
    CHECK_FALSE(l_i32.by_ref);

    auto l_i256 = tgt::layout_of(SType::make_int(false, 256));
    CHECK_EQ(l_i256.inline_size, 32);
    CHECK(l_i256.by_ref);  // larger than two eightbytes

    auto l_b20 = tgt::layout_of(SType::make_bystrx(20));
    CHECK_EQ(l_b20.inline_size, 20);
    CHECK(l_b20.by_ref);

    auto l_b16 = tgt::layout_of(SType::make_bystrx(16));
    CHECK_EQ(l_b16.inline_size, 16);
    CHECK_FALSE(l_b16.by_ref);

    auto l_fun =
        tgt::layout_of(SType::make_fun(SType::make_int(true, 32),
                                       SType::make_int(true, 32)));
    CHECK_EQ(l_fun.inline_size, 16);  // (code id, env reference)

    auto l_adt = tgt::layout_of(SType::make_adt("Bool", {}));
    CHECK(l_adt.boxed);
    CHECK_EQ(l_adt.inline_size, 8);
}

TEST_CASE("instrumented VM observes 13-byte Cons cells") {
    tgt::TargetModule m = compile_src(kMyListSrc);
    vm::Machine mach(m, rt::Limits{});
    mach.arena().record_cells = true;
    mach.init();
    rt::RValPtr r = mach.run_main();
    REQUIRE(r);
    CHECK_EQ(r->i.to_decimal(), "7");
    // two Cons allocations of exactly 13 bytes, one Nil of 1 byte
    std::vector<uint32_t> cells = mach.arena().cell_sizes;
    std::sort(cells.begin(), cells.end());
    CHECK_EQ(cells, std::vector<uint32_t>({1, 13, 13}));
}

TEST_CASE("wide results are returned through a caller slot (sret)") {
    tgt::TargetModule m = compile_src(
        "let f = fun (x : Uint256) => builtin add x x in f (Uint256 21)");
    bool saw_sret = false;
    for (auto& f : m.funcs)
        if (f.ret_td >= 0 &&
            m.tds[f.ret_td].kind == tgt::TypeDescriptor::Kind::Int &&
            m.tds[f.ret_td].width == 256) {
            CHECK(f.sret);
            saw_sret = true;
        }
    CHECK(saw_sret);

    // narrow results are not
    tgt::TargetModule n = compile_src(
        "let f = fun (x : Int32) => builtin add x x in f (Int32 21)");
    for (auto& f : n.funcs)
        if (f.ret_td >= 0 &&
            m.tds[f.ret_td].kind == tgt::TypeDescriptor::Kind::Int &&
            n.tds[f.ret_td].width == 32)
            CHECK_FALSE(f.sret);
}

TEST_CASE("flat matches lower to a tag switch with field loads") {
    tgt::TargetModule m = compile_src(kMyListSrc);
    bool saw_switch = false, saw_getfield = false;
    for (auto& f : m.funcs)
        for (auto& b : f.blocks) {
            if (b.term == tgt::TBlock::Term::Switch) {
                saw_switch = true;
                for (auto& [tag, blk] : b.cases) {
                    CHECK_GE(tag, 0);
                    CHECK_LT(blk, (int)f.blocks.size());
                }
            }
            for (auto& ins : b.instrs)
                if (ins.op == tgt::Op::GetField) {
                    saw_getfield = true;
                    CHECK_GE(ins.index, 0);
                    CHECK_GE(ins.adt_td, 0);
                }
        }
    CHECK(saw_switch);
    CHECK(saw_getfield);
}

TEST_CASE("module text round-trips and is deterministic") {
    for (auto& e : fs::directory_iterator(fs::path(MV_SOURCE_DIR) / "tests" /
                                          "corpus")) {
        if (e.path().extension() != ".mvexp" && e.path().extension() != ".mv")
            continue;
        CAPTURE(e.path().string());
        Program p1 = pipeline::frontend(slurp(e.path()));
        tgt::TargetModule m1 = pipeline::compile(p1);
        std::string t1 = tgt::emit_text(m1);

        // compiling the same source again gives byte-identical text
        Program p2 = pipeline::frontend(slurp(e.path()));
        CHECK_EQ(tgt::emit_text(pipeline::compile(p2)), t1);

        // parse(emit) emits the same text
        tgt::TargetModule m2 = tgt::parse_text(t1);
        CHECK_EQ(tgt::emit_text(m2), t1);

        // and the verifier accepts both
        CHECK_EQ(tgt::verify(m1), std::vector<std::string>{});
        CHECK_EQ(tgt::verify(m2), std::vector<std::string>{});
    }
}

TEST_CASE("a parsed .mvir module still runs") {
    tgt::TargetModule m = tgt::parse_text(tgt::emit_text(compile_src(
        "let x = Uint64 40 in builtin add x (Uint64 2)")));
    vm::Machine mach(m, rt::Limits{});
    mach.init();
    CHECK_EQ(mach.run_main()->i.to_decimal(), "42");
}
