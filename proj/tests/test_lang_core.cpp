#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <boost/multiprecision/cpp_int.hpp>

#include <random>

#include "minivella/ast.hpp"
#include "minivella/parser.hpp"
#include "minivella/wideint.hpp"

#include "doctest.h"

using namespace mv;
using boost::multiprecision::cpp_int;

namespace {

cpp_int min_of(bool is_signed, int width) {
    if (!is_signed) return 0;
    return -(cpp_int(1) << (width - 1));
}

cpp_int max_of(bool is_signed, int width) {
    if (is_signed) return (cpp_int(1) << (width - 1)) - 1;
    return (cpp_int(1) << width) - 1;
}

rt::WideInt wi_of(bool is_signed, int width, const cpp_int& v) {
    auto w = rt::WideInt::from_decimal(is_signed, width, v.str());
    REQUIRE(w.has_value());
    return *w;
}

// oracle result: value, or nullopt when the operation must fail
enum class Fail { No, Overflow, DivZero };

std::pair<cpp_int, Fail> oracle(char op, bool is_signed, int width,
                                const cpp_int& a, const cpp_int& b) {
    cpp_int r;
    switch (op) {
        case '+': r = a + b; break;
        case '-': r = a - b; break;
        case '*': r = a * b; break;
        case '/':
            if (b == 0) return {0, Fail::DivZero};
            r = a / b;  // cpp_int divides truncating toward zero
            break;
        case '%':
            if (b == 0) return {0, Fail::DivZero};
            r = a % b;
            break;
    }
    if (r < min_of(is_signed, width) || r > max_of(is_signed, width))
        return {0, Fail::Overflow};
    return {r, Fail::No};
}

void check_one(char op, bool is_signed, int width, const cpp_int& a,
               const cpp_int& b) {
    rt::WideInt wa = wi_of(is_signed, width, a);
    rt::WideInt wb = wi_of(is_signed, width, b);
    auto [want, fail] = oracle(op, is_signed, width, a, b);
    auto apply = [&]() {
        switch (op) {
            case '+': return rt::wi_add(wa, wb);
            case '-': return rt::wi_sub(wa, wb);
            case '*': return rt::wi_mul(wa, wb);
            case '/': return rt::wi_div(wa, wb);
            default: return rt::wi_rem(wa, wb);
        }
    };
    if (fail == Fail::No) {
        rt::WideInt r = apply();
        CHECK_EQ(r.to_decimal(), want.str());
    } else {
        RtErrorKind want_kind = fail == Fail::Overflow
                                    ? RtErrorKind::Overflow
                                    : RtErrorKind::DivByZero;
        bool threw = false;
        try {
            apply();
        } catch (const RtError& e) {
            threw = true;
            CHECK_EQ((int)e.kind, (int)want_kind);
        }
        CHECK_MESSAGE(threw, "expected failure for ", a.str(), (char)op,
                      b.str());
    }
}

cpp_int rand_in_range(std::mt19937_64& rng, bool is_signed, int width) {
    // random bit-length so small and near-boundary magnitudes both appear
    int bits = 1 + (int)(rng() % width);
    cpp_int v = 0;
    for (int i = 0; i < bits; i += 32) v = (v << 32) | (uint32_t)rng();
    v &= (cpp_int(1) << bits) - 1;
    cpp_int lo = min_of(is_signed, width), hi = max_of(is_signed, width);
    if (is_signed && (rng() & 1)) v = -v;
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    return v;
}

}  // namespace

TEST_CASE("checked arithmetic matches the big-integer oracle") {
    std::mt19937_64 rng(0xC0FFEE);
    const char ops[] = {'+', '-', '*', '/', '%'};
    for (char op : ops) {
        for (bool is_signed : {true, false}) {
            for (int width : {32, 64, 128, 256}) {
                for (int i = 0; i < 1000; ++i) {
                    cpp_int a = rand_in_range(rng, is_signed, width);
                    cpp_int b = rand_in_range(rng, is_signed, width);
                    if (i % 7 == 0) b = 0;  // keep the zero cases frequent
                    if (i % 11 == 0) a = max_of(is_signed, width);
                    if (i % 13 == 0) b = min_of(is_signed, width);
                    check_one(op, is_signed, width, a, b);
                }
            }
        }
    }
}

TEST_CASE("boundary overflow cases") {
    struct Case {
        char op;
        bool is_signed;
        int width;
        const char* a;
        const char* b;
    };
    // 16 cases, all of which must raise Overflow
    const Case cases[] = {
        {'+', true, 32, "2147483647", "1"},
        {'-', true, 32, "-2147483648", "1"},
        {'*', true, 32, "-2147483648", "-1"},
        {'/', true, 32, "-2147483648", "-1"},
        {'+', false, 32, "4294967295", "1"},
        {'-', false, 32, "0", "1"},
        {'+', true, 64, "9223372036854775807", "1"},
        {'/', true, 64, "-9223372036854775808", "-1"},
        {'*', false, 64, "18446744073709551615", "2"},
        {'-', false, 64, "0", "18446744073709551615"},
        {'+', true, 128, "170141183460469231731687303715884105727", "1"},
        {'/', true, 128, "-170141183460469231731687303715884105728", "-1"},
        {'-', false, 128, "0", "1"},
        {'*', true, 256,
         "57896044618658097711785492504343953926634992332820282019728792003956"
         "564819967",
         "2"},
        {'+', false, 256,
         "11579208923731619542357098500868790785326998466564056403945758400791"
         "3129639935",
         "1"},
        {'-', true, 256,
         "-5789604461865809771178549250434395392663499233282028201972879200395"
         "6564819968",
         "1"},
    };
    CHECK_EQ(std::size(cases), 16);
    for (auto& c : cases) {
        bool threw = false;
        try {
            check_one(c.op, c.is_signed, c.width, cpp_int(c.a), cpp_int(c.b));
        } catch (...) {
            threw = true;
        }
        CHECK_FALSE(threw);  // check_one asserts the Overflow itself
    }
}

TEST_CASE("decimal parse rejects out-of-range and malformed input") {
    CHECK_FALSE(rt::WideInt::from_decimal(true, 32, "2147483648").has_value());
    CHECK_FALSE(rt::WideInt::from_decimal(false, 32, "-1").has_value());
    CHECK_FALSE(rt::WideInt::from_decimal(true, 32, "12x").has_value());
    CHECK(rt::WideInt::from_decimal(true, 32, "-2147483648").has_value());
    CHECK_EQ(rt::WideInt::from_decimal(true, 32, "-2147483648")->to_decimal(),
             "-2147483648");
}

TEST_CASE("alpha equality of types") {
    TypePtr t1 = SType::make_forall(
        "A", SType::make_fun(SType::make_tyvar("A"), SType::make_tyvar("A")));
    TypePtr t2 = SType::make_forall(
        "B", SType::make_fun(SType::make_tyvar("B"), SType::make_tyvar("B")));
    CHECK(alpha_equal(t1, t2));
    CHECK_FALSE(
        alpha_equal(SType::make_int(true, 32), SType::make_int(false, 32)));
    TypePtr t3 = SType::make_forall(
        "A",
        SType::make_fun(SType::make_tyvar("A"), SType::make_int(true, 32)));
    TypePtr t4 = SType::make_forall(
        "A",
        SType::make_fun(SType::make_int(true, 32), SType::make_tyvar("A")));
    CHECK_FALSE(alpha_equal(t3, t4));
}

TEST_CASE("fresh_name is deterministic and avoids the used set") {
    CHECK_EQ(fresh_name("x", {}), "x");
    CHECK_EQ(fresh_name("x", {"x"}), "x_1");
    CHECK_EQ(fresh_name("x", {"x", "x_1"}), "x_2");
}

TEST_CASE("free variables") {
    auto fv = [](const char* src) {
        auto e = parse_expr_string(src);
        REQUIRE(e.has_value());
        return free_vars(*e);
    };
    CHECK_EQ(fv("fun (x : Int32) => x"), std::set<std::string>{});
    CHECK_EQ(fv("fun (x : Int32) => y"), std::set<std::string>{"y"});
    // nested-pattern match: only z is free
    CHECK_EQ(fv("fun (p : List (Option Int32)) => match p with"
                " | Nil => z"
                " | Cons (Some x) xs => x"
                " | Cons _ _ => z"
                " end"),
             std::set<std::string>{"z"});
}

TEST_CASE("pretty-print / parse round-trip") {
    const char* srcs[] = {
        "Int32 42",
        "let x = Uint64 7 in builtin add x x",
        "fun (x : Int32) => builtin mul x (Int32 2)",
        "tfun 'A => fun (x : 'A) => x",
        "match b with | True => Int32 1 | False => Int32 0 end",
        "Cons {Int32} (Int32 1) (Nil {Int32})",
    };
    for (const char* s : srcs) {
        auto e1 = parse_expr_string(s);
        REQUIRE(e1.has_value());
        auto e2 = parse_expr_string(pretty_print(*e1));
        REQUIRE(e2.has_value());
        CHECK(expr_equal(*e1, *e2));
    }
}

TEST_CASE("constructor tags follow declaration order") {
    auto pr = parse_program("type MyList =\n"
                            "  | Nil\n"
                            "  | Cons of Int32 MyList\n\n"
                            "let x = Int32 0 in x");
    REQUIRE(pr.ok());
    const ADTDecl& d = pr.program->adts.back();
    CHECK_EQ(d.name, "MyList");
    REQUIRE_EQ(d.ctors.size(), 2);
    CHECK_EQ(d.ctors[0].name, "Nil");
    CHECK_EQ(d.ctors[0].field_types.size(), 0);
    CHECK_EQ(d.ctors[1].name, "Cons");
    REQUIRE_EQ(d.ctors[1].field_types.size(), 2);
    CHECK_EQ(show_type(d.ctors[1].field_types[0]), "Int32");
    CHECK_EQ(show_type(d.ctors[1].field_types[1]), "MyList");
}
