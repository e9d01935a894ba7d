#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <random>

#include "minivella/builtins.hpp"
#include "minivella/runtime.hpp"

#include "doctest.h"

using namespace mv;
using nlohmann::ordered_json;

namespace {

struct ValGen {
    std::mt19937_64 rng;
    Program prog;
    AdtRegistry reg;

    explicit ValGen(uint64_t seed) : rng(seed), prog(), reg(make_reg()) {}

    AdtRegistry make_reg() {
        prog.adts = builtin_adts();
        return AdtRegistry(prog);
    }

    size_t pick(size_t n) { return rng() % n; }
    bool chance(int pct) { return (int)(rng() % 100) < pct; }

    TypePtr prim_type() {
        switch (pick(6)) {
            case 0: return SType::make_int(true, 32);
            case 1: return SType::make_int(false, 64);
            case 2: return SType::make_int(true, 256);
            case 3: return SType::make_string();
            case 4: return SType::make_bystr();
            default: return SType::make_bystrx(20);
        }
    }

    TypePtr any_type(int depth) {
        if (depth <= 0 || chance(40)) return prim_type();
        switch (pick(5)) {
            case 0: return SType::make_adt("Option", {any_type(depth - 1)});
            case 1: return SType::make_adt("List", {any_type(depth - 1)});
            case 2:
                return SType::make_adt(
                    "Pair", {any_type(depth - 1), any_type(depth - 1)});
            case 3: return SType::make_adt("Bool", {});
            default:
                return SType::make_map(prim_type(), any_type(depth - 1));
        }
    }

    rt::RValPtr value(const TypePtr& t, int depth) {
        switch (t->kind) {
            case TyKind::Int: {
                // mostly small, sometimes extreme
                if (chance(15)) {
                    std::string nines((size_t)1 + pick(t->width / 4), '9');
                    if (t->is_signed && chance(50)) nines = "-" + nines;
                    auto w = rt::WideInt::from_decimal(t->is_signed, t->width,
                                                       nines);
                    if (w) return rt::RVal::make_int(*w);
                }
                int64_t v = (int64_t)pick(1000000);
                if (t->is_signed && chance(40)) v = -v;
                return rt::RVal::make_int(
                    rt::WideInt::make(t->is_signed, t->width, v));
            }
            case TyKind::String: {
                std::string s;
                for (size_t i = 0, n = pick(12); i < n; ++i) {
                    const char* alpha =
                        "abcXYZ019 _-\"\\\n\t";  // exercise JSON escaping
                    s += alpha[pick(16)];
                }
                return rt::RVal::make_str(s);
            }
            case TyKind::ByStr: {
                std::vector<uint8_t> b((size_t)pick(24));
                for (auto& x : b) x = (uint8_t)rng();
                return rt::RVal::make_bytes(std::move(b));
            }
            case TyKind::ByStrX: {
                std::vector<uint8_t> b((size_t)t->byte_len);
                for (auto& x : b) x = (uint8_t)rng();
                return rt::RVal::make_bytes(std::move(b));
            }
            case TyKind::Adt: {
                auto* d = reg.find_adt(t->name);
                REQUIRE(d);
                size_t tag = pick(d->ctors.size());
                // at the depth limit prefer a nullary constructor so the
                // recursion through Cons terminates
                if (depth <= 0)
                    for (size_t c = 0; c < d->ctors.size(); ++c)
                        if (d->ctors[c].field_types.empty()) {
                            tag = c;
                            break;
                        }
                auto& c = d->ctors[tag];
                std::vector<rt::RValPtr> fs;
                for (auto ft : c.field_types) {
                    ft = subst_tyvars(ft, d->ty_params, t->args);
                    fs.push_back(value(ft, depth - 1));
                }
                return rt::RVal::make_adt(c.name, (int)tag, std::move(fs));
            }
            case TyKind::Map: {
                rt::MapPtr m = rt::map_empty(t->a, t->b);
                for (size_t i = 0, n = pick(5); i < n; ++i)
                    m = rt::map_put(m, value(t->a, 0), value(t->b, depth - 1));
                return rt::RVal::make_map(m);
            }
            default:
                return rt::RVal::make_int(rt::WideInt::make(true, 32, 0));
        }
    }
};

}  // namespace

TEST_CASE("serialize / deserialize round-trips 500 random values") {
    ValGen g(0x5EED);
    for (int i = 0; i < 500; ++i) {
        TypePtr t = g.any_type(3);
        rt::RValPtr v = g.value(t, 3);
        ordered_json j1 = rt::serialize_value(g.reg, t, v);
        rt::RValPtr v2 = rt::deserialize_value(g.reg, t, j1);
        ordered_json j2 = rt::serialize_value(g.reg, t, v2);
        CHECK_EQ(j1.dump(), j2.dump());
    }
}

TEST_CASE("serialization is deterministic") {
    ValGen g1(42), g2(42);
    for (int i = 0; i < 50; ++i) {
        TypePtr t1 = g1.any_type(3), t2 = g2.any_type(3);
        ordered_json a = rt::serialize_value(g1.reg, t1, g1.value(t1, 3));
        ordered_json b = rt::serialize_value(g2.reg, t2, g2.value(t2, 3));
        CHECK_EQ(a.dump(), b.dump());
    }
}

TEST_CASE("maps serialize in canonical key order regardless of insertions") {
    ValGen g(7);
    TypePtr kt = SType::make_string();
    TypePtr vt = SType::make_int(false, 32);
    auto mk = [&](std::vector<std::pair<std::string, uint32_t>> kvs) {
        rt::MapPtr m = rt::map_empty(kt, vt);
        for (auto& [k, v] : kvs)
            m = rt::map_put(m, rt::RVal::make_str(k),
                            rt::RVal::make_int(rt::WideInt::make(false, 32, v)));
        return rt::RVal::make_map(m);
    };
    ordered_json a = rt::serialize_value(
        g.reg, SType::make_map(kt, vt),
        mk({{"zebra", 1}, {"apple", 2}, {"mango", 3}}));
    ordered_json b = rt::serialize_value(
        g.reg, SType::make_map(kt, vt),
        mk({{"mango", 3}, {"zebra", 1}, {"apple", 2}}));
    CHECK_EQ(a.dump(), b.dump());
    REQUIRE_EQ(a.size(), 3);
    CHECK_EQ(a[0]["key"], "apple");
    CHECK_EQ(a[1]["key"], "mango");
    CHECK_EQ(a[2]["key"], "zebra");

    // key order is by canonical key bytes, also for non-string keys
    ValGen h(8);
    for (int i = 0; i < 50; ++i) {
        TypePtr mt = SType::make_map(h.prim_type(), h.any_type(1));
        rt::RValPtr v = h.value(mt, 2);
        ordered_json j = rt::serialize_value(h.reg, mt, v);
        std::vector<std::string> keys;
        for (auto& e : j) keys.push_back(e["key"].dump());
        CHECK(std::is_sorted(keys.begin(), keys.end()));
    }
}

TEST_CASE("map operations agree with a std::map oracle") {
    ValGen g(0xA11CE);
    TypePtr kt = SType::make_int(false, 64);
    TypePtr vt = SType::make_string();
    rt::MapPtr m = rt::map_empty(kt, vt);
    std::map<std::string, std::string> oracle;  // canonical key -> val string
    for (int i = 0; i < 2000; ++i) {
        rt::RValPtr k = rt::RVal::make_int(
            rt::WideInt::make(false, 64, (int64_t)g.pick(60)));
        std::string ck = rt::canonical_key(kt, k);
        switch (g.pick(4)) {
            case 0: {
                auto v = g.value(vt, 0);
                m = rt::map_put(m, k, v);
                oracle[ck] = v->s;
                break;
            }
            case 1:
                m = rt::map_remove(m, k);
                oracle.erase(ck);
                break;
            case 2: {
                auto got = rt::map_get(m, k);
                auto it = oracle.find(ck);
                REQUIRE_EQ(got.has_value(), it != oracle.end());
                if (got) CHECK_EQ((*got)->s, it->second);
                break;
            }
            default:
                CHECK_EQ(rt::map_contains(m, k), oracle.count(ck) == 1);
        }
        REQUIRE_EQ(m->entries.size(), oracle.size());
    }
}

TEST_CASE("golden JSON shapes") {
    ValGen g(1);
    TypePtr i32 = SType::make_int(true, 32);
    TypePtr li32 = SType::make_adt("List", {i32});

    rt::RValPtr nil = rt::RVal::make_adt("Nil", 1, {});
    rt::RValPtr cons = rt::RVal::make_adt(
        "Cons", 0, {rt::RVal::make_int(rt::WideInt::make(true, 32, 7)), nil});

    ordered_json j = rt::serialize_value(g.reg, li32, cons);
    CHECK_EQ(j.dump(),
             R"({"constructor":"Cons","argtypes":["Int32"],)"
             R"("arguments":["7",{"constructor":"Nil","argtypes":["Int32"],)"
             R"("arguments":[]}]})");

    // integers as decimal strings; bytes as lowercase 0x hex
    CHECK_EQ(rt::serialize_value(
                 g.reg, i32,
                 rt::RVal::make_int(rt::WideInt::make(true, 32, -5)))
                 .dump(),
             "\"-5\"");
    CHECK_EQ(rt::serialize_value(g.reg, SType::make_bystrx(3),
                                 rt::RVal::make_bytes({0xDE, 0xAD, 0x0F}))
                 .dump(),
             "\"0xdead0f\"");
}

TEST_CASE("hex encoding round-trips") {
    CHECK_EQ(rt::bytes_to_hex({}), "0x");
    CHECK_EQ(rt::bytes_to_hex({0x00, 0xFF}), "0x00ff");
    auto b = rt::hex_to_bytes("0x00ff");
    REQUIRE(b.has_value());
    CHECK_EQ(*b, std::vector<uint8_t>({0x00, 0xFF}));
    CHECK_FALSE(rt::hex_to_bytes("00ff").has_value());   // missing prefix
    CHECK_FALSE(rt::hex_to_bytes("0x0").has_value());    // odd length
    CHECK_FALSE(rt::hex_to_bytes("0xzz").has_value());   // bad digit
}

TEST_CASE("state and message JSON round-trips") {
    ValGen g(99);
    TypePtr u32 = SType::make_int(false, 32);
    TypePtr mt = SType::make_map(SType::make_string(), u32);

    rt::StateStore st;
    st.fields.push_back(
        {"count", u32, rt::RVal::make_int(rt::WideInt::make(false, 32, 5))});
    rt::MapPtr m = rt::map_empty(mt->a, mt->b);
    m = rt::map_put(m, rt::RVal::make_str("a"),
                    rt::RVal::make_int(rt::WideInt::make(false, 32, 1)));
    st.fields.push_back({"tally", mt, rt::RVal::make_map(m)});

    ordered_json j = rt::state_to_json(g.reg, st);
    REQUIRE_EQ(j["fields"].size(), 2);
    CHECK_EQ(j["fields"][0]["vname"], "count");
    CHECK_EQ(j["fields"][0]["type"], "Uint32");
    CHECK_EQ(j["fields"][0]["value"], "5");

    rt::StateStore st2 = rt::state_from_json(
        g.reg, j, {{"count", u32}, {"tally", mt}});
    CHECK_EQ(rt::state_to_json(g.reg, st2).dump(), j.dump());

    nlohmann::json mj = {
        {"_tag", "Donate"},
        {"params",
         {{{"vname", "amount"}, {"type", "Uint32"}, {"value", "12"}}}}};
    rt::Incoming in = rt::message_from_json(g.reg, mj);
    CHECK_EQ(in.tag, "Donate");
    REQUIRE_EQ(in.params.size(), 1);
    CHECK_EQ(in.params[0].name, "amount");
    CHECK_EQ(in.params[0].value->i.to_decimal(), "12");
}
