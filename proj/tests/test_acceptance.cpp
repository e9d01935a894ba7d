// Acceptance gate: one pass/fail line per criterion, non-zero exit on any
// failure. Run by ctest alongside the unit suites.
#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "minivella/closured.hpp"
#include "minivella/passes.hpp"
#include "minivella/pipeline.hpp"
#include "minivella/typecheck.hpp"
#include "minivella/vm.hpp"

#include "gen_random.hpp"

using namespace mv;
namespace fs = std::filesystem;
using boost::multiprecision::cpp_int;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int n, bool ok, const std::string& desc,
            const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion-" << n << ": " << desc;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in.good()) throw std::runtime_error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

fs::path src_dir() { return fs::path(MV_SOURCE_DIR); }

double median_ms(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
}

template <class F>
double time_ms(F&& f) {
    auto t0 = Clock::now();
    f();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0)
        .count();
}

// ---- criterion 1: differential interp vs VM ------------------------------

void criterion_differential() {
    int corpus = 0, random = 0;
    std::string detail;
    bool ok = true;
    try {
        std::vector<fs::path> files;
        for (auto& e : fs::directory_iterator(src_dir() / "tests" / "corpus"))
            if (e.path().extension() == ".mvexp" ||
                e.path().extension() == ".mv")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files) {
            Program p = pipeline::frontend(slurp(f));
            tgt::TargetModule m = pipeline::compile(p);
            std::string a, b;
            if (f.extension() == ".mvexp") {
                a = pipeline::run_expr_interp(p, rt::Limits{}).dump();
                b = pipeline::run_expr_vm(m, rt::Limits{}).dump();
            } else {
                fs::path base = f;
                base.replace_extension("");
                nlohmann::json msg = nlohmann::json::parse(
                    slurp(base.string() + ".message.json"));
                std::optional<nlohmann::json> st;
                if (fs::exists(base.string() + ".state.json"))
                    st = nlohmann::json::parse(
                        slurp(base.string() + ".state.json"));
                const nlohmann::json* stp = st ? &*st : nullptr;
                a = pipeline::run_contract_interp(p, stp, msg, rt::Limits{})
                        .dump();
                b = pipeline::run_contract_vm(m, stp, msg, rt::Limits{})
                        .dump();
            }
            if (a != b) {
                ok = false;
                detail = "mismatch on " + f.filename().string();
                break;
            }
            ++corpus;
        }
        for (int i = 0; ok && i < 200; ++i) {
            mvtest::Gen g(0xD1FF + i);
            Program p = g.gen_program();
            auto tr = typecheck(p);
            if (!tr.ok) {
                ok = false;
                detail = "random program failed typecheck, seed " +
                         std::to_string(0xD1FF + i);
                break;
            }
            std::string a = pipeline::run_expr_interp(p, rt::Limits{}).dump();
            tgt::TargetModule m = pipeline::compile(p);
            std::string b = pipeline::run_expr_vm(m, rt::Limits{}).dump();
            if (a != b) {
                ok = false;
                detail = "mismatch on random seed " + std::to_string(0xD1FF + i);
                break;
            }
            ++random;
        }
        if (ok && corpus < 30) {
            ok = false;
            detail = "only " + std::to_string(corpus) + " corpus programs";
        }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    if (ok)
        detail = std::to_string(corpus) + " corpus + " +
                 std::to_string(random) + " random programs byte-identical";
    report(1, ok,
           "interpreter and VM produce byte-identical output on the corpus "
           "and 200 random programs",
           detail);
}

// ---- criteria 2/3: benchmarks --------------------------------------------

struct BenchOut {
    bool ok = false;
    std::string result;
    double interp_ms = 0, vm_ms = 0;
    std::string err;
};

BenchOut bench_expr(const fs::path& file, int reps) {
    BenchOut out;
    try {
        Program p = pipeline::frontend(slurp(file));
        tgt::TargetModule m = pipeline::compile(p);
        std::string a, b;
        std::vector<double> ti, tv;
        for (int i = 0; i < reps; ++i) {
            ti.push_back(time_ms([&] {
                a = pipeline::run_expr_interp(p, rt::Limits{}).dump();
            }));
            tv.push_back(time_ms(
                [&] { b = pipeline::run_expr_vm(m, rt::Limits{}).dump(); }));
        }
        if (a != b) {
            out.err = "engine outputs differ";
            return out;
        }
        out.result = a;
        out.interp_ms = median_ms(ti);
        out.vm_ms = median_ms(tv);
        out.ok = true;
    } catch (const std::exception& e) {
        out.err = e.what();
    }
    return out;
}

void criterion_ackermann() {
    // independent oracle: ack(3, n) = 2^(n+3) - 3
    cpp_int expect = (cpp_int(1) << (7 + 3)) - 3;
    BenchOut b = bench_expr(src_dir() / "bench" / "ackermann.mvexp", 5);
    bool ok = b.ok && b.result == "{\"result\":\"" + expect.str() + "\"}" &&
              b.vm_ms * 5 <= b.interp_ms;
    char buf[160];
    snprintf(buf, sizeof buf, "result %s, interp %.1fms, vm %.1fms (%.1fx)",
             b.ok ? b.result.c_str() : b.err.c_str(), b.interp_ms, b.vm_ms,
             b.vm_ms > 0 ? b.interp_ms / b.vm_ms : 0.0);
    report(2, ok, "ackermann(3,7) = 1021 with the VM at least 5x faster",
           buf);
}

void criterion_church() {
    BenchOut b = bench_expr(src_dir() / "bench" / "church.mvexp", 5);
    bool dispatch_used = false;
    try {
        tgt::TargetModule m = pipeline::compile(
            pipeline::frontend(slurp(src_dir() / "bench" / "church.mvexp")));
        for (auto& t : m.tables) dispatch_used |= !t.entries.empty();
    } catch (...) {
    }
    bool ok = b.ok && b.result == "{\"result\":\"131099\"}" &&
              b.vm_ms * 5 <= b.interp_ms && dispatch_used;
    char buf[160];
    snprintf(buf, sizeof buf,
             "result %s, interp %.1fms, vm %.1fms (%.1fx), dispatch %s",
             b.ok ? b.result.c_str() : b.err.c_str(), b.interp_ms, b.vm_ms,
             b.vm_ms > 0 ? b.interp_ms / b.vm_ms : 0.0,
             dispatch_used ? "yes" : "no");
    report(3, ok,
           "Church-numeral arithmetic over Uint32 = 131099 with at least 5x "
           "speedup through dispatch tables",
           buf);
}

// ---- criterion 4: contract end-to-end ------------------------------------

void criterion_contract() {
    bool ok = true;
    std::string detail;
    try {
        fs::path dir = src_dir() / "bench";
        Program p = pipeline::frontend(slurp(dir / "simple-map.mv"));
        tgt::TargetModule m = pipeline::compile(p);
        nlohmann::json st =
            nlohmann::json::parse(slurp(dir / "simple-map.state.json"));
        nlohmann::json msg =
            nlohmann::json::parse(slurp(dir / "simple-map.message.json"));
        std::string a, b;
        std::vector<double> ti, tv;
        for (int i = 0; i < 200; ++i) {
            ti.push_back(time_ms([&] {
                a = pipeline::run_contract_interp(p, &st, msg, rt::Limits{})
                        .dump();
            }));
            tv.push_back(time_ms([&] {
                b = pipeline::run_contract_vm(m, &st, msg, rt::Limits{})
                        .dump();
            }));
        }
        double im = median_ms(ti), vm_ = median_ms(tv);
        ok = a == b && !a.empty() && a.find("\"error\"") == std::string::npos &&
             vm_ <= im;
        char buf[120];
        snprintf(buf, sizeof buf, "outputs %s, interp %.3fms, vm %.3fms",
                 a == b ? "identical" : "DIFFER", im, vm_);
        detail = buf;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(4, ok,
           "Simple-Map contract runs end-to-end from state JSON with the "
           "compiled path at least as fast as the interpreter",
           detail);
}

// ---- criterion 5: pass invariants ----------------------------------------

void criterion_invariants() {
    bool ok = true;
    std::string detail;
    int count = 0;
    try {
        auto check_one = [&](Program& p, const std::string& what) {
            passes::uniquify(p);
            passes::eliminate_dead_code(p);
            passes::flatten_matches(p);
            if (!passes::all_patterns_flat(p))
                throw std::runtime_error("non-flat pattern in " + what);
            passes::uncurry(p);
            if (!passes::calls_arity_consistent(p))
                throw std::runtime_error("call arity mismatch in " + what);
            passes::monomorphize(p);
            if (!passes::no_type_vars(p))
                throw std::runtime_error("residual type variable in " + what);
            cc::ClosuredProgram cp = cc::closure_convert(p);
            if (!cc::no_residual_free_vars(cp))
                throw std::runtime_error("residual free variable in " + what);
            ++count;
        };
        for (auto& e : fs::directory_iterator(src_dir() / "tests" / "corpus"))
            if (e.path().extension() == ".mvexp" ||
                e.path().extension() == ".mv") {
                Program p = pipeline::frontend(slurp(e.path()));
                check_one(p, e.path().filename().string());
            }
        for (int i = 0; i < 200; ++i) {
            mvtest::Gen g(0x1A4 + i);
            Program p = g.gen_program();
            auto tr = typecheck(p);
            if (!tr.ok) throw std::runtime_error("random program ill-typed");
            check_one(p, "random seed " + std::to_string(0x1A4 + i));
        }
        detail = std::to_string(count) + " programs";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(5, ok,
           "flat-pattern, call-arity, no-type-variable and no-free-variable "
           "invariants hold mechanically across the corpus",
           detail);
}

// ---- criterion 6: integer oracle -----------------------------------------

cpp_int min_of(bool s, int w) {
    return s ? -(cpp_int(1) << (w - 1)) : cpp_int(0);
}
cpp_int max_of(bool s, int w) {
    return s ? (cpp_int(1) << (w - 1)) - 1 : (cpp_int(1) << w) - 1;
}

void criterion_integers() {
    bool ok = true;
    std::string detail;
    long checked = 0;
    std::mt19937_64 rng(0x5CA1E);
    auto rand_val = [&](bool s, int w) {
        int bits = 1 + (int)(rng() % w);
        cpp_int v = 0;
        for (int i = 0; i < bits; i += 32) v = (v << 32) | (uint32_t)rng();
        v &= (cpp_int(1) << bits) - 1;
        if (s && (rng() & 1)) v = -v;
        if (v < min_of(s, w)) v = min_of(s, w);
        if (v > max_of(s, w)) v = max_of(s, w);
        return v;
    };
    auto one = [&](char op, bool s, int w, const cpp_int& a,
                   const cpp_int& b) {
        auto wa = rt::WideInt::from_decimal(s, w, a.str());
        auto wb = rt::WideInt::from_decimal(s, w, b.str());
        if (!wa || !wb) throw std::runtime_error("oracle operand parse");
        cpp_int want;
        bool div0 = (op == '/' || op == '%') && b == 0;
        switch (op) {
            case '+': want = a + b; break;
            case '-': want = a - b; break;
            case '*': want = a * b; break;
            case '/': want = div0 ? cpp_int(0) : cpp_int(a / b); break;
            default: want = div0 ? cpp_int(0) : cpp_int(a % b); break;
        }
        bool over = !div0 && (want < min_of(s, w) || want > max_of(s, w));
        try {
            rt::WideInt r;
            switch (op) {
                case '+': r = rt::wi_add(*wa, *wb); break;
                case '-': r = rt::wi_sub(*wa, *wb); break;
                case '*': r = rt::wi_mul(*wa, *wb); break;
                case '/': r = rt::wi_div(*wa, *wb); break;
                default: r = rt::wi_rem(*wa, *wb); break;
            }
            if (div0 || over || r.to_decimal() != want.str())
                throw std::runtime_error("wrong result");
        } catch (const RtError& e) {
            bool expect_throw =
                div0 ? e.kind == RtErrorKind::DivByZero
                     : (over && e.kind == RtErrorKind::Overflow);
            if (!expect_throw) throw std::runtime_error("wrong error kind");
        }
        ++checked;
    };
    try {
        for (char op : {'+', '-', '*', '/', '%'})
            for (bool s : {true, false})
                for (int w : {32, 64, 128, 256})
                    for (int i = 0; i < 1000; ++i) {
                        cpp_int a = rand_val(s, w), b = rand_val(s, w);
                        if (i % 9 == 0) b = 0;
                        if (i % 11 == 0) a = max_of(s, w);
                        if (i % 13 == 0) b = min_of(s, w);
                        one(op, s, w, a, b);
                    }
        // 16 boundary overflow cases
        struct C { char op; bool s; int w; const char* a; const char* b; };
        const C cs[16] = {
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
            {'/', true, 128, "-170141183460469231731687303715884105728",
             "-1"},
            {'-', false, 128, "0", "1"},
            {'*', true, 256,
             "578960446186580977117854925043439539266349923328202820197287920"
             "03956564819967", "2"},
            {'+', false, 256,
             "115792089237316195423570985008687907853269984665640564039457584"
             "007913129639935", "1"},
            {'-', true, 256,
             "-57896044618658097711785492504343953926634992332820282019728792"
             "003956564819968", "1"},
        };
        for (auto& c : cs) one(c.op, c.s, c.w, cpp_int(c.a), cpp_int(c.b));
        detail = std::to_string(checked) + " operations checked";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(6, ok,
           "checked arithmetic matches a big-integer oracle over 5 ops x 8 "
           "sign/width combinations x 1000 pairs plus 16 boundary cases",
           detail);
}

// ---- criterion 7: serialization round-trip -------------------------------

void criterion_serialization() {
    bool ok = true;
    std::string detail;
    try {
        // round-trip through the canonical JSON on randomly generated
        // values, twice with the same seed for determinism
        auto run_once = [&](uint64_t seed) {
            std::string all;
            mvtest::Gen g(seed);
            Program prog;
            prog.adts = builtin_adts();
            AdtRegistry reg(prog);
            for (int i = 0; i < 500; ++i) {
                TypePtr t = g.value_type(3);
                mvtest::Gen::Env env;
                ExprPtr e = g.leaf(t, env);
                // evaluate the pure constructor expression on the
                // interpreter to obtain an RVal of type t
                Program p;
                p.adts = builtin_adts();
                p.main = e;
                auto tr = typecheck(p);
                if (!tr.ok) throw std::runtime_error("leaf ill-typed");
                auto j = pipeline::run_expr_interp(p, rt::Limits{});
                rt::RValPtr v = rt::deserialize_value(reg, t, j["result"]);
                auto j2 = rt::serialize_value(reg, t, v);
                if (j2.dump() != j["result"].dump())
                    throw std::runtime_error("round-trip mismatch");
                if (j2.is_array()) {  // map: canonical key order
                    std::vector<std::string> ks;
                    for (auto& ent : j2) ks.push_back(ent["key"].dump());
                    if (!std::is_sorted(ks.begin(), ks.end()))
                        throw std::runtime_error("map keys not canonical");
                }
                all += j2.dump();
            }
            return all;
        };
        if (run_once(0x5E12) != run_once(0x5E12))
            throw std::runtime_error("serialization not deterministic");
        detail = "500 values round-tripped, canonical and deterministic";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(7, ok,
           "serialize/deserialize round-trips 500 random values with "
           "canonical map key order, deterministically",
           detail);
}

// ---- criterion 8: allocation layout --------------------------------------

void criterion_layout() {
    bool ok = true;
    std::string detail;
    try {
        Program p = pipeline::frontend(
            "type MyList =\n | Nil\n | Cons of Int32 MyList\n"
            "let l = Cons (Int32 1) (Cons (Int32 2) Nil) in\n"
            "match l with | Cons h t => h | Nil => Int32 0 end");
        tgt::TargetModule m = pipeline::compile(p);
        vm::Machine mach(m, rt::Limits{});
        mach.arena().record_cells = true;
        mach.init();
        mach.run_main();
        std::vector<uint32_t> cells = mach.arena().cell_sizes;
        std::sort(cells.begin(), cells.end());
        if (cells != std::vector<uint32_t>({1, 13, 13}))
            throw std::runtime_error("unexpected cell sizes");
        auto b20 = tgt::layout_of(SType::make_bystrx(20));
        if (b20.inline_size != 20)
            throw std::runtime_error("ByStr20 inline size != 20");
        detail = "Cons cells 13 bytes (1 tag + 4 payload + 8 pointer), "
                 "ByStr20 inline size 20";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(8, ok,
           "instrumented VM observes 13-byte Cons cells and 20-byte inline "
           "ByStr20 values",
           detail);
}

}  // namespace

int main() {
    auto t0 = Clock::now();
    criterion_differential();
    criterion_ackermann();
    criterion_church();
    criterion_contract();
    criterion_invariants();
    criterion_integers();
    criterion_serialization();
    criterion_layout();
    double total =
        std::chrono::duration<double>(Clock::now() - t0).count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : "FAILURES: " + std::to_string(g_failures))
              << " (" << total << "s total)\n";
    return g_failures == 0 ? 0 : 1;
}
