#include "minivella/pipeline.hpp"

#include "minivella/parser.hpp"
#include "minivella/passes.hpp"
#include "minivella/typecheck.hpp"

namespace mv::pipeline {

using nlohmann::ordered_json;

const char* const kPassNames[] = {"typecheck", "uniquify", "dce", "flatten",
                                  "uncurry",   "mono",     "lower", nullptr};

namespace {

StmtPtr clone_stmt(const StmtPtr& s);

std::vector<StmtPtr> clone_stmts(const std::vector<StmtPtr>& body) {
    std::vector<StmtPtr> out;
    for (auto& s : body) out.push_back(clone_stmt(s));
    return out;
}

StmtPtr clone_stmt(const StmtPtr& s) {
    auto c = std::make_shared<Stmt>();
    c->kind = s->kind;
    c->loc = s->loc;
    c->name = s->name;
    c->field = s->field;
    c->e = passes::clone_expr(s->e);
    c->e2 = passes::clone_expr(s->e2);
    c->is_event = s->is_event;
    c->ann = s->ann;
    for (auto& arm : s->arms) c->arms.push_back({arm.pat, clone_stmts(arm.body)});
    return c;
}

// The passes transform in place, so the caller's typechecked program (which
// the interpreter runs) must stay untouched.
Program deep_copy(const Program& p) {
    Program q;
    q.adts = p.adts;
    for (auto& d : p.defs)
        q.defs.push_back({d.name, passes::clone_expr(d.value), d.is_rec,
                          d.rec_type, d.loc});
    if (p.contract) {
        Contract c;
        c.name = p.contract->name;
        for (auto& f : p.contract->fields)
            c.fields.push_back(
                {f.name, f.type, passes::clone_expr(f.init), f.loc});
        for (auto& t : p.contract->transitions)
            c.transitions.push_back(
                {t.name, t.params, clone_stmts(t.body), t.loc});
        q.contract = std::move(c);
    }
    q.main = passes::clone_expr(p.main);
    return q;
}

}  // namespace

Program frontend(const std::string& source) {
    ParseResult pr = parse_program(source);
    if (!pr.ok()) throw CompileError(std::move(pr.diags));
    TypecheckResult tr = typecheck(*pr.program);
    if (!tr.ok) throw CompileError(std::move(tr.diags));
    return std::move(*pr.program);
}

tgt::TargetModule compile(const Program& checked, const std::string& dump_after,
                          std::string* dump) {
    Program p = deep_copy(checked);
    auto snap = [&](const char* stage) {
        if (dump && dump_after == stage) *dump = pretty_print_program(p);
    };
    snap("typecheck");
    passes::uniquify(p);
    snap("uniquify");
    passes::eliminate_dead_code(p);
    snap("dce");
    passes::flatten_matches(p);
    snap("flatten");
    passes::uncurry(p);
    snap("uncurry");
    passes::monomorphize(p);
    snap("mono");
    cc::ClosuredProgram cp = cc::closure_convert(p);
    tgt::TargetModule mod = tgt::lower(cp);
    std::vector<std::string> problems = tgt::verify(mod);
    if (!problems.empty()) {
        std::vector<Diagnostic> ds;
        for (auto& m : problems) ds.push_back({Severity::Error, m, {}});
        throw CompileError(std::move(ds));
    }
    if (dump && dump_after == "lower") *dump = tgt::emit_text(mod);
    return mod;
}

ordered_json error_json(const RtError& e) {
    const char* kind = "internal";
    switch (e.kind) {
        case RtErrorKind::Overflow: kind = "overflow"; break;
        case RtErrorKind::DivByZero: kind = "div_by_zero"; break;
        case RtErrorKind::StackOverflow: kind = "stack_overflow"; break;
        case RtErrorKind::StepLimitExceeded: kind = "step_limit_exceeded"; break;
        case RtErrorKind::SerializationError: kind = "serialization_error"; break;
        case RtErrorKind::DeserializationError:
            kind = "deserialization_error";
            break;
        case RtErrorKind::Internal: kind = "internal"; break;
    }
    ordered_json j;
    j["error"] = {{"kind", kind}, {"message", e.what()}};
    return j;
}

ordered_json run_expr_interp(const Program& checked, rt::Limits limits) {
    AdtRegistry reg(checked);
    try {
        ordered_json j;
        // the interpreter's C++ recursion tracks program recursion
        interp::run_big_stack([&] {
            interp::Interp in(checked, limits);
            in.init();
            rt::RValPtr v = in.run_main();
            j["result"] = rt::serialize_value(reg, checked.main->ann, v);
        });
        return j;
    } catch (const RtError& e) {
        return error_json(e);
    }
}

ordered_json run_expr_vm(const tgt::TargetModule& mod, rt::Limits limits) {
    Program adts_prog;
    adts_prog.adts = mod.adts;
    AdtRegistry reg(adts_prog);
    try {
        vm::Machine m(mod, limits);
        m.init();
        rt::RValPtr v = m.run_main();
        ordered_json j;
        j["result"] =
            rt::serialize_value(reg, mod.tds[mod.main_td].source, v);
        return j;
    } catch (const RtError& e) {
        return error_json(e);
    }
}

namespace {

// Transition arguments in declared parameter order, matched from the
// incoming message's params by name, with strict type checking.
std::vector<rt::RValPtr> transition_args(
    const rt::Incoming& in,
    const std::vector<std::pair<std::string, TypePtr>>& params) {
    std::vector<rt::RValPtr> args;
    for (auto& [name, ty] : params) {
        const rt::StateField* found = nullptr;
        for (auto& p : in.params)
            if (p.name == name) found = &p;
        if (!found)
            throw RtError(RtErrorKind::DeserializationError,
                          "missing transition parameter " + name);
        if (!alpha_equal(found->ty, ty))
            throw RtError(RtErrorKind::DeserializationError,
                          "wrong type for transition parameter " + name);
        args.push_back(found->value);
    }
    return args;
}

template <class Engine>
ordered_json run_contract(
    Engine& eng, const AdtRegistry& reg,
    const std::vector<std::pair<std::string, TypePtr>>& declared_fields,
    const std::function<std::vector<std::pair<std::string, TypePtr>>(
        const std::string&)>& transition_params,
    const nlohmann::json* state, const nlohmann::json& message,
    rt::Limits) {
    rt::Incoming in = rt::message_from_json(reg, message);
    if (state) {
        eng.set_state(rt::state_from_json(reg, *state, declared_fields));
    } else {
        eng.run_field_inits();
    }
    auto args = transition_args(in, transition_params(in.tag));
    auto tx = eng.run_transition(in.tag, args);
    ordered_json j;
    j["state"] = rt::state_to_json(reg, eng.state())["fields"];
    j["messages"] = ordered_json::array();
    for (auto& m : tx.messages)
        j["messages"].push_back(rt::message_to_json(reg, m));
    j["events"] = ordered_json::array();
    for (auto& m : tx.events) j["events"].push_back(rt::message_to_json(reg, m));
    return j;
}

}  // namespace

ordered_json run_contract_interp(const Program& checked,
                                 const nlohmann::json* state,
                                 const nlohmann::json& message,
                                 rt::Limits limits) {
    AdtRegistry reg(checked);
    try {
        if (!checked.contract)
            throw RtError(RtErrorKind::Internal, "not a contract program");
        std::vector<std::pair<std::string, TypePtr>> fields;
        for (auto& f : checked.contract->fields)
            fields.push_back({f.name, f.type});
        auto params = [&](const std::string& tag) {
            for (auto& t : checked.contract->transitions)
                if (t.name == tag) {
                    std::vector<std::pair<std::string, TypePtr>> ps;
                    for (auto& p : t.params) ps.push_back({p.name, p.type});
                    return ps;
                }
            throw RtError(RtErrorKind::DeserializationError,
                          "no transition named " + tag);
        };
        ordered_json j;
        interp::run_big_stack([&] {
            interp::Interp in(checked, limits);
            in.init();
            j = run_contract(in, reg, fields, params, state, message, limits);
        });
        return j;
    } catch (const RtError& e) {
        return error_json(e);
    }
}

ordered_json run_contract_vm(const tgt::TargetModule& mod,
                             const nlohmann::json* state,
                             const nlohmann::json& message, rt::Limits limits) {
    Program adts_prog;
    adts_prog.adts = mod.adts;
    AdtRegistry reg(adts_prog);
    try {
        if (!mod.contract)
            throw RtError(RtErrorKind::Internal, "not a contract module");
        std::vector<std::pair<std::string, TypePtr>> fields;
        for (auto& f : mod.contract->fields)
            fields.push_back({f.name, mod.tds[f.td].source});
        auto params = [&](const std::string& tag) {
            for (auto& t : mod.contract->transitions)
                if (t.name == tag) {
                    std::vector<std::pair<std::string, TypePtr>> ps;
                    const tgt::TFunc& fn = mod.funcs[t.fn];
                    for (size_t i = 0; i < t.param_names.size(); ++i)
                        ps.push_back({t.param_names[i],
                                      mod.tds[fn.param_tds[i]].source});
                    return ps;
                }
            throw RtError(RtErrorKind::DeserializationError,
                          "no transition named " + tag);
        };
        vm::Machine m(mod, limits);
        m.init();
        return run_contract(m, reg, fields, params, state, message, limits);
    } catch (const RtError& e) {
        return error_json(e);
    }
}

}  // namespace mv::pipeline
