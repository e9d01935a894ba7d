#include <algorithm>

#include "minivella/target.hpp"

namespace mv::tgt {

Layout layout_of(const TypePtr& t) {
    switch (t->kind) {
        case TyKind::Int: {
            int sz = t->width / 8;
            return {false, sz, std::min(sz, 8), sz > 16};
        }
        case TyKind::String:
        case TyKind::ByStr:
            return {false, 16, 8, false};
        case TyKind::ByStrX:
            return {false, t->byte_len, 1, t->byte_len > 16};
        case TyKind::Adt:
        case TyKind::Map:
        case TyKind::Message:
            return {true, 8, 8, false};
        case TyKind::Fun:
        case TyKind::NAryFun:
        case TyKind::Forall:
            return {false, 16, 8, false};  // (code id, env reference)
        case TyKind::TyVar:
            break;
    }
    throw CompileError("layout_of: non-ground type " + show_type(t));
}

namespace {

Layout layout_of_td(const std::vector<TypeDescriptor>& tds, int i) {
    const TypeDescriptor& d = tds[i];
    switch (d.kind) {
        case TypeDescriptor::Kind::Int: {
            int sz = d.width / 8;
            return {false, sz, std::min(sz, 8), sz > 16};
        }
        case TypeDescriptor::Kind::String:
        case TypeDescriptor::Kind::ByStr:
            return {false, 16, 8, false};
        case TypeDescriptor::Kind::ByStrX:
            return {false, d.byte_len, 1, d.byte_len > 16};
        case TypeDescriptor::Kind::Adt:
        case TypeDescriptor::Kind::Map:
        case TypeDescriptor::Kind::Message:
            return {true, 8, 8, false};
        case TypeDescriptor::Kind::Function:
            return {false, 16, 8, false};
    }
    throw CompileError("layout_of_td: bad descriptor");
}

}  // namespace

// Packed cell layouts for every ADT descriptor, derived purely from the
// descriptor table (shared between the lowering and the .mvir loader).
void compute_ctor_layouts(std::vector<TypeDescriptor>& tds) {
    for (auto& d : tds) {
        if (d.kind != TypeDescriptor::Kind::Adt) continue;
        for (auto& c : d.ctors) {
            int off = 1;  // tag byte
            c.offsets.clear();
            for (int ftd : c.field_tds) {
                c.offsets.push_back(off);
                off += layout_of_td(tds, ftd).inline_size;
            }
            c.cell_size = off;
        }
    }
}

namespace {

// Registry over the closured program's ADT declarations.
struct Registry {
    const std::vector<ADTDecl>* adts;
    const ADTDecl* find(const std::string& name) const {
        for (auto& d : *adts)
            if (d.name == name) return &d;
        return nullptr;
    }
};

struct CodeGen {
    const cc::ClosuredProgram& prog;
    Registry reg;
    TargetModule mod;
    std::map<std::string, int> td_index;
    std::map<std::string, int> global_index;

    explicit CodeGen(const cc::ClosuredProgram& p) : prog(p) {
        reg.adts = &p.adts;
        mod.adts = p.adts;
    }

    [[noreturn]] void die(const std::string& msg) {
        throw CompileError("codegen: " + msg);
    }

    int intern(const TypePtr& t) {
        std::string key = show_type(t);
        auto it = td_index.find(key);
        if (it != td_index.end()) return it->second;
        int idx = (int)mod.tds.size();
        td_index[key] = idx;
        mod.tds.push_back({});
        TypeDescriptor d;
        d.show = key;
        d.source = t;
        switch (t->kind) {
            case TyKind::Int:
                d.kind = TypeDescriptor::Kind::Int;
                d.is_signed = t->is_signed;
                d.width = t->width;
                break;
            case TyKind::String:
                d.kind = TypeDescriptor::Kind::String;
                break;
            case TyKind::ByStr:
                d.kind = TypeDescriptor::Kind::ByStr;
                break;
            case TyKind::ByStrX:
                d.kind = TypeDescriptor::Kind::ByStrX;
                d.byte_len = t->byte_len;
                break;
            case TyKind::Adt: {
                d.kind = TypeDescriptor::Kind::Adt;
                d.adt_name = t->name;
                const ADTDecl* decl = reg.find(t->name);
                if (!decl) die("unknown ADT " + t->name);
                // store the partially built descriptor first: recursive
                // types (List) intern themselves while interning fields
                mod.tds[idx] = d;
                std::vector<int> targs;
                for (auto& a : t->args) targs.push_back(intern(a));
                std::vector<CtorInfo> ctors;
                for (size_t ci = 0; ci < decl->ctors.size(); ++ci) {
                    CtorInfo info;
                    info.name = decl->ctors[ci].name;
                    info.tag = (int)ci;
                    for (auto ft : decl->ctors[ci].field_types) {
                        for (size_t k = 0; k < decl->ty_params.size(); ++k)
                            ft = subst_tyvar(ft, decl->ty_params[k], t->args[k]);
                        info.field_tds.push_back(intern(ft));
                    }
                    ctors.push_back(std::move(info));
                }
                mod.tds[idx].targs = std::move(targs);
                mod.tds[idx].ctors = std::move(ctors);
                return idx;
            }
            case TyKind::Map: {
                d.kind = TypeDescriptor::Kind::Map;
                mod.tds[idx] = d;
                int k = intern(t->a), v = intern(t->b);
                mod.tds[idx].key_td = k;
                mod.tds[idx].val_td = v;
                return idx;
            }
            case TyKind::Fun: {
                d.kind = TypeDescriptor::Kind::Function;
                mod.tds[idx] = d;
                int a = intern(t->a), b = intern(t->b);
                mod.tds[idx].param_tds = {a};
                mod.tds[idx].ret_td = b;
                return idx;
            }
            case TyKind::NAryFun: {
                d.kind = TypeDescriptor::Kind::Function;
                mod.tds[idx] = d;
                std::vector<int> ps;
                for (auto& a : t->args) ps.push_back(intern(a));
                int b = intern(t->b);
                mod.tds[idx].param_tds = std::move(ps);
                mod.tds[idx].ret_td = b;
                return idx;
            }
            case TyKind::Forall:
                // polymorphic value (dispatch table): Function-kind
                // descriptor with no signature of its own
                d.kind = TypeDescriptor::Kind::Function;
                break;
            case TyKind::Message:
                d.kind = TypeDescriptor::Kind::Message;
                break;
            case TyKind::TyVar:
                die("type variable reached codegen: " + key);
        }
        mod.tds[idx] = d;
        return idx;
    }

    // ----- function lowering -----

    struct FB {
        TFunc fn;
        std::map<std::string, int> regs;
        // closure register -> env slot names of the function it was built
        // for (EnvPatch resolves slots through this)
        std::map<int, std::vector<std::string>> env_of;
        int cur = 0;

        int new_block() {
            fn.blocks.push_back({});
            return (int)fn.blocks.size() - 1;
        }
        TInstr& emit(Op op) {
            fn.blocks[cur].instrs.push_back({});
            TInstr& i = fn.blocks[cur].instrs.back();
            i.op = op;
            return i;
        }
        int new_reg() { return fn.nregs++; }
        int reg_for(const std::string& name) {
            auto it = regs.find(name);
            if (it != regs.end()) return it->second;
            int r = fn.nregs++;
            regs[name] = r;
            return r;
        }
    };

    int lower_atom(FB& b, const cc::CAtom& a) {
        switch (a.kind) {
            case cc::CAtom::Kind::Var:
                return b.reg_for(a.name);
            case cc::CAtom::Kind::Global: {
                auto it = global_index.find(a.name);
                if (it == global_index.end()) die("unknown global " + a.name);
                TInstr& i = b.emit(Op::LoadGlobal);
                i.dst = b.new_reg();
                i.gidx = it->second;
                i.td = intern(a.ty);
                return i.dst;
            }
            case cc::CAtom::Kind::Lit: {
                TInstr& i = b.emit(Op::LitK);
                i.dst = b.new_reg();
                i.lit = a.lit;
                i.td = intern(a.ty);
                return i.dst;
            }
        }
        die("bad atom");
    }

    void lower_stmts(FB& b, const std::vector<cc::CStmtPtr>& stmts) {
        using cc::CK;
        for (auto& s : stmts) {
            switch (s->kind) {
                case CK::Copy: {
                    int src = lower_atom(b, s->args[0]);
                    TInstr& i = b.emit(Op::Copy);
                    i.dst = b.reg_for(s->dst);
                    i.args = {src};
                    i.td = intern(s->dst_ty);
                    // a copied closure keeps its env shape (rec patching)
                    auto it = b.env_of.find(src);
                    if (it != b.env_of.end()) b.env_of[i.dst] = it->second;
                    break;
                }
                case CK::BuiltinOp: {
                    auto bi = builtin_by_name(s->op);
                    if (!bi) die("unknown builtin " + s->op);
                    bool is_map = *bi == BI::Emp || *bi == BI::MapPut ||
                                  *bi == BI::MapGet || *bi == BI::MapContains ||
                                  *bi == BI::MapRemove || *bi == BI::MapSize;
                    std::vector<int> args;
                    for (auto& a : s->args) args.push_back(lower_atom(b, a));
                    TInstr& i = b.emit(is_map ? Op::MapOp : Op::Arith);
                    i.dst = b.reg_for(s->dst);
                    i.bi = *bi;
                    i.args = std::move(args);
                    i.td = intern(s->dst_ty);
                    for (auto& t : s->ty_args) i.arg_tds.push_back(intern(t));
                    if (!is_map && !s->args.empty())
                        i.arg_tds.push_back(intern(s->args[0].ty));
                    break;
                }
                case CK::Call: {
                    std::vector<int> args;
                    for (auto& a : s->args) args.push_back(lower_atom(b, a));
                    TInstr& i = b.emit(Op::Call);
                    i.dst = b.reg_for(s->dst);
                    i.args = std::move(args);
                    i.td = intern(s->dst_ty);
                    break;
                }
                case CK::MakeClosure: {
                    std::vector<int> args;
                    for (auto& a : s->args) args.push_back(lower_atom(b, a));
                    TInstr& i = b.emit(Op::MakeClosure);
                    i.dst = b.reg_for(s->dst);
                    i.fn = s->fn_id;
                    i.args = std::move(args);
                    i.td = intern(s->dst_ty);
                    b.env_of[i.dst] = prog.funcs[s->fn_id].env;
                    break;
                }
                case CK::EnvPatch: {
                    int clo = lower_atom(b, s->args[0]);
                    int val = lower_atom(b, s->args[1]);
                    auto it = b.env_of.find(clo);
                    if (it == b.env_of.end())
                        die("env patch of unknown closure");
                    auto& env = it->second;
                    auto pos = std::find(env.begin(), env.end(), s->field);
                    if (pos == env.end()) die("env patch: no slot " + s->field);
                    TInstr& i = b.emit(Op::EnvPatch);
                    i.args = {clo, val};
                    i.env_slot = (int)(pos - env.begin());
                    break;
                }
                case CK::MakeDispatch: {
                    std::vector<int> args;
                    for (auto& a : s->args) args.push_back(lower_atom(b, a));
                    TInstr& i = b.emit(Op::MakeDispatch);
                    i.dst = b.reg_for(s->dst);
                    i.table = s->table_id;
                    i.args = std::move(args);
                    i.td = intern(s->dst_ty);
                    b.env_of[i.dst] = prog.dispatch_tables[s->table_id].env;
                    break;
                }
                case CK::DispatchCall: {
                    int t = lower_atom(b, s->args[0]);
                    TInstr& i = b.emit(Op::DispatchCall);
                    i.dst = b.reg_for(s->dst);
                    i.args = {t};
                    i.key_td = intern(s->key_ty);
                    i.td = intern(s->dst_ty);
                    break;
                }
                case CK::MakeConstr: {
                    std::vector<int> args;
                    for (auto& a : s->args) args.push_back(lower_atom(b, a));
                    int td = intern(s->dst_ty);
                    const TypeDescriptor& d = mod.tds[td];
                    int tag = -1;
                    for (auto& c : d.ctors)
                        if (c.name == s->op) tag = c.tag;
                    if (tag < 0) die("unknown constructor " + s->op);
                    TInstr& i = b.emit(Op::Alloc);
                    i.dst = b.reg_for(s->dst);
                    i.tag = tag;
                    i.args = std::move(args);
                    i.td = td;
                    break;
                }
                case CK::MakeMsg: {
                    TInstr instr{};
                    instr.op = Op::MakeMsg;
                    std::vector<int> args;
                    for (auto& [n, a] : s->msg_fields) {
                        instr.names.push_back(n);
                        instr.arg_tds.push_back(intern(a.ty));
                        args.push_back(lower_atom(b, a));
                    }
                    instr.args = std::move(args);
                    instr.dst = b.reg_for(s->dst);
                    instr.td = intern(s->dst_ty);
                    b.fn.blocks[b.cur].instrs.push_back(std::move(instr));
                    break;
                }
                case CK::Switch: {
                    int scrut = lower_atom(b, s->args[0]);
                    int scrut_td = intern(s->args[0].ty);
                    // copy: lowering arm bodies may grow the table
                    TypeDescriptor d = mod.tds[scrut_td];
                    int from = b.cur;
                    int join = -1;  // created lazily
                    std::vector<std::pair<int, int>> cases;
                    int def_blk = -1;
                    for (auto& arm : s->arms) {
                        int blk = b.new_block();
                        b.cur = blk;
                        if (arm.tag >= 0) {
                            const CtorInfo& c = d.ctors[arm.tag];
                            for (size_t fi = 0; fi < arm.binders.size(); ++fi) {
                                if (arm.binders[fi].empty()) continue;
                                TInstr& g = b.emit(Op::GetField);
                                g.dst = b.reg_for(arm.binders[fi]);
                                g.args = {scrut};
                                g.index = (int)fi;
                                g.tag = arm.tag;
                                g.adt_td = scrut_td;
                                g.td = c.field_tds[fi];
                            }
                            cases.emplace_back(arm.tag, blk);
                        } else {
                            if (!arm.ctor.empty()) {
                                TInstr& g = b.emit(Op::Copy);
                                g.dst = b.reg_for(arm.ctor);
                                g.args = {scrut};
                                g.td = scrut_td;
                            }
                            def_blk = blk;
                        }
                        lower_stmts(b, arm.body);
                        if (join < 0) join = b.new_block();
                        b.fn.blocks[b.cur].term = TBlock::Term::Jmp;
                        b.fn.blocks[b.cur].jmp_to = join;
                    }
                    if (join < 0) join = b.new_block();
                    std::sort(cases.begin(), cases.end());
                    b.fn.blocks[from].term = TBlock::Term::Switch;
                    b.fn.blocks[from].sw_reg = scrut;
                    b.fn.blocks[from].cases = cases;
                    b.fn.blocks[from].sw_default = def_blk;
                    b.cur = join;
                    break;
                }
                case CK::Ret: {
                    int r = lower_atom(b, s->args[0]);
                    b.fn.blocks[b.cur].term = TBlock::Term::Ret;
                    b.fn.blocks[b.cur].ret_reg = r;
                    break;
                }
                case CK::LoadField: {
                    TInstr& i = b.emit(Op::LoadField);
                    i.dst = b.reg_for(s->dst);
                    i.field = s->field;
                    i.td = intern(s->dst_ty);
                    break;
                }
                case CK::StoreField: {
                    int v = lower_atom(b, s->args[0]);
                    TInstr& i = b.emit(Op::StoreField);
                    i.field = s->field;
                    i.args = {v};
                    i.td = intern(s->args[0].ty);
                    break;
                }
                case CK::MapGetS: {
                    int k = lower_atom(b, s->args[0]);
                    TInstr& i = b.emit(Op::MapGetS);
                    i.dst = b.reg_for(s->dst);
                    i.field = s->field;
                    i.args = {k};
                    i.arg_tds = {intern(s->args[0].ty)};
                    i.td = intern(s->dst_ty);
                    break;
                }
                case CK::MapPutS: {
                    int k = lower_atom(b, s->args[0]);
                    int v = lower_atom(b, s->args[1]);
                    TInstr& i = b.emit(Op::MapPutS);
                    i.field = s->field;
                    i.args = {k, v};
                    i.arg_tds = {intern(s->args[0].ty), intern(s->args[1].ty)};
                    break;
                }
                case CK::Emit: {
                    int v = lower_atom(b, s->args[0]);
                    TInstr& i = b.emit(Op::Emit);
                    i.args = {v};
                    i.is_event = s->is_event;
                    break;
                }
            }
        }
    }

    int lower_fn(const std::string& name,
                 const std::vector<std::string>& params,
                 const std::vector<TypePtr>& param_types,
                 const std::vector<std::string>& env,
                 const std::vector<TypePtr>& env_types, const TypePtr& ret,
                 const std::vector<cc::CStmtPtr>& body) {
        FB b;
        b.fn.id = (int)mod.funcs.size();
        b.fn.name = name;
        for (size_t i = 0; i < params.size(); ++i) {
            b.fn.param_tds.push_back(intern(param_types[i]));
            b.regs[params[i]] = b.fn.nregs++;
        }
        for (size_t i = 0; i < env.size(); ++i) {
            b.fn.env_tds.push_back(intern(env_types[i]));
            b.regs[env[i]] = b.fn.nregs++;
        }
        b.fn.ret_td = ret ? intern(ret) : -1;
        b.fn.sret = ret && layout_of(ret).by_ref;
        b.new_block();
        b.cur = 0;
        mod.funcs.push_back({});  // reserve (body lowering cannot recurse,
                                  // but keep ids stable anyway)
        lower_stmts(b, body);
        mod.funcs[b.fn.id] = std::move(b.fn);
        return (int)mod.funcs.size() - 1;
    }

    void run() {
        // globals must be indexable before any body is lowered
        for (size_t i = 0; i < prog.globals.size(); ++i)
            global_index[prog.globals[i].name] = (int)i;

        // program functions keep their closured ids
        for (auto& f : prog.funcs)
            lower_fn(f.name, f.params, f.param_types, f.env, f.env_types,
                     f.ret_type, f.body);
        for (auto& t : prog.dispatch_tables) {
            TDispatchTable td;
            td.id = t.id;
            for (auto& [ty, fid] : t.entries)
                td.entries.emplace_back(intern(ty), fid);
            for (auto& ty : t.env_types) td.env_tds.push_back(intern(ty));
            mod.tables.push_back(std::move(td));
        }
        for (auto& g : prog.globals) {
            TGlobal tg;
            tg.name = g.name;
            tg.td = intern(g.ty);
            tg.init_fn = lower_fn("$init$" + g.name, {}, {}, {}, {}, g.ty,
                                  g.body);
            mod.globals.push_back(std::move(tg));
        }
        if (prog.contract) {
            TContract tc;
            tc.name = prog.contract->name;
            for (auto& f : prog.contract->fields) {
                TField tf;
                tf.name = f.name;
                tf.td = intern(f.ty);
                tf.init_fn =
                    lower_fn("$field$" + f.name, {}, {}, {}, {}, f.ty, f.init);
                tc.fields.push_back(std::move(tf));
            }
            for (auto& t : prog.contract->transitions) {
                TTransition tt;
                tt.name = t.name;
                tt.param_names = t.params;
                tt.fn = lower_fn("$trans$" + t.name, t.params, t.param_types,
                                 {}, {}, nullptr, t.body);
                tc.transitions.push_back(std::move(tt));
            }
            mod.contract = std::move(tc);
        }
        if (!prog.main.empty()) {
            mod.main_td = intern(prog.main_ty);
            mod.main_fn =
                lower_fn("$main", {}, {}, {}, {}, prog.main_ty, prog.main);
        }
        compute_ctor_layouts(mod.tds);
    }
};

}  // namespace

TargetModule lower(const cc::ClosuredProgram& p) {
    CodeGen cg(p);
    cg.run();
    return std::move(cg.mod);
}

// ---------------------------------------------------------------------------

std::vector<std::string> verify(const TargetModule& m) {
    std::vector<std::string> errs;
    auto bad = [&](const std::string& s) { errs.push_back(s); };
    int ntd = (int)m.tds.size();
    auto td_ok = [&](int i) { return i >= 0 && i < ntd; };

    for (auto& f : m.funcs) {
        std::string where = "fn " + std::to_string(f.id) + " (" + f.name + ")";
        for (int t : f.param_tds)
            if (!td_ok(t)) bad(where + ": bad param descriptor");
        if (f.ret_td != -1 && !td_ok(f.ret_td))
            bad(where + ": bad return descriptor");
        if (f.ret_td != -1) {
            bool by_ref = layout_of_td(m.tds, f.ret_td).by_ref;
            if (by_ref != f.sret)
                bad(where + ": sret flag does not match return layout");
        }
        if (f.blocks.empty()) {
            bad(where + ": no blocks");
            continue;
        }
        int nb = (int)f.blocks.size();
        for (auto& blk : f.blocks) {
            for (auto& i : blk.instrs) {
                for (int r : i.args)
                    if (r < 0 || r >= f.nregs) bad(where + ": register out of range");
                if (i.dst >= f.nregs) bad(where + ": dst out of range");
                if (i.td != -1 && !td_ok(i.td)) bad(where + ": bad descriptor");
                if (i.op == Op::Call) {
                    if (i.args.empty()) bad(where + ": call without callee");
                } else if (i.op == Op::MakeClosure) {
                    if (i.fn < 0 || i.fn >= (int)m.funcs.size())
                        bad(where + ": closure of unknown function");
                    else if (m.funcs[i.fn].env_tds.size() != i.args.size())
                        bad(where + ": closure capture count mismatch");
                } else if (i.op == Op::MakeDispatch) {
                    if (i.table < 0 || i.table >= (int)m.tables.size())
                        bad(where + ": unknown dispatch table");
                    else if (m.tables[i.table].env_tds.size() != i.args.size())
                        bad(where + ": dispatch capture count mismatch");
                } else if (i.op == Op::Alloc) {
                    if (!td_ok(i.td) ||
                        m.tds[i.td].kind != TypeDescriptor::Kind::Adt)
                        bad(where + ": alloc of non-ADT");
                    else {
                        auto& d = m.tds[i.td];
                        if (i.tag < 0 || i.tag >= (int)d.ctors.size())
                            bad(where + ": alloc with bad tag");
                        else if (d.ctors[i.tag].field_tds.size() !=
                                 i.args.size())
                            bad(where + ": alloc field count mismatch");
                    }
                } else if (i.op == Op::LoadGlobal) {
                    if (i.gidx < 0 || i.gidx >= (int)m.globals.size())
                        bad(where + ": bad global index");
                }
            }
            switch (blk.term) {
                case TBlock::Term::Ret:
                    break;
                case TBlock::Term::Jmp:
                    if (blk.jmp_to < 0 || blk.jmp_to >= nb)
                        bad(where + ": jump out of range");
                    break;
                case TBlock::Term::Switch:
                    for (auto& [tag, target] : blk.cases)
                        if (target < 0 || target >= nb)
                            bad(where + ": switch target out of range");
                    if (blk.sw_default >= nb)
                        bad(where + ": switch default out of range");
                    break;
            }
        }
    }
    for (auto& t : m.tables)
        for (auto& [key, fid] : t.entries) {
            if (!td_ok(key)) bad("dispatch table: bad key descriptor");
            if (fid < 0 || fid >= (int)m.funcs.size())
                bad("dispatch table: bad function id");
            else if (!m.funcs[fid].param_tds.empty())
                bad("dispatch table: entry function takes parameters");
        }
    for (auto& g : m.globals)
        if (g.init_fn < 0 || g.init_fn >= (int)m.funcs.size())
            bad("global " + g.name + ": bad init function");
    return errs;
}

}  // namespace mv::tgt
