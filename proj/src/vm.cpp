#include <algorithm>
#include <unordered_map>

#include "minivella/vm.hpp"

namespace mv::vm {

using rt::RVal;
using rt::RValPtr;
using rt::WideInt;
using tgt::Op;
using tgt::TargetModule;
using tgt::TypeDescriptor;

namespace {

// How a value of some type moves between a 16-byte register slot and its
// packed in-cell representation.
enum class FK : uint8_t {
    IntSmall,  // <= 8 bytes, value in slot.a
    Int128,    // 16 bytes, slot.a/slot.b
    Pair,      // String/ByStr: pointer + length
    Inline,    // ByStrX <= 16: raw bytes inside the slot
    Ptr8,      // boxed: 8-byte reference in slot.a
    Clo,       // closure/dispatch: 16 bytes
    ByRef,     // > two eightbytes: slot.a points at the bytes
};

struct FieldIO {
    FK fk;
    uint16_t size;
    uint16_t offset;
};

FieldIO field_io(const std::vector<TypeDescriptor>& tds, int td, int offset) {
    const TypeDescriptor& d = tds[td];
    switch (d.kind) {
        case TypeDescriptor::Kind::Int: {
            int sz = d.width / 8;
            if (sz <= 8) return {FK::IntSmall, (uint16_t)sz, (uint16_t)offset};
            if (sz == 16) return {FK::Int128, 16, (uint16_t)offset};
            return {FK::ByRef, (uint16_t)sz, (uint16_t)offset};
        }
        case TypeDescriptor::Kind::String:
        case TypeDescriptor::Kind::ByStr:
            return {FK::Pair, 16, (uint16_t)offset};
        case TypeDescriptor::Kind::ByStrX:
            if (d.byte_len <= 16)
                return {FK::Inline, (uint16_t)d.byte_len, (uint16_t)offset};
            return {FK::ByRef, (uint16_t)d.byte_len, (uint16_t)offset};
        case TypeDescriptor::Kind::Adt:
        case TypeDescriptor::Kind::Map:
        case TypeDescriptor::Kind::Message:
            return {FK::Ptr8, 8, (uint16_t)offset};
        case TypeDescriptor::Kind::Function:
            return {FK::Clo, 16, (uint16_t)offset};
    }
    throw RtError(RtErrorKind::Internal, "bad descriptor");
}

struct VI {
    enum class K : uint8_t {
        Lit, Copy, IntArith, WideArith, CmpLt, CmpEq, Concat, Strlen,
        ToString, MapOp, Call, MkClo, EnvPatch, MkDisp, DispCall, Alloc,
        GetField, MkMsg, LoadGlobal, LoadFieldS, StoreFieldS, MapGetS,
        MapPutS, Emit, Ret, Jmp, Switch
    };
    K k;
    BI bi = BI::Add;
    int dst = -1;
    std::vector<int> args;
    Slot lit{};
    int td = -1;
    bool sgn = true;
    int width = 32;
    int opnd_td = -1;
    int fn = -1, table = -1, key_td = -1, tag = -1, gidx = -1, env_slot = -1;
    int cell_size = 0;
    std::vector<FieldIO> fios;  // Alloc fields
    FieldIO fio{};              // GetField
    std::vector<int> arg_tds;
    std::vector<std::string> names;
    std::string field;
    bool is_event = false;
    int jmp = -1;
    std::vector<int> sw_targets;  // by tag
    int sw_def = -1;
};

struct ImFunc {
    std::vector<VI> code;
    int nregs = 0;
    int nparams = 0;
    int nenv = 0;
};

}  // namespace

struct Machine::Impl {
    TargetModule mod;
    rt::Limits limits;
    Arena arena;
    std::vector<ImFunc> funcs;
    std::vector<std::unordered_map<int, int>> table_lookup;  // key td -> fn
    std::vector<Slot> globals;
    rt::StateStore st;
    std::vector<rt::MapPtr> maps;
    std::vector<rt::MsgPtr> msgs;
    std::vector<rt::MsgPtr> out_messages, out_events;
    uint64_t steps = 0;
    std::optional<AdtRegistry> adt_reg;
    Program adt_holder;  // backs adt_reg

    std::vector<Slot> regstack;
    struct Frame {
        const ImFunc* fn;
        size_t base;
        int ip;
        int ret_dst;  // register in caller
    };
    std::vector<Frame> frames;

    explicit Impl(const TargetModule& m, rt::Limits lim)
        : mod(m), limits(lim) {
        adt_holder.adts = mod.adts;
        adt_reg.emplace(adt_holder);
        build();
    }

    [[noreturn]] void internal(const std::string& msg) {
        throw RtError(RtErrorKind::Internal, msg);
    }

    // ----- image construction -----

    Slot lit_slot(const Literal& l, int td) {
        Slot s{};
        switch (l.kind) {
            case Literal::Kind::Int: {
                const TypeDescriptor& d = mod.tds[td];
                int sz = d.width / 8;
                if (sz <= 8) {
                    s.a = l.i.limbs[0];
                } else if (sz == 16) {
                    s.a = l.i.limbs[0];
                    s.b = l.i.limbs[1];
                } else {
                    uint8_t* p = arena.alloc(sz);
                    rt::wi_store_bytes(l.i, p);
                    s.a = (uint64_t)(uintptr_t)p;
                }
                break;
            }
            case Literal::Kind::Str: {
                uint8_t* p = arena.alloc(l.s.size());
                memcpy(p, l.s.data(), l.s.size());
                s.a = (uint64_t)(uintptr_t)p;
                s.b = l.s.size();
                break;
            }
            case Literal::Kind::ByStrX: {
                if (l.bytes.size() <= 16) {
                    uint8_t tmp[16] = {0};
                    memcpy(tmp, l.bytes.data(), l.bytes.size());
                    memcpy(&s, tmp, 16);
                } else {
                    uint8_t* p = arena.alloc(l.bytes.size());
                    memcpy(p, l.bytes.data(), l.bytes.size());
                    s.a = (uint64_t)(uintptr_t)p;
                }
                break;
            }
        }
        return s;
    }

    void build() {
        for (auto& t : mod.tables) {
            std::unordered_map<int, int> lk;
            for (auto& [key, fn] : t.entries) lk[key] = fn;
            table_lookup.push_back(std::move(lk));
        }
        for (auto& f : mod.funcs) {
            ImFunc im;
            im.nregs = f.nregs;
            im.nparams = (int)f.param_tds.size();
            im.nenv = (int)f.env_tds.size();
            // block -> flat offset
            std::vector<int> start(f.blocks.size());
            int off = 0;
            for (size_t b = 0; b < f.blocks.size(); ++b) {
                start[b] = off;
                off += (int)f.blocks[b].instrs.size() + 1;
            }
            for (auto& blk : f.blocks) {
                for (auto& i : blk.instrs) im.code.push_back(translate(i));
                VI t{};
                switch (blk.term) {
                    case tgt::TBlock::Term::Ret:
                        t.k = VI::K::Ret;
                        t.args = {blk.ret_reg};
                        break;
                    case tgt::TBlock::Term::Jmp:
                        t.k = VI::K::Jmp;
                        t.jmp = start[blk.jmp_to];
                        break;
                    case tgt::TBlock::Term::Switch: {
                        t.k = VI::K::Switch;
                        t.args = {blk.sw_reg};
                        int maxtag = -1;
                        for (auto& [tag, tb] : blk.cases)
                            maxtag = std::max(maxtag, tag);
                        t.sw_targets.assign(maxtag + 1, -1);
                        for (auto& [tag, tb] : blk.cases)
                            t.sw_targets[tag] = start[tb];
                        t.sw_def =
                            blk.sw_default >= 0 ? start[blk.sw_default] : -1;
                        break;
                    }
                }
                im.code.push_back(std::move(t));
            }
            funcs.push_back(std::move(im));
        }
    }

    VI translate(const tgt::TInstr& i) {
        VI v{};
        v.dst = i.dst;
        v.args = i.args;
        v.td = i.td;
        v.arg_tds = i.arg_tds;
        v.names = i.names;
        v.field = i.field;
        v.is_event = i.is_event;
        v.fn = i.fn;
        v.table = i.table;
        v.key_td = i.key_td;
        v.tag = i.tag;
        v.gidx = i.gidx;
        v.env_slot = i.env_slot;
        v.bi = i.bi;
        switch (i.op) {
            case Op::LitK:
                v.k = VI::K::Lit;
                v.lit = lit_slot(i.lit, i.td);
                break;
            case Op::Copy:
                v.k = VI::K::Copy;
                break;
            case Op::Arith: {
                int opnd = i.arg_tds.empty() ? i.td : i.arg_tds.back();
                v.opnd_td = opnd;
                const TypeDescriptor& d = mod.tds[opnd];
                v.sgn = d.is_signed;
                v.width = d.width;
                switch (i.bi) {
                    case BI::Add: case BI::Sub: case BI::Mul:
                    case BI::Div: case BI::Rem:
                        v.k = d.width <= 64 ? VI::K::IntArith : VI::K::WideArith;
                        break;
                    case BI::Lt:
                        v.k = VI::K::CmpLt;
                        break;
                    case BI::Eq:
                        v.k = VI::K::CmpEq;
                        break;
                    case BI::Concat:
                        v.k = VI::K::Concat;
                        break;
                    case BI::Strlen:
                        v.k = VI::K::Strlen;
                        break;
                    case BI::ToString:
                        v.k = VI::K::ToString;
                        break;
                    default:
                        internal("bad arith builtin");
                }
                break;
            }
            case Op::MapOp:
                v.k = VI::K::MapOp;
                break;
            case Op::Call:
                v.k = VI::K::Call;
                break;
            case Op::MakeClosure:
                v.k = VI::K::MkClo;
                break;
            case Op::EnvPatch:
                v.k = VI::K::EnvPatch;
                break;
            case Op::MakeDispatch:
                v.k = VI::K::MkDisp;
                break;
            case Op::DispatchCall:
                v.k = VI::K::DispCall;
                break;
            case Op::Alloc: {
                v.k = VI::K::Alloc;
                const auto& c = mod.tds[i.td].ctors[i.tag];
                v.cell_size = c.cell_size;
                for (size_t fi = 0; fi < c.field_tds.size(); ++fi)
                    v.fios.push_back(
                        field_io(mod.tds, c.field_tds[fi], c.offsets[fi]));
                break;
            }
            case Op::GetField: {
                v.k = VI::K::GetField;
                const auto& c = mod.tds[i.adt_td].ctors[i.tag];
                v.fio = field_io(mod.tds, c.field_tds[i.index],
                                 c.offsets[i.index]);
                break;
            }
            case Op::MakeMsg:
                v.k = VI::K::MkMsg;
                break;
            case Op::LoadGlobal:
                v.k = VI::K::LoadGlobal;
                break;
            case Op::LoadField:
                v.k = VI::K::LoadFieldS;
                break;
            case Op::StoreField:
                v.k = VI::K::StoreFieldS;
                break;
            case Op::MapGetS:
                v.k = VI::K::MapGetS;
                break;
            case Op::MapPutS:
                v.k = VI::K::MapPutS;
                break;
            case Op::Emit:
                v.k = VI::K::Emit;
                break;
        }
        return v;
    }

    // ----- slot <-> packed field bytes -----

    void store_field(uint8_t* cell, const FieldIO& f, Slot s) {
        uint8_t* dst = cell + f.offset;
        switch (f.fk) {
            case FK::IntSmall:
                memcpy(dst, &s.a, f.size);
                break;
            case FK::Int128:
            case FK::Clo:
                memcpy(dst, &s, 16);
                break;
            case FK::Pair:
                memcpy(dst, &s, 16);
                break;
            case FK::Inline:
                memcpy(dst, &s, f.size);
                break;
            case FK::Ptr8:
                memcpy(dst, &s.a, 8);
                break;
            case FK::ByRef:
                memcpy(dst, (uint8_t*)(uintptr_t)s.a, f.size);
                break;
        }
    }

    Slot load_field(const uint8_t* cell, const FieldIO& f) {
        const uint8_t* src = cell + f.offset;
        Slot s{};
        switch (f.fk) {
            case FK::IntSmall: {
                memcpy(&s.a, src, f.size);
                // sign-extension is the caller's concern only for signed
                // ints; re-extend from the stored width
                break;
            }
            case FK::Int128:
            case FK::Clo:
            case FK::Pair:
                memcpy(&s, src, 16);
                break;
            case FK::Inline:
                memcpy(&s, src, f.size);
                break;
            case FK::Ptr8:
                memcpy(&s.a, src, 8);
                break;
            case FK::ByRef:
                s.a = (uint64_t)(uintptr_t)src;  // reference into the cell
                break;
        }
        return s;
    }

    // re-extend a small signed int after a truncating load
    static uint64_t sext(uint64_t v, int width) {
        if (width >= 64) return v;
        uint64_t m = 1ull << (width - 1);
        return (v ^ m) - m;
    }

    Slot fix_int(Slot s, int td) {
        const TypeDescriptor& d = mod.tds[td];
        if (d.kind == TypeDescriptor::Kind::Int && d.width < 64) {
            if (d.is_signed)
                s.a = sext(s.a, d.width);
            else
                s.a &= (1ull << d.width) - 1;
        }
        return s;
    }

    // ----- slot <-> RVal -----

    WideInt slot_to_wide(int td, Slot s) {
        const TypeDescriptor& d = mod.tds[td];
        WideInt w;
        w.is_signed = d.is_signed;
        w.width = d.width;
        if (d.width <= 64) {
            w.limbs[0] = s.a;
            uint64_t ext =
                d.is_signed && (int64_t)s.a < 0 ? ~0ull : 0ull;
            w.limbs[1] = w.limbs[2] = w.limbs[3] = ext;
        } else if (d.width == 128) {
            w.limbs[0] = s.a;
            w.limbs[1] = s.b;
            uint64_t ext =
                d.is_signed && (int64_t)s.b < 0 ? ~0ull : 0ull;
            w.limbs[2] = w.limbs[3] = ext;
        } else {
            w = rt::wi_load_bytes(d.is_signed, 256,
                                  (const uint8_t*)(uintptr_t)s.a);
        }
        return w;
    }

    Slot wide_to_slot(const WideInt& w) {
        Slot s{};
        if (w.width <= 64) {
            s.a = w.limbs[0];
        } else if (w.width == 128) {
            s.a = w.limbs[0];
            s.b = w.limbs[1];
        } else {
            uint8_t* p = arena.alloc(32);
            rt::wi_store_bytes(w, p);
            s.a = (uint64_t)(uintptr_t)p;
        }
        return s;
    }

    RValPtr to_rval(int td, Slot s) {
        const TypeDescriptor& d = mod.tds[td];
        switch (d.kind) {
            case TypeDescriptor::Kind::Int:
                return RVal::make_int(slot_to_wide(td, s));
            case TypeDescriptor::Kind::String:
                return RVal::make_str(std::string(
                    (const char*)(uintptr_t)s.a, (size_t)s.b));
            case TypeDescriptor::Kind::ByStr: {
                const uint8_t* p = (const uint8_t*)(uintptr_t)s.a;
                return RVal::make_bytes(std::vector<uint8_t>(p, p + s.b));
            }
            case TypeDescriptor::Kind::ByStrX: {
                if (d.byte_len <= 16) {
                    uint8_t tmp[16];
                    memcpy(tmp, &s, 16);
                    return RVal::make_bytes(
                        std::vector<uint8_t>(tmp, tmp + d.byte_len));
                }
                const uint8_t* p = (const uint8_t*)(uintptr_t)s.a;
                return RVal::make_bytes(
                    std::vector<uint8_t>(p, p + d.byte_len));
            }
            case TypeDescriptor::Kind::Adt: {
                const uint8_t* cell = (const uint8_t*)(uintptr_t)s.a;
                int tag = cell[0];
                if (tag >= (int)d.ctors.size()) internal("bad tag in cell");
                const auto& c = d.ctors[tag];
                std::vector<RValPtr> fields;
                for (size_t i = 0; i < c.field_tds.size(); ++i) {
                    FieldIO f =
                        field_io(mod.tds, c.field_tds[i], c.offsets[i]);
                    Slot fs = fix_int(load_field(cell, f), c.field_tds[i]);
                    fields.push_back(to_rval(c.field_tds[i], fs));
                }
                return RVal::make_adt(c.name, tag, std::move(fields));
            }
            case TypeDescriptor::Kind::Map:
                return RVal::make_map(maps[s.a]);
            case TypeDescriptor::Kind::Message:
                return RVal::make_msg(msgs[s.a]);
            case TypeDescriptor::Kind::Function:
                throw RtError(RtErrorKind::SerializationError,
                              "function values cannot leave the VM");
        }
        internal("bad descriptor");
    }

    Slot from_rval(int td, const RValPtr& v) {
        const TypeDescriptor& d = mod.tds[td];
        switch (d.kind) {
            case TypeDescriptor::Kind::Int:
                return wide_to_slot(v->i);
            case TypeDescriptor::Kind::String: {
                Slot s{};
                uint8_t* p = arena.alloc(v->s.size());
                memcpy(p, v->s.data(), v->s.size());
                s.a = (uint64_t)(uintptr_t)p;
                s.b = v->s.size();
                return s;
            }
            case TypeDescriptor::Kind::ByStr: {
                Slot s{};
                uint8_t* p = arena.alloc(v->bytes.size());
                memcpy(p, v->bytes.data(), v->bytes.size());
                s.a = (uint64_t)(uintptr_t)p;
                s.b = v->bytes.size();
                return s;
            }
            case TypeDescriptor::Kind::ByStrX: {
                Slot s{};
                if (d.byte_len <= 16) {
                    uint8_t tmp[16] = {0};
                    memcpy(tmp, v->bytes.data(), v->bytes.size());
                    memcpy(&s, tmp, 16);
                } else {
                    uint8_t* p = arena.alloc(v->bytes.size());
                    memcpy(p, v->bytes.data(), v->bytes.size());
                    s.a = (uint64_t)(uintptr_t)p;
                }
                return s;
            }
            case TypeDescriptor::Kind::Adt: {
                const auto& c = d.ctors[v->tag];
                uint8_t* cell = arena.alloc_cell(c.cell_size);
                cell[0] = (uint8_t)v->tag;
                for (size_t i = 0; i < c.field_tds.size(); ++i) {
                    Slot fs = from_rval(c.field_tds[i], v->fields[i]);
                    store_field(
                        cell,
                        field_io(mod.tds, c.field_tds[i], c.offsets[i]), fs);
                }
                Slot s{};
                s.a = (uint64_t)(uintptr_t)cell;
                return s;
            }
            case TypeDescriptor::Kind::Map: {
                Slot s{};
                s.a = maps.size();
                maps.push_back(v->map);
                return s;
            }
            case TypeDescriptor::Kind::Message: {
                Slot s{};
                s.a = msgs.size();
                msgs.push_back(v->msg);
                return s;
            }
            case TypeDescriptor::Kind::Function:
                break;
        }
        internal("cannot materialize value");
    }

    // ----- helpers -----

    Slot make_bool(int bool_td, bool v) {
        // True is constructor 0, False constructor 1
        const auto& c = mod.tds[bool_td].ctors[v ? 0 : 1];
        uint8_t* cell = arena.alloc_cell(c.cell_size);
        cell[0] = (uint8_t)(v ? 0 : 1);
        Slot s{};
        s.a = (uint64_t)(uintptr_t)cell;
        return s;
    }

    Slot make_option(int opt_td, const std::optional<RValPtr>& v, int val_td) {
        const TypeDescriptor& d = mod.tds[opt_td];
        int some = -1, none = -1;
        for (auto& c : d.ctors) {
            if (c.name == "Some") some = c.tag;
            if (c.name == "None") none = c.tag;
        }
        Slot s{};
        if (!v) {
            const auto& c = d.ctors[none];
            uint8_t* cell = arena.alloc_cell(c.cell_size);
            cell[0] = (uint8_t)none;
            s.a = (uint64_t)(uintptr_t)cell;
            return s;
        }
        const auto& c = d.ctors[some];
        uint8_t* cell = arena.alloc_cell(c.cell_size);
        cell[0] = (uint8_t)some;
        Slot fs = from_rval(val_td, *v);
        store_field(cell, field_io(mod.tds, c.field_tds[0], c.offsets[0]), fs);
        s.a = (uint64_t)(uintptr_t)cell;
        return s;
    }

    bool slot_eq(int td, Slot x, Slot y) {
        const TypeDescriptor& d = mod.tds[td];
        switch (d.kind) {
            case TypeDescriptor::Kind::Int:
                if (d.width <= 64) return x.a == y.a;
                if (d.width == 128) return x.a == y.a && x.b == y.b;
                return rt::wi_eq(slot_to_wide(td, x), slot_to_wide(td, y));
            case TypeDescriptor::Kind::String:
            case TypeDescriptor::Kind::ByStr:
                return x.b == y.b &&
                       memcmp((void*)(uintptr_t)x.a, (void*)(uintptr_t)y.a,
                              (size_t)x.b) == 0;
            case TypeDescriptor::Kind::ByStrX:
                if (d.byte_len <= 16)
                    return memcmp(&x, &y, d.byte_len) == 0;
                return memcmp((void*)(uintptr_t)x.a, (void*)(uintptr_t)y.a,
                              d.byte_len) == 0;
            default:
                internal("eq on non-primitive type");
        }
    }

    void bump_steps() {
        if (++steps > limits.step_limit)
            throw RtError(RtErrorKind::StepLimitExceeded,
                          "step limit exceeded");
    }

    // ----- call machinery -----

    void push_frame(int fid, const Slot* args, int nargs, uint64_t env_ptr,
                    int ret_dst) {
        if (frames.size() >= limits.stack_limit)
            throw RtError(RtErrorKind::StackOverflow, "call stack overflow");
        const ImFunc& f = funcs[fid];
        if (nargs != f.nparams) internal("call arity mismatch");
        size_t base = regstack.size();
        regstack.resize(base + f.nregs);
        for (int i = 0; i < nargs; ++i) regstack[base + i] = args[i];
        if (f.nenv) {
            const Slot* env = (const Slot*)(uintptr_t)env_ptr;
            for (int i = 0; i < f.nenv; ++i)
                regstack[base + f.nparams + i] = env[i];
        }
        frames.push_back({&f, base, 0, ret_dst});
    }

    Slot run_function(int fid, const std::vector<Slot>& args) {
        size_t base_frames = frames.size();
        push_frame(fid, args.data(), (int)args.size(), 0, -1);
        Slot result{};
        while (frames.size() > base_frames) {
            Frame& fr = frames.back();
            const VI& vi = fr.fn->code[fr.ip++];
            bump_steps();
            Slot* R = regstack.data() + fr.base;
            switch (vi.k) {
                case VI::K::Lit:
                    R[vi.dst] = vi.lit;
                    break;
                case VI::K::Copy:
                    R[vi.dst] = R[vi.args[0]];
                    break;
                case VI::K::IntArith: {
                    uint64_t x = R[vi.args[0]].a, y = R[vi.args[1]].a;
                    uint64_t r = 0;
                    bool ovf = false;
                    if (vi.sgn) {
                        int64_t sx = (int64_t)x, sy = (int64_t)y, sr = 0;
                        switch (vi.bi) {
                            case BI::Add:
                                ovf = __builtin_add_overflow(sx, sy, &sr);
                                break;
                            case BI::Sub:
                                ovf = __builtin_sub_overflow(sx, sy, &sr);
                                break;
                            case BI::Mul:
                                ovf = __builtin_mul_overflow(sx, sy, &sr);
                                break;
                            case BI::Div:
                                if (sy == 0)
                                    throw RtError(RtErrorKind::DivByZero,
                                                  "division by zero");
                                if (sx == INT64_MIN && sy == -1)
                                    ovf = true;
                                else
                                    sr = sx / sy;
                                break;
                            case BI::Rem:
                                if (sy == 0)
                                    throw RtError(RtErrorKind::DivByZero,
                                                  "division by zero");
                                sr = sx == INT64_MIN && sy == -1 ? 0 : sx % sy;
                                break;
                            default:
                                internal("bad int op");
                        }
                        if (!ovf && vi.width < 64) {
                            int64_t lo = -(int64_t)(1ull << (vi.width - 1));
                            int64_t hi = (int64_t)(1ull << (vi.width - 1)) - 1;
                            ovf = sr < lo || sr > hi;
                        }
                        r = (uint64_t)sr;
                    } else {
                        switch (vi.bi) {
                            case BI::Add:
                                ovf = __builtin_add_overflow(x, y, &r);
                                break;
                            case BI::Sub:
                                ovf = __builtin_sub_overflow(x, y, &r);
                                break;
                            case BI::Mul:
                                ovf = __builtin_mul_overflow(x, y, &r);
                                break;
                            case BI::Div:
                                if (y == 0)
                                    throw RtError(RtErrorKind::DivByZero,
                                                  "division by zero");
                                r = x / y;
                                break;
                            case BI::Rem:
                                if (y == 0)
                                    throw RtError(RtErrorKind::DivByZero,
                                                  "division by zero");
                                r = x % y;
                                break;
                            default:
                                internal("bad int op");
                        }
                        if (!ovf && vi.width < 64)
                            ovf = r >> vi.width;
                    }
                    if (ovf)
                        throw RtError(RtErrorKind::Overflow,
                                      "integer overflow");
                    R[vi.dst].a = r;
                    R[vi.dst].b = 0;
                    break;
                }
                case VI::K::WideArith: {
                    WideInt x = slot_to_wide(vi.opnd_td, R[vi.args[0]]);
                    WideInt y = slot_to_wide(vi.opnd_td, R[vi.args[1]]);
                    WideInt r;
                    switch (vi.bi) {
                        case BI::Add: r = rt::wi_add(x, y); break;
                        case BI::Sub: r = rt::wi_sub(x, y); break;
                        case BI::Mul: r = rt::wi_mul(x, y); break;
                        case BI::Div: r = rt::wi_div(x, y); break;
                        case BI::Rem: r = rt::wi_rem(x, y); break;
                        default: internal("bad wide op");
                    }
                    R[vi.dst] = wide_to_slot(r);
                    break;
                }
                case VI::K::CmpLt: {
                    bool lt;
                    const TypeDescriptor& d = mod.tds[vi.opnd_td];
                    if (d.width <= 64) {
                        lt = d.is_signed ? (int64_t)R[vi.args[0]].a <
                                               (int64_t)R[vi.args[1]].a
                                         : R[vi.args[0]].a < R[vi.args[1]].a;
                    } else {
                        lt = rt::wi_lt(slot_to_wide(vi.opnd_td, R[vi.args[0]]),
                                       slot_to_wide(vi.opnd_td, R[vi.args[1]]));
                    }
                    R[vi.dst] = make_bool(vi.td, lt);
                    break;
                }
                case VI::K::CmpEq:
                    R[vi.dst] = make_bool(
                        vi.td,
                        slot_eq(vi.opnd_td, R[vi.args[0]], R[vi.args[1]]));
                    break;
                case VI::K::Concat: {
                    Slot x = R[vi.args[0]], y = R[vi.args[1]];
                    size_t n = (size_t)x.b + (size_t)y.b;
                    uint8_t* p = arena.alloc(n);
                    memcpy(p, (void*)(uintptr_t)x.a, (size_t)x.b);
                    memcpy(p + x.b, (void*)(uintptr_t)y.a, (size_t)y.b);
                    R[vi.dst].a = (uint64_t)(uintptr_t)p;
                    R[vi.dst].b = n;
                    break;
                }
                case VI::K::Strlen:
                    R[vi.dst].a = R[vi.args[0]].b;
                    R[vi.dst].b = 0;
                    break;
                case VI::K::ToString: {
                    WideInt w = slot_to_wide(vi.opnd_td, R[vi.args[0]]);
                    std::string s = w.to_decimal();
                    uint8_t* p = arena.alloc(s.size());
                    memcpy(p, s.data(), s.size());
                    R[vi.dst].a = (uint64_t)(uintptr_t)p;
                    R[vi.dst].b = s.size();
                    break;
                }
                case VI::K::MapOp:
                    exec_map_op(vi, R);
                    break;
                case VI::K::Call: {
                    Slot clo = R[vi.args[0]];
                    std::vector<Slot> as;
                    for (size_t i = 1; i < vi.args.size(); ++i)
                        as.push_back(R[vi.args[i]]);
                    push_frame((int)clo.a, as.data(), (int)as.size(), clo.b,
                               vi.dst);
                    break;
                }
                case VI::K::MkClo: {
                    Slot* env = nullptr;
                    if (!vi.args.empty()) {
                        env = (Slot*)arena.alloc(vi.args.size() * sizeof(Slot));
                        for (size_t i = 0; i < vi.args.size(); ++i)
                            env[i] = R[vi.args[i]];
                    }
                    R[vi.dst].a = (uint64_t)vi.fn;
                    R[vi.dst].b = (uint64_t)(uintptr_t)env;
                    break;
                }
                case VI::K::EnvPatch: {
                    Slot clo = R[vi.args[0]];
                    ((Slot*)(uintptr_t)clo.b)[vi.env_slot] = R[vi.args[1]];
                    break;
                }
                case VI::K::MkDisp: {
                    Slot* env = nullptr;
                    if (!vi.args.empty()) {
                        env = (Slot*)arena.alloc(vi.args.size() * sizeof(Slot));
                        for (size_t i = 0; i < vi.args.size(); ++i)
                            env[i] = R[vi.args[i]];
                    }
                    R[vi.dst].a = (uint64_t)vi.table;
                    R[vi.dst].b = (uint64_t)(uintptr_t)env;
                    break;
                }
                case VI::K::DispCall: {
                    Slot tbl = R[vi.args[0]];
                    auto& lk = table_lookup[tbl.a];
                    auto it = lk.find(vi.key_td);
                    if (it == lk.end())
                        internal("dispatch table has no entry for type");
                    push_frame(it->second, nullptr, 0, tbl.b, vi.dst);
                    break;
                }
                case VI::K::Alloc: {
                    uint8_t* cell = arena.alloc_cell(vi.cell_size);
                    cell[0] = (uint8_t)vi.tag;
                    for (size_t i = 0; i < vi.fios.size(); ++i)
                        store_field(cell, vi.fios[i], R[vi.args[i]]);
                    R[vi.dst].a = (uint64_t)(uintptr_t)cell;
                    R[vi.dst].b = 0;
                    break;
                }
                case VI::K::GetField: {
                    const uint8_t* cell =
                        (const uint8_t*)(uintptr_t)R[vi.args[0]].a;
                    R[vi.dst] = fix_int(load_field(cell, vi.fio), vi.td);
                    break;
                }
                case VI::K::MkMsg: {
                    auto m = std::make_shared<rt::MsgVal>();
                    for (size_t i = 0; i < vi.args.size(); ++i) {
                        const auto& src = mod.tds[vi.arg_tds[i]].source;
                        if (!src)
                            throw RtError(RtErrorKind::SerializationError,
                                          "message field type unavailable");
                        m->fields.push_back(
                            {vi.names[i], src,
                             to_rval(vi.arg_tds[i], R[vi.args[i]])});
                    }
                    R[vi.dst].a = msgs.size();
                    R[vi.dst].b = 0;
                    msgs.push_back(std::move(m));
                    break;
                }
                case VI::K::LoadGlobal:
                    R[vi.dst] = globals[vi.gidx];
                    break;
                case VI::K::LoadFieldS: {
                    auto* f = st.find(vi.field);
                    if (!f) internal("no state field " + vi.field);
                    R[vi.dst] = from_rval(vi.td, f->value);
                    break;
                }
                case VI::K::StoreFieldS: {
                    auto* f = st.find(vi.field);
                    if (!f) internal("no state field " + vi.field);
                    f->value = to_rval(vi.td, R[vi.args[0]]);
                    break;
                }
                case VI::K::MapGetS: {
                    auto* f = st.find(vi.field);
                    if (!f) internal("no state field " + vi.field);
                    RValPtr key = to_rval(vi.arg_tds[0], R[vi.args[0]]);
                    auto got = rt::map_get(f->value->map, key);
                    int val_td = -1;
                    // result descriptor is Option v; v is its single targ
                    val_td = mod.tds[vi.td].targs[0];
                    R[vi.dst] = make_option(vi.td, got, val_td);
                    break;
                }
                case VI::K::MapPutS: {
                    auto* f = st.find(vi.field);
                    if (!f) internal("no state field " + vi.field);
                    RValPtr key = to_rval(vi.arg_tds[0], R[vi.args[0]]);
                    RValPtr val = to_rval(vi.arg_tds[1], R[vi.args[1]]);
                    f->value = RVal::make_map(
                        rt::map_put(f->value->map, key, val));
                    break;
                }
                case VI::K::Emit: {
                    rt::MsgPtr m = msgs[R[vi.args[0]].a];
                    (vi.is_event ? out_events : out_messages).push_back(m);
                    break;
                }
                case VI::K::Ret: {
                    Slot r = vi.args[0] >= 0 ? R[vi.args[0]] : Slot{};
                    int dst = fr.ret_dst;
                    size_t base = fr.base;
                    frames.pop_back();
                    regstack.resize(base);
                    if (frames.size() > base_frames) {
                        if (dst >= 0)
                            regstack[frames.back().base + dst] = r;
                    } else {
                        result = r;
                    }
                    break;
                }
                case VI::K::Jmp:
                    fr.ip = vi.jmp;
                    break;
                case VI::K::Switch: {
                    const uint8_t* cell =
                        (const uint8_t*)(uintptr_t)R[vi.args[0]].a;
                    int tag = cell[0];
                    int target = tag < (int)vi.sw_targets.size()
                                     ? vi.sw_targets[tag]
                                     : -1;
                    if (target < 0) target = vi.sw_def;
                    if (target < 0) internal("switch fell through");
                    fr.ip = target;
                    break;
                }
            }
        }
        return result;
    }

    void exec_map_op(const VI& vi, Slot* R) {
        switch (vi.bi) {
            case BI::Emp: {
                const auto& kt = mod.tds[vi.arg_tds[0]].source;
                const auto& vt = mod.tds[vi.arg_tds[1]].source;
                if (!kt || !vt) internal("emp without type sources");
                R[vi.dst].a = maps.size();
                R[vi.dst].b = 0;
                maps.push_back(rt::map_empty(kt, vt));
                break;
            }
            case BI::MapPut: {
                auto m = maps[R[vi.args[0]].a];
                RValPtr k = to_rval(vi.arg_tds[0], R[vi.args[1]]);
                RValPtr v = to_rval(vi.arg_tds[1], R[vi.args[2]]);
                R[vi.dst].a = maps.size();
                R[vi.dst].b = 0;
                maps.push_back(rt::map_put(m, k, v));
                break;
            }
            case BI::MapRemove: {
                auto m = maps[R[vi.args[0]].a];
                RValPtr k = to_rval(vi.arg_tds[0], R[vi.args[1]]);
                R[vi.dst].a = maps.size();
                R[vi.dst].b = 0;
                maps.push_back(rt::map_remove(m, k));
                break;
            }
            case BI::MapGet: {
                auto m = maps[R[vi.args[0]].a];
                RValPtr k = to_rval(vi.arg_tds[0], R[vi.args[1]]);
                auto got = rt::map_get(m, k);
                int val_td = mod.tds[vi.td].targs[0];
                R[vi.dst] = make_option(vi.td, got, val_td);
                break;
            }
            case BI::MapContains: {
                auto m = maps[R[vi.args[0]].a];
                RValPtr k = to_rval(vi.arg_tds[0], R[vi.args[1]]);
                R[vi.dst] = make_bool(vi.td, rt::map_contains(m, k));
                break;
            }
            case BI::MapSize: {
                auto m = maps[R[vi.args[0]].a];
                R[vi.dst].a = m->entries.size();
                R[vi.dst].b = 0;
                break;
            }
            default:
                internal("bad map op");
        }
    }

    void init_globals() {
        globals.resize(mod.globals.size());
        for (size_t i = 0; i < mod.globals.size(); ++i)
            globals[i] = run_function(mod.globals[i].init_fn, {});
    }
};

Machine::Machine(const TargetModule& mod, rt::Limits limits)
    : impl(std::make_unique<Impl>(mod, limits)) {}
Machine::~Machine() = default;

void Machine::init() { impl->init_globals(); }

rt::RValPtr Machine::run_main() {
    if (impl->mod.main_fn < 0)
        throw RtError(RtErrorKind::Internal, "module has no main");
    Slot r = impl->run_function(impl->mod.main_fn, {});
    return impl->to_rval(impl->mod.main_td, r);
}

void Machine::set_state(rt::StateStore st) { impl->st = std::move(st); }
rt::StateStore& Machine::state() { return impl->st; }

void Machine::run_field_inits() {
    if (!impl->mod.contract)
        throw RtError(RtErrorKind::Internal, "not a contract module");
    impl->st.fields.clear();
    for (auto& f : impl->mod.contract->fields) {
        Slot s = impl->run_function(f.init_fn, {});
        impl->st.fields.push_back({f.name, impl->mod.tds[f.td].source,
                                   impl->to_rval(f.td, s)});
    }
}

TxResult Machine::run_transition(const std::string& name,
                                 const std::vector<rt::RValPtr>& args) {
    if (!impl->mod.contract)
        throw RtError(RtErrorKind::Internal, "not a contract module");
    const tgt::TTransition* tr = nullptr;
    for (auto& t : impl->mod.contract->transitions)
        if (t.name == name) tr = &t;
    if (!tr)
        throw RtError(RtErrorKind::DeserializationError,
                      "no transition named " + name);
    const tgt::TFunc& fn = impl->mod.funcs[tr->fn];
    if (args.size() != fn.param_tds.size())
        throw RtError(RtErrorKind::DeserializationError,
                      "wrong argument count for transition " + name);
    impl->out_messages.clear();
    impl->out_events.clear();
    std::vector<Slot> slots;
    for (size_t i = 0; i < args.size(); ++i)
        slots.push_back(impl->from_rval(fn.param_tds[i], args[i]));
    impl->run_function(tr->fn, slots);
    return {impl->out_messages, impl->out_events};
}

Arena& Machine::arena() { return impl->arena; }
uint64_t Machine::steps() const { return impl->steps; }
const TargetModule& Machine::module() const { return impl->mod; }

}  // namespace mv::vm
