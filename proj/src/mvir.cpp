#include <sstream>

#include "minivella/parser.hpp"
#include "minivella/target.hpp"

// Textual target-module format (.mvir). Line-oriented, whitespace-separated
// tokens, double-quoted strings. The emitter is deterministic: compiling the
// same program twice yields byte-identical text.

namespace mv::tgt {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

const char* op_name(Op op) {
    switch (op) {
        case Op::LitK: return "lit";
        case Op::Copy: return "copy";
        case Op::Arith: return "arith";
        case Op::MapOp: return "mapop";
        case Op::Call: return "call";
        case Op::MakeClosure: return "closure";
        case Op::EnvPatch: return "envpatch";
        case Op::MakeDispatch: return "dispatchmk";
        case Op::DispatchCall: return "dispatchcall";
        case Op::Alloc: return "alloc";
        case Op::GetField: return "getfield";
        case Op::MakeMsg: return "msg";
        case Op::LoadGlobal: return "loadglobal";
        case Op::LoadField: return "loadfield";
        case Op::StoreField: return "storefield";
        case Op::MapGetS: return "mapgetf";
        case Op::MapPutS: return "mapputf";
        case Op::Emit: return "emit";
    }
    return "?";
}

void emit_reg_list(std::ostream& os, const std::vector<int>& rs) {
    os << "[";
    for (size_t i = 0; i < rs.size(); ++i)
        os << (i ? " r" : "r") << rs[i];
    os << "]";
}

void emit_int_list(std::ostream& os, const std::vector<int>& xs) {
    os << "[";
    for (size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << xs[i];
    os << "]";
}

void emit_instr(std::ostream& os, const TargetModule& m, const TInstr& i) {
    os << "  ";
    if (i.dst >= 0) os << "r" << i.dst << " = ";
    os << op_name(i.op);
    switch (i.op) {
        case Op::LitK: {
            os << " " << i.td << " ";
            switch (i.lit.kind) {
                case Literal::Kind::Int: os << "i " << i.lit.i.to_decimal(); break;
                case Literal::Kind::Str: os << "s " << quote(i.lit.s); break;
                case Literal::Kind::ByStrX: {
                    static const char* hx = "0123456789abcdef";
                    os << "h 0x";
                    for (uint8_t b : i.lit.bytes)
                        os << hx[b >> 4] << hx[b & 0xf];
                    break;
                }
            }
            return;
        }
        case Op::Copy:
            os << " r" << i.args[0] << " : " << i.td;
            return;
        case Op::Arith:
        case Op::MapOp:
            os << " " << builtin_name(i.bi) << " ";
            emit_reg_list(os, i.args);
            os << " tys ";
            emit_int_list(os, i.arg_tds);
            os << " : " << i.td;
            return;
        case Op::Call:
            os << " ";
            emit_reg_list(os, i.args);
            os << " : " << i.td;
            return;
        case Op::MakeClosure:
            os << " fn " << i.fn << " ";
            emit_reg_list(os, i.args);
            os << " : " << i.td;
            return;
        case Op::EnvPatch:
            os << " r" << i.args[0] << " slot " << i.env_slot << " r"
               << i.args[1];
            return;
        case Op::MakeDispatch:
            os << " " << i.table << " ";
            emit_reg_list(os, i.args);
            os << " : " << i.td;
            return;
        case Op::DispatchCall:
            os << " r" << i.args[0] << " key " << i.key_td << " : " << i.td;
            return;
        case Op::Alloc:
            os << " " << i.td << " tag " << i.tag << " ";
            emit_reg_list(os, i.args);
            return;
        case Op::GetField:
            os << " r" << i.args[0] << " adt " << i.adt_td << " tag " << i.tag
               << " idx " << i.index << " : " << i.td;
            return;
        case Op::MakeMsg: {
            os << " [";
            for (size_t k = 0; k < i.args.size(); ++k)
                os << (k ? " " : "") << quote(i.names[k]) << " r" << i.args[k]
                   << " " << i.arg_tds[k];
            os << "] : " << i.td;
            return;
        }
        case Op::LoadGlobal:
            os << " " << i.gidx << " : " << i.td;
            return;
        case Op::LoadField:
            os << " " << quote(i.field) << " : " << i.td;
            return;
        case Op::StoreField:
            os << " " << quote(i.field) << " r" << i.args[0] << " : " << i.td;
            return;
        case Op::MapGetS:
            os << " " << quote(i.field) << " r" << i.args[0] << " tys ";
            emit_int_list(os, i.arg_tds);
            os << " : " << i.td;
            return;
        case Op::MapPutS:
            os << " " << quote(i.field) << " r" << i.args[0] << " r"
               << i.args[1] << " tys ";
            emit_int_list(os, i.arg_tds);
            return;
        case Op::Emit:
            os << (i.is_event ? " event r" : " send r") << i.args[0];
            return;
    }
    (void)m;
}

}  // namespace

std::string emit_text(const TargetModule& m) {
    std::ostringstream os;
    os << "; minivella target module\n";
    for (auto& a : m.adts) {
        os << "adt " << a.name << " [";
        for (size_t i = 0; i < a.ty_params.size(); ++i)
            os << (i ? " " : "") << a.ty_params[i];
        os << "] =";
        for (size_t ci = 0; ci < a.ctors.size(); ++ci) {
            os << (ci ? " | " : " ") << a.ctors[ci].name << " [";
            for (size_t fi = 0; fi < a.ctors[ci].field_types.size(); ++fi)
                os << (fi ? " " : "")
                   << quote(show_type(a.ctors[ci].field_types[fi]));
            os << "]";
        }
        os << "\n";
    }
    for (size_t i = 0; i < m.tds.size(); ++i) {
        const TypeDescriptor& d = m.tds[i];
        os << "tydescr " << i << " = ";
        switch (d.kind) {
            case TypeDescriptor::Kind::Int:
                os << "int " << (d.is_signed ? "i" : "u") << d.width;
                break;
            case TypeDescriptor::Kind::String:
                os << "string";
                break;
            case TypeDescriptor::Kind::ByStr:
                os << "bystr";
                break;
            case TypeDescriptor::Kind::ByStrX:
                os << "bystrx " << d.byte_len;
                break;
            case TypeDescriptor::Kind::Adt: {
                os << "adt " << quote(d.show) << " " << d.adt_name << " ";
                emit_int_list(os, d.targs);
                os << " {";
                for (size_t ci = 0; ci < d.ctors.size(); ++ci) {
                    os << (ci ? " | " : " ") << d.ctors[ci].name << " ";
                    emit_int_list(os, d.ctors[ci].field_tds);
                }
                os << " }";
                break;
            }
            case TypeDescriptor::Kind::Map:
                os << "map " << d.key_td << " " << d.val_td;
                break;
            case TypeDescriptor::Kind::Function:
                os << "fun " << quote(d.show) << " ";
                emit_int_list(os, d.param_tds);
                os << " -> " << d.ret_td;
                break;
            case TypeDescriptor::Kind::Message:
                os << "message";
                break;
        }
        os << "\n";
    }
    for (auto& t : m.tables) {
        os << "dispatch " << t.id << " = [";
        for (size_t i = 0; i < t.entries.size(); ++i)
            os << (i ? " " : "") << t.entries[i].first << " -> "
               << t.entries[i].second;
        os << "] env ";
        emit_int_list(os, t.env_tds);
        os << "\n";
    }
    for (auto& f : m.funcs) {
        os << "define fn " << f.id << " " << quote(f.name) << " params ";
        emit_int_list(os, f.param_tds);
        os << " env ";
        emit_int_list(os, f.env_tds);
        os << " ret " << f.ret_td << " sret " << (f.sret ? 1 : 0) << " nregs "
           << f.nregs << " {\n";
        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            const TBlock& b = f.blocks[bi];
            os << "b" << bi << ":\n";
            for (auto& ins : b.instrs) {
                emit_instr(os, m, ins);
                os << "\n";
            }
            switch (b.term) {
                case TBlock::Term::Ret:
                    os << "  ret r" << b.ret_reg << "\n";
                    break;
                case TBlock::Term::Jmp:
                    os << "  jmp b" << b.jmp_to << "\n";
                    break;
                case TBlock::Term::Switch: {
                    os << "  switch r" << b.sw_reg << " [";
                    for (size_t k = 0; k < b.cases.size(); ++k)
                        os << (k ? " " : "") << b.cases[k].first << " -> b"
                           << b.cases[k].second;
                    os << "]";
                    if (b.sw_default >= 0) os << " default b" << b.sw_default;
                    os << "\n";
                    break;
                }
            }
        }
        os << "}\n";
    }
    for (auto& g : m.globals)
        os << "global " << g.name << " : " << g.td << " = fn " << g.init_fn
           << "\n";
    if (m.contract) {
        os << "contract " << m.contract->name << "\n";
        for (auto& f : m.contract->fields)
            os << "field " << f.name << " : " << f.td << " = fn " << f.init_fn
               << "\n";
        for (auto& t : m.contract->transitions) {
            os << "transition " << t.name << " = fn " << t.fn << " [";
            for (size_t i = 0; i < t.param_names.size(); ++i)
                os << (i ? " " : "") << t.param_names[i];
            os << "]\n";
        }
    }
    if (m.main_fn >= 0)
        os << "main = fn " << m.main_fn << " : " << m.main_td << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// parser

namespace {

struct Lex {
    std::string text;
    size_t pos = 0;
    int line = 1;

    [[noreturn]] void die(const std::string& msg) {
        throw CompileError("mvir:" + std::to_string(line) + ": " + msg);
    }

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '\n') {
                ++line;
                ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos;
            } else if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    std::string next() {
        skip_ws();
        if (pos >= text.size()) die("unexpected end of file");
        char c = text[pos];
        if (c == '"') {
            ++pos;
            std::string s;
            while (pos < text.size() && text[pos] != '"') {
                char d = text[pos++];
                if (d == '\\' && pos < text.size()) {
                    char e = text[pos++];
                    switch (e) {
                        case 'n': s += '\n'; break;
                        case 't': s += '\t'; break;
                        case 'r': s += '\r'; break;
                        default: s += e;
                    }
                } else {
                    s += d;
                }
            }
            if (pos >= text.size()) die("unterminated string");
            ++pos;
            return "\"" + s;  // marker: leading quote = string token
        }
        std::string s;
        auto punct = [](char d) {
            return d == '[' || d == ']' || d == '{' || d == '}' || d == ':' ||
                   d == '=' || d == '|';
        };
        if (punct(c)) {
            ++pos;
            return std::string(1, c);
        }
        while (pos < text.size() && !isspace((unsigned char)text[pos]) &&
               !punct(text[pos]))
            s += text[pos++];
        if (s.empty()) die("bad character");
        return s;
    }

    std::string peek() {
        size_t p = pos;
        int l = line;
        std::string t = eof() ? "" : next();
        pos = p;
        line = l;
        return t;
    }

    void expect(const std::string& t) {
        std::string g = next();
        if (g != t) die("expected '" + t + "', got '" + g + "'");
    }

    int num() {
        std::string t = next();
        try {
            return std::stoi(t);
        } catch (...) {
            die("expected number, got '" + t + "'");
        }
    }

    std::string str() {
        std::string t = next();
        if (t.empty() || t[0] != '"') die("expected string");
        return t.substr(1);
    }

    int reg() {
        std::string t = next();
        if (t.size() < 2 || t[0] != 'r') die("expected register, got '" + t + "'");
        return std::stoi(t.substr(1));
    }

    int blk() {
        std::string t = next();
        if (t.size() < 2 || t[0] != 'b') die("expected block, got '" + t + "'");
        return std::stoi(t.substr(1));
    }

    std::vector<int> reg_list() {
        expect("[");
        std::vector<int> out;
        while (peek() != "]") out.push_back(reg());
        expect("]");
        return out;
    }

    std::vector<int> int_list() {
        expect("[");
        std::vector<int> out;
        while (peek() != "]") out.push_back(num());
        expect("]");
        return out;
    }
};

TypePtr reparse(const std::string& show) {
    auto t = parse_type_string(show);
    return t ? *t : nullptr;
}

}  // namespace

TargetModule parse_text(const std::string& text) {
    Lex lx{text};
    TargetModule m;
    while (!lx.eof()) {
        std::string kw = lx.next();
        if (kw == "adt") {
            ADTDecl d;
            d.name = lx.next();
            lx.expect("[");
            while (lx.peek() != "]") d.ty_params.push_back(lx.next());
            lx.expect("]");
            lx.expect("=");
            for (;;) {
                ADTCtor c;
                c.name = lx.next();
                lx.expect("[");
                while (lx.peek() != "]") {
                    TypePtr t = reparse(lx.str());
                    if (!t) lx.die("unparsable field type");
                    c.field_types.push_back(t);
                }
                lx.expect("]");
                d.ctors.push_back(std::move(c));
                if (lx.peek() != "|") break;
                lx.expect("|");
            }
            m.adts.push_back(std::move(d));
        } else if (kw == "tydescr") {
            int idx = lx.num();
            if (idx != (int)m.tds.size()) lx.die("descriptor out of order");
            lx.expect("=");
            TypeDescriptor d;
            std::string kind = lx.next();
            if (kind == "int") {
                d.kind = TypeDescriptor::Kind::Int;
                std::string w = lx.next();
                d.is_signed = w[0] == 'i';
                d.width = std::stoi(w.substr(1));
                d.source = SType::make_int(d.is_signed, d.width);
            } else if (kind == "string") {
                d.kind = TypeDescriptor::Kind::String;
                d.source = SType::make_string();
            } else if (kind == "bystr") {
                d.kind = TypeDescriptor::Kind::ByStr;
                d.source = SType::make_bystr();
            } else if (kind == "bystrx") {
                d.kind = TypeDescriptor::Kind::ByStrX;
                d.byte_len = lx.num();
                d.source = SType::make_bystrx(d.byte_len);
            } else if (kind == "adt") {
                d.kind = TypeDescriptor::Kind::Adt;
                d.show = lx.str();
                d.adt_name = lx.next();
                d.targs = lx.int_list();
                d.source = reparse(d.show);
                lx.expect("{");
                int tag = 0;
                for (;;) {
                    CtorInfo c;
                    c.name = lx.next();
                    c.tag = tag++;
                    c.field_tds = lx.int_list();
                    d.ctors.push_back(std::move(c));
                    if (lx.peek() != "|") break;
                    lx.expect("|");
                }
                lx.expect("}");
            } else if (kind == "map") {
                d.kind = TypeDescriptor::Kind::Map;
                d.key_td = lx.num();
                d.val_td = lx.num();
            } else if (kind == "fun") {
                d.kind = TypeDescriptor::Kind::Function;
                d.show = lx.str();
                d.param_tds = lx.int_list();
                lx.expect("->");
                d.ret_td = lx.num();
                d.source = reparse(d.show);  // may stay null; fine
            } else if (kind == "message") {
                d.kind = TypeDescriptor::Kind::Message;
                d.source = SType::make_message();
            } else {
                lx.die("unknown descriptor kind " + kind);
            }
            if (d.show.empty() && d.source) d.show = show_type(d.source);
            m.tds.push_back(std::move(d));
        } else if (kw == "dispatch") {
            TDispatchTable t;
            t.id = lx.num();
            lx.expect("=");
            lx.expect("[");
            while (lx.peek() != "]") {
                int key = lx.num();
                lx.expect("->");
                int fn = lx.num();
                t.entries.emplace_back(key, fn);
            }
            lx.expect("]");
            lx.expect("env");
            t.env_tds = lx.int_list();
            m.tables.push_back(std::move(t));
        } else if (kw == "define") {
            lx.expect("fn");
            TFunc f;
            f.id = lx.num();
            f.name = lx.str();
            lx.expect("params");
            f.param_tds = lx.int_list();
            lx.expect("env");
            f.env_tds = lx.int_list();
            lx.expect("ret");
            f.ret_td = lx.num();
            lx.expect("sret");
            f.sret = lx.num() != 0;
            lx.expect("nregs");
            f.nregs = lx.num();
            lx.expect("{");
            while (lx.peek() != "}") {
                std::string lbl = lx.next();  // bN
                lx.expect(":");
                if (lbl.empty() || lbl[0] != 'b') lx.die("expected block label");
                TBlock b;
                bool terminated = false;
                while (!terminated) {
                    std::string t = lx.next();
                    TInstr i;
                    int dst = -1;
                    if (!t.empty() && t[0] == 'r' && lx.peek() == "=") {
                        dst = std::stoi(t.substr(1));
                        lx.expect("=");
                        t = lx.next();
                    }
                    i.dst = dst;
                    if (t == "ret") {
                        b.term = TBlock::Term::Ret;
                        b.ret_reg = lx.reg();
                        terminated = true;
                    } else if (t == "jmp") {
                        b.term = TBlock::Term::Jmp;
                        b.jmp_to = lx.blk();
                        terminated = true;
                    } else if (t == "switch") {
                        b.term = TBlock::Term::Switch;
                        b.sw_reg = lx.reg();
                        lx.expect("[");
                        while (lx.peek() != "]") {
                            int tag = lx.num();
                            lx.expect("->");
                            b.cases.emplace_back(tag, lx.blk());
                        }
                        lx.expect("]");
                        if (lx.peek() == "default") {
                            lx.expect("default");
                            b.sw_default = lx.blk();
                        }
                        terminated = true;
                    } else if (t == "lit") {
                        i.op = Op::LitK;
                        i.td = lx.num();
                        std::string k = lx.next();
                        if (k == "i") {
                            if (i.td < 0 || i.td >= (int)m.tds.size() ||
                                m.tds[i.td].kind != TypeDescriptor::Kind::Int)
                                lx.die("int literal without int descriptor");
                            auto w = rt::WideInt::from_decimal(
                                m.tds[i.td].is_signed, m.tds[i.td].width,
                                lx.next());
                            if (!w) lx.die("bad integer literal");
                            i.lit = Literal::make_int(*w);
                        } else if (k == "s") {
                            i.lit = Literal::make_str(lx.str());
                        } else if (k == "h") {
                            std::string h = lx.next();
                            if (h.size() < 2 || h[0] != '0' || h[1] != 'x')
                                lx.die("bad hex literal");
                            std::vector<uint8_t> bs;
                            auto nib = [&](char c) -> int {
                                if (c >= '0' && c <= '9') return c - '0';
                                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                                lx.die("bad hex digit");
                            };
                            for (size_t p = 2; p + 1 < h.size(); p += 2)
                                bs.push_back((uint8_t)((nib(h[p]) << 4) |
                                                       nib(h[p + 1])));
                            i.lit = Literal::make_bystrx(std::move(bs));
                        } else {
                            lx.die("bad literal kind " + k);
                        }
                        b.instrs.push_back(std::move(i));
                    } else {
                        if (t == "copy") {
                            i.op = Op::Copy;
                            i.args = {lx.reg()};
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "arith" || t == "mapop") {
                            i.op = t == "arith" ? Op::Arith : Op::MapOp;
                            auto bi = builtin_by_name(lx.next());
                            if (!bi) lx.die("unknown builtin");
                            i.bi = *bi;
                            i.args = lx.reg_list();
                            lx.expect("tys");
                            i.arg_tds = lx.int_list();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "call") {
                            i.op = Op::Call;
                            i.args = lx.reg_list();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "closure") {
                            i.op = Op::MakeClosure;
                            lx.expect("fn");
                            i.fn = lx.num();
                            i.args = lx.reg_list();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "envpatch") {
                            i.op = Op::EnvPatch;
                            int a = lx.reg();
                            lx.expect("slot");
                            i.env_slot = lx.num();
                            i.args = {a, lx.reg()};
                        } else if (t == "dispatchmk") {
                            i.op = Op::MakeDispatch;
                            i.table = lx.num();
                            i.args = lx.reg_list();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "dispatchcall") {
                            i.op = Op::DispatchCall;
                            i.args = {lx.reg()};
                            lx.expect("key");
                            i.key_td = lx.num();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "alloc") {
                            i.op = Op::Alloc;
                            i.td = lx.num();
                            lx.expect("tag");
                            i.tag = lx.num();
                            i.args = lx.reg_list();
                        } else if (t == "getfield") {
                            i.op = Op::GetField;
                            i.args = {lx.reg()};
                            lx.expect("adt");
                            i.adt_td = lx.num();
                            lx.expect("tag");
                            i.tag = lx.num();
                            lx.expect("idx");
                            i.index = lx.num();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "msg") {
                            i.op = Op::MakeMsg;
                            lx.expect("[");
                            while (lx.peek() != "]") {
                                i.names.push_back(lx.str());
                                i.args.push_back(lx.reg());
                                i.arg_tds.push_back(lx.num());
                            }
                            lx.expect("]");
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "loadglobal") {
                            i.op = Op::LoadGlobal;
                            i.gidx = lx.num();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "loadfield") {
                            i.op = Op::LoadField;
                            i.field = lx.str();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "storefield") {
                            i.op = Op::StoreField;
                            i.field = lx.str();
                            i.args = {lx.reg()};
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "mapgetf") {
                            i.op = Op::MapGetS;
                            i.field = lx.str();
                            i.args = {lx.reg()};
                            lx.expect("tys");
                            i.arg_tds = lx.int_list();
                            lx.expect(":");
                            i.td = lx.num();
                        } else if (t == "mapputf") {
                            i.op = Op::MapPutS;
                            i.field = lx.str();
                            i.args = {lx.reg()};
                            i.args.push_back(lx.reg());
                            lx.expect("tys");
                            i.arg_tds = lx.int_list();
                        } else if (t == "emit") {
                            i.op = Op::Emit;
                            std::string k = lx.next();
                            i.is_event = k == "event";
                            i.args = {lx.reg()};
                        } else {
                            lx.die("unknown instruction " + t);
                        }
                        b.instrs.push_back(std::move(i));
                    }
                }
                f.blocks.push_back(std::move(b));
            }
            lx.expect("}");
            if (f.id != (int)m.funcs.size()) lx.die("function out of order");
            m.funcs.push_back(std::move(f));
        } else if (kw == "global") {
            TGlobal g;
            g.name = lx.next();
            lx.expect(":");
            g.td = lx.num();
            lx.expect("=");
            lx.expect("fn");
            g.init_fn = lx.num();
            m.globals.push_back(std::move(g));
        } else if (kw == "contract") {
            TContract c;
            c.name = lx.next();
            m.contract = std::move(c);
        } else if (kw == "field") {
            if (!m.contract) lx.die("field outside contract");
            TField f;
            f.name = lx.next();
            lx.expect(":");
            f.td = lx.num();
            lx.expect("=");
            lx.expect("fn");
            f.init_fn = lx.num();
            m.contract->fields.push_back(std::move(f));
        } else if (kw == "transition") {
            if (!m.contract) lx.die("transition outside contract");
            TTransition t;
            t.name = lx.next();
            lx.expect("=");
            lx.expect("fn");
            t.fn = lx.num();
            lx.expect("[");
            while (lx.peek() != "]") t.param_names.push_back(lx.next());
            lx.expect("]");
            m.contract->transitions.push_back(std::move(t));
        } else if (kw == "main") {
            lx.expect("=");
            lx.expect("fn");
            m.main_fn = lx.num();
            lx.expect(":");
            m.main_td = lx.num();
        } else {
            lx.die("unknown directive " + kw);
        }
    }
    // map descriptors may reference later entries; iterate to a fixpoint
    for (size_t round = 0; round <= m.tds.size(); ++round) {
        bool changed = false;
        for (auto& d : m.tds) {
            if (d.kind == TypeDescriptor::Kind::Map && d.source == nullptr &&
                d.key_td >= 0 && d.key_td < (int)m.tds.size() &&
                d.val_td >= 0 && d.val_td < (int)m.tds.size() &&
                m.tds[d.key_td].source && m.tds[d.val_td].source) {
                d.source = SType::make_map(m.tds[d.key_td].source,
                                           m.tds[d.val_td].source);
                changed = true;
            }
        }
        if (!changed) break;
    }
    for (auto& d : m.tds)
        if (d.show.empty() && d.source) d.show = show_type(d.source);
    compute_ctor_layouts(m.tds);
    return m;
}

}  // namespace mv::tgt
