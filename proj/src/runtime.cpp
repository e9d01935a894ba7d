#include "minivella/runtime.hpp"

#include "minivella/parser.hpp"

namespace mv::rt {

using nlohmann::json;
using nlohmann::ordered_json;

RValPtr RVal::make_int(WideInt v) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Int;
    r->i = v;
    return r;
}
RValPtr RVal::make_str(std::string v) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Str;
    r->s = std::move(v);
    return r;
}
RValPtr RVal::make_bytes(std::vector<uint8_t> v) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Bytes;
    r->bytes = std::move(v);
    return r;
}
RValPtr RVal::make_adt(std::string ctor, int tag, std::vector<RValPtr> fs) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Adt;
    r->ctor = std::move(ctor);
    r->tag = tag;
    r->fields = std::move(fs);
    return r;
}
RValPtr RVal::make_map(MapPtr m) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Map;
    r->map = std::move(m);
    return r;
}
RValPtr RVal::make_msg(MsgPtr m) {
    auto r = std::make_shared<RVal>();
    r->kind = Kind::Msg;
    r->msg = std::move(m);
    return r;
}

bool rval_equal(const RValPtr& a, const RValPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case RVal::Kind::Int:
            return wi_eq(a->i, b->i);
        case RVal::Kind::Str:
            return a->s == b->s;
        case RVal::Kind::Bytes:
            return a->bytes == b->bytes;
        case RVal::Kind::Adt: {
            if (a->tag != b->tag || a->fields.size() != b->fields.size())
                return false;
            for (size_t i = 0; i < a->fields.size(); ++i)
                if (!rval_equal(a->fields[i], b->fields[i])) return false;
            return true;
        }
        case RVal::Kind::Map: {
            if (a->map->entries.size() != b->map->entries.size()) return false;
            auto it = b->map->entries.begin();
            for (auto& [k, kv] : a->map->entries) {
                if (it->first != k || !rval_equal(kv.second, it->second.second))
                    return false;
                ++it;
            }
            return true;
        }
        case RVal::Kind::Msg:
            return false;  // messages are never compared
    }
    return false;
}

// ---------------------------------------------------------------------------

std::string bytes_to_hex(const std::vector<uint8_t>& b) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (uint8_t c : b) {
        s += digits[c >> 4];
        s += digits[c & 0xf];
    }
    return s;
}

std::optional<std::vector<uint8_t>> hex_to_bytes(const std::string& s) {
    if (s.size() < 2 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        return std::nullopt;
    if (s.size() % 2 != 0) return std::nullopt;
    std::vector<uint8_t> out;
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (size_t i = 2; i < s.size(); i += 2) {
        int hi = nib(s[i]), lo = nib(s[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back((uint8_t)((hi << 4) | lo));
    }
    return out;
}

ordered_json serialize_value(const AdtRegistry& reg, const TypePtr& t,
                             const RValPtr& v) {
    switch (t->kind) {
        case TyKind::Int:
            return v->i.to_decimal();
        case TyKind::String:
            return v->s;
        case TyKind::ByStr:
        case TyKind::ByStrX:
            return bytes_to_hex(v->bytes);
        case TyKind::Adt: {
            const ADTDecl* decl = reg.find_adt(t->name);
            if (!decl)
                throw RtError(RtErrorKind::SerializationError,
                              "unknown type " + t->name);
            ordered_json j;
            j["constructor"] = v->ctor;
            ordered_json ats = ordered_json::array();
            for (auto& a : t->args) ats.push_back(show_type(a));
            j["argtypes"] = std::move(ats);
            ordered_json args = ordered_json::array();
            const ADTCtor& c = decl->ctors[v->tag];
            for (size_t i = 0; i < v->fields.size(); ++i) {
                TypePtr ft = c.field_types[i];
                for (size_t k = 0; k < decl->ty_params.size(); ++k)
                    ft = subst_tyvar(ft, decl->ty_params[k], t->args[k]);
                args.push_back(serialize_value(reg, ft, v->fields[i]));
            }
            j["arguments"] = std::move(args);
            return j;
        }
        case TyKind::Map: {
            ordered_json j = ordered_json::array();
            for (auto& [k, kv] : v->map->entries) {
                ordered_json e;
                e["key"] = serialize_value(reg, t->a, kv.first);
                e["val"] = serialize_value(reg, t->b, kv.second);
                j.push_back(std::move(e));
            }
            return j;
        }
        case TyKind::Message:
            return message_to_json(reg, v->msg);
        default:
            throw RtError(RtErrorKind::SerializationError,
                          "value of type " + show_type(t) +
                              " is not serializable");
    }
}

RValPtr deserialize_value(const AdtRegistry& reg, const TypePtr& t,
                          const json& j) {
    auto fail = [&](const std::string& why) -> RValPtr {
        throw RtError(RtErrorKind::DeserializationError,
                      why + " for type " + show_type(t));
    };
    switch (t->kind) {
        case TyKind::Int: {
            if (!j.is_string()) return fail("expected decimal string");
            auto w = WideInt::from_decimal(t->is_signed, t->width,
                                           j.get<std::string>());
            if (!w) return fail("bad integer literal");
            return RVal::make_int(*w);
        }
        case TyKind::String:
            if (!j.is_string()) return fail("expected string");
            return RVal::make_str(j.get<std::string>());
        case TyKind::ByStr:
        case TyKind::ByStrX: {
            if (!j.is_string()) return fail("expected hex string");
            auto b = hex_to_bytes(j.get<std::string>());
            if (!b) return fail("bad hex literal");
            if (t->kind == TyKind::ByStrX && (int)b->size() != t->byte_len)
                return fail("hex literal has wrong length");
            return RVal::make_bytes(std::move(*b));
        }
        case TyKind::Adt: {
            const ADTDecl* decl = reg.find_adt(t->name);
            if (!decl || !j.is_object() || !j.contains("constructor"))
                return fail("expected constructor object");
            std::string cname = j["constructor"].get<std::string>();
            int tag = -1;
            for (size_t i = 0; i < decl->ctors.size(); ++i)
                if (decl->ctors[i].name == cname) tag = (int)i;
            if (tag < 0) return fail("unknown constructor " + cname);
            const ADTCtor& c = decl->ctors[tag];
            const json& args = j.contains("arguments") ? j["arguments"]
                                                       : json::array();
            if (!args.is_array() || args.size() != c.field_types.size())
                return fail("wrong argument count for " + cname);
            std::vector<RValPtr> fields;
            for (size_t i = 0; i < c.field_types.size(); ++i) {
                TypePtr ft = c.field_types[i];
                for (size_t k = 0; k < decl->ty_params.size(); ++k)
                    ft = subst_tyvar(ft, decl->ty_params[k], t->args[k]);
                fields.push_back(deserialize_value(reg, ft, args[i]));
            }
            return RVal::make_adt(cname, tag, std::move(fields));
        }
        case TyKind::Map: {
            if (!j.is_array()) return fail("expected entry array");
            auto m = std::make_shared<MapVal>();
            m->key_ty = t->a;
            m->val_ty = t->b;
            for (auto& e : j) {
                if (!e.is_object() || !e.contains("key") || !e.contains("val"))
                    return fail("bad map entry");
                RValPtr k = deserialize_value(reg, t->a, e["key"]);
                RValPtr v = deserialize_value(reg, t->b, e["val"]);
                m->entries[canonical_key(t->a, k)] = {k, v};
            }
            return RVal::make_map(std::move(m));
        }
        default:
            return fail("not deserializable");
    }
}

std::string canonical_key(const TypePtr& key_ty, const RValPtr& k) {
    switch (key_ty->kind) {
        case TyKind::Int:
            // left-pad so lexicographic order matches numeric order is not
            // required; keys only need a deterministic total order
            return k->i.to_decimal();
        case TyKind::String:
            return k->s;
        case TyKind::ByStr:
        case TyKind::ByStrX:
            return bytes_to_hex(k->bytes);
        default:
            throw RtError(RtErrorKind::Internal, "non-primitive map key");
    }
}

// ---------------------------------------------------------------------------

MapPtr map_empty(TypePtr key_ty, TypePtr val_ty) {
    auto m = std::make_shared<MapVal>();
    m->key_ty = std::move(key_ty);
    m->val_ty = std::move(val_ty);
    return m;
}

MapPtr map_put(const MapPtr& m, const RValPtr& k, const RValPtr& v) {
    auto n = std::make_shared<MapVal>(*m);
    n->entries[canonical_key(m->key_ty, k)] = {k, v};
    return n;
}

MapPtr map_remove(const MapPtr& m, const RValPtr& k) {
    auto n = std::make_shared<MapVal>(*m);
    n->entries.erase(canonical_key(m->key_ty, k));
    return n;
}

std::optional<RValPtr> map_get(const MapPtr& m, const RValPtr& k) {
    auto it = m->entries.find(canonical_key(m->key_ty, k));
    if (it == m->entries.end()) return std::nullopt;
    return it->second.second;
}

bool map_contains(const MapPtr& m, const RValPtr& k) {
    return m->entries.count(canonical_key(m->key_ty, k)) != 0;
}

RValPtr builtin_to_string(const RValPtr& v) {
    return RVal::make_str(v->i.to_decimal());
}

// ---------------------------------------------------------------------------

StateField* StateStore::find(const std::string& name) {
    for (auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}
const StateField* StateStore::find(const std::string& name) const {
    for (auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}

ordered_json state_to_json(const AdtRegistry& reg, const StateStore& st) {
    ordered_json fields = ordered_json::array();
    for (auto& f : st.fields) {
        ordered_json e;
        e["vname"] = f.name;
        e["type"] = show_type(f.ty);
        e["value"] = serialize_value(reg, f.ty, f.value);
        fields.push_back(std::move(e));
    }
    ordered_json j;
    j["fields"] = std::move(fields);
    return j;
}

StateStore state_from_json(
    const AdtRegistry& reg, const json& j,
    const std::vector<std::pair<std::string, TypePtr>>& declared) {
    auto fail = [](const std::string& why) -> StateStore {
        throw RtError(RtErrorKind::DeserializationError, why);
    };
    if (!j.is_object() || !j.contains("fields") || !j["fields"].is_array())
        return fail("state: expected {\"fields\": [...]}");
    StateStore st;
    for (auto& [name, ty] : declared) {
        const json* found = nullptr;
        for (auto& e : j["fields"])
            if (e.is_object() && e.value("vname", "") == name) found = &e;
        if (!found) return fail("state: missing field " + name);
        if (found->contains("type") &&
            (*found)["type"].get<std::string>() != show_type(ty))
            return fail("state: field " + name + " has type " +
                        (*found)["type"].get<std::string>() + ", declared " +
                        show_type(ty));
        st.fields.push_back(
            {name, ty, deserialize_value(reg, ty, (*found)["value"])});
    }
    return st;
}

Incoming message_from_json(const AdtRegistry& reg, const json& j) {
    auto fail = [](const std::string& why) -> Incoming {
        throw RtError(RtErrorKind::DeserializationError, why);
    };
    if (!j.is_object() || !j.contains("_tag"))
        return fail("message: expected {\"_tag\", \"params\"}");
    Incoming in;
    in.tag = j["_tag"].get<std::string>();
    if (j.contains("params")) {
        if (!j["params"].is_array()) return fail("message: bad params");
        for (auto& e : j["params"]) {
            if (!e.is_object() || !e.contains("vname") || !e.contains("type") ||
                !e.contains("value"))
                return fail("message: bad param entry");
            auto ty = parse_type_string(e["type"].get<std::string>());
            if (!ty)
                return fail("message: unparsable type " +
                            e["type"].get<std::string>());
            in.params.push_back({e["vname"].get<std::string>(), *ty,
                                 deserialize_value(reg, *ty, e["value"])});
        }
    }
    return in;
}

ordered_json message_to_json(const AdtRegistry& reg, const MsgPtr& m) {
    ordered_json j;
    std::string tag;
    for (auto& f : m->fields)
        if (f.name == "_tag" && f.value->kind == RVal::Kind::Str) tag = f.value->s;
    j["_tag"] = tag;
    ordered_json params = ordered_json::array();
    for (auto& f : m->fields) {
        if (f.name == "_tag") continue;
        ordered_json e;
        e["vname"] = f.name;
        e["type"] = show_type(f.ty);
        e["value"] = serialize_value(reg, f.ty, f.value);
        params.push_back(std::move(e));
    }
    j["params"] = std::move(params);
    return j;
}

}  // namespace mv::rt
