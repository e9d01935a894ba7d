#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minivella/ast.hpp"
#include "minivella/types.hpp"
#include "minivella/wideint.hpp"

#include "json.hpp"

// Engine-independent runtime values and the canonical serialization shared
// by the interpreter and the VM. Both engines convert to this representation
// at the boundaries (map operations, messages, state, program output), which
// is what makes their outputs byte-identical.

namespace mv::rt {

struct RVal;
using RValPtr = std::shared_ptr<const RVal>;

// Map payload: ordered by the canonical serialization of the key, which
// fixes iteration (and output) order across engines.
struct MapVal {
    TypePtr key_ty, val_ty;
    std::map<std::string, std::pair<RValPtr, RValPtr>> entries;  // key bytes -> (k, v)
};
using MapPtr = std::shared_ptr<const MapVal>;

struct MsgField {
    std::string name;
    TypePtr ty;
    RValPtr value;
};

struct MsgVal {
    std::vector<MsgField> fields;
};
using MsgPtr = std::shared_ptr<const MsgVal>;

struct RVal {
    enum class Kind { Int, Str, Bytes, Adt, Map, Msg };
    Kind kind = Kind::Int;
    WideInt i;                    // Int
    std::string s;                // Str
    std::vector<uint8_t> bytes;   // Bytes (ByStr / ByStrX)
    std::string ctor;             // Adt
    int tag = 0;                  // Adt: constructor index
    std::vector<RValPtr> fields;  // Adt
    MapPtr map;                   // Map
    MsgPtr msg;                   // Msg

    static RValPtr make_int(WideInt v);
    static RValPtr make_str(std::string v);
    static RValPtr make_bytes(std::vector<uint8_t> v);
    static RValPtr make_adt(std::string ctor, int tag, std::vector<RValPtr> fs);
    static RValPtr make_map(MapPtr m);
    static RValPtr make_msg(MsgPtr m);
};

// Structural equality (for the eq builtin on primitive types).
bool rval_equal(const RValPtr& a, const RValPtr& b);

// --- canonical serialization --------------------------------------------
// Integers print as decimal strings, byte strings as lowercase 0x hex,
// ADT values as {"constructor", "argtypes", "arguments"}, maps as arrays of
// {"key", "val"} in canonical key order. Function-typed values cannot be
// serialized and raise RtError(SerializationError).

nlohmann::ordered_json serialize_value(const AdtRegistry& reg,
                                       const TypePtr& t, const RValPtr& v);
RValPtr deserialize_value(const AdtRegistry& reg, const TypePtr& t,
                          const nlohmann::json& j);

// Canonical map key: the serialized key rendered to a compact string.
std::string canonical_key(const TypePtr& key_ty, const RValPtr& k);

// --- map operations (shared semantics) ------------------------------------

MapPtr map_empty(TypePtr key_ty, TypePtr val_ty);
MapPtr map_put(const MapPtr& m, const RValPtr& k, const RValPtr& v);
MapPtr map_remove(const MapPtr& m, const RValPtr& k);
std::optional<RValPtr> map_get(const MapPtr& m, const RValPtr& k);
bool map_contains(const MapPtr& m, const RValPtr& k);

// --- builtin primitive operations ------------------------------------------

RValPtr builtin_to_string(const RValPtr& v);
std::string bytes_to_hex(const std::vector<uint8_t>& b);
std::optional<std::vector<uint8_t>> hex_to_bytes(const std::string& s);

// --- contract state and output ---------------------------------------------

struct StateField {
    std::string name;
    TypePtr ty;
    RValPtr value;
};

struct StateStore {
    std::vector<StateField> fields;  // declaration order

    StateField* find(const std::string& name);
    const StateField* find(const std::string& name) const;
};

// {"fields":[{"vname","type","value"}]}
nlohmann::ordered_json state_to_json(const AdtRegistry& reg,
                                     const StateStore& st);
StateStore state_from_json(const AdtRegistry& reg, const nlohmann::json& j,
                           const std::vector<std::pair<std::string, TypePtr>>&
                               declared);

// Incoming message {"_tag","params":[{"vname","type","value"}]}
struct Incoming {
    std::string tag;
    std::vector<StateField> params;
};
Incoming message_from_json(const AdtRegistry& reg, const nlohmann::json& j);

nlohmann::ordered_json message_to_json(const AdtRegistry& reg,
                                       const MsgPtr& m);

// Execution limits shared by both engines.
struct Limits {
    uint64_t step_limit = 1000000000;  // 1e9
    uint64_t stack_limit = 100000;     // frames
};

}  // namespace mv::rt
