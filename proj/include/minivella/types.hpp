#pragma once

#include <memory>
#include <string>
#include <vector>

namespace mv {

enum class TyKind {
    Int,      // signed/unsigned, width 32/64/128/256
    String,
    ByStr,    // arbitrary-length byte string
    ByStrX,   // fixed-length byte string, length known at compile time
    Adt,      // named ADT applied to type arguments
    Map,
    Fun,      // single-parameter (curried) function type
    NAryFun,  // post-uncurrying function type: (T1,..,Tn) -> R
    TyVar,
    Forall,
    Message,  // opaque structural type of message/event values
};

struct SType;
using TypePtr = std::shared_ptr<const SType>;

struct SType {
    TyKind kind;
    bool is_signed = false;       // Int
    int width = 0;                // Int (bits)
    int byte_len = 0;             // ByStrX
    std::string name;             // Adt name / TyVar name / Forall binder
    std::vector<TypePtr> args;    // Adt type args / NAryFun params
    TypePtr a, b;                 // Map key/value, Fun param/result,
                                  // NAryFun result (b), Forall body (a)

    static TypePtr make_int(bool is_signed, int width);
    static TypePtr make_string();
    static TypePtr make_bystr();
    static TypePtr make_bystrx(int len);
    static TypePtr make_adt(std::string name, std::vector<TypePtr> args = {});
    static TypePtr make_map(TypePtr k, TypePtr v);
    static TypePtr make_fun(TypePtr param, TypePtr result);
    static TypePtr make_nary_fun(std::vector<TypePtr> params, TypePtr result);
    static TypePtr make_tyvar(std::string name);
    static TypePtr make_forall(std::string var, TypePtr body);
    static TypePtr make_message();
};

// Equality up to renaming of Forall-bound variables.
bool alpha_equal(const TypePtr& t1, const TypePtr& t2);

// No TyVar, no Forall anywhere.
bool is_ground(const TypePtr& t);

// Keys valid for Map: integers, strings, byte strings only.
bool is_prim_key_type(const TypePtr& t);

// Capture-avoiding substitution of a type variable.
TypePtr subst_tyvar(const TypePtr& t, const std::string& var, const TypePtr& repl);

// Simultaneous substitution vars[i] := repls[i]. Unlike a loop of
// subst_tyvar calls, one replacement is never rewritten by a later pair
// (needed when the replacements mention the variables, e.g. a swap).
TypePtr subst_tyvars(const TypePtr& t, const std::vector<std::string>& vars,
                     const std::vector<TypePtr>& repls);

// Printable, reparsable form ("Int32", "List (Option Int32)", "Map String Uint32").
std::string show_type(const TypePtr& t);

// Structural ordering key for deterministic tables.
std::string type_sort_key(const TypePtr& t);

}  // namespace mv
