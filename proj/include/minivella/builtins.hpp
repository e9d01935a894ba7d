#pragma once

#include <optional>
#include <string>

namespace mv {

// Static builtin catalog. Polymorphic builtins (eq, the map family, emp)
// receive explicit type arguments, inserted by the typechecker when the
// source omits them.
enum class BI {
    Add, Sub, Mul, Div, Rem,   // int x int -> int (same kind)
    Lt,                        // int x int -> Bool
    Eq,                        // prim x prim -> Bool, 1 type arg
    Concat,                    // String x String -> String
    Strlen,                    // String -> Uint32
    ToString,                  // int -> String
    Emp,                       // -> Map k v, 2 type args
    MapPut,                    // Map k v x k x v -> Map k v, 2 type args
    MapGet,                    // Map k v x k -> Option v, 2 type args
    MapContains,               // Map k v x k -> Bool, 2 type args
    MapRemove,                 // Map k v x k -> Map k v, 2 type args
    MapSize,                   // Map k v -> Uint32, 2 type args
};

std::optional<BI> builtin_by_name(const std::string& name);
const char* builtin_name(BI b);
int builtin_arity(BI b);
int builtin_ty_arity(BI b);

// Impure-for-DCE: may raise an observable runtime error (overflow, div by
// zero), so an unused binding of it must not be removed.
bool builtin_impure(BI b);

}  // namespace mv
