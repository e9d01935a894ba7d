#include "minivella/builtins.hpp"

#include <map>

namespace mv {

namespace {

struct Info {
    BI b;
    const char* name;
    int arity;
    int ty_arity;
    bool impure;
};

const Info kTable[] = {
    {BI::Add, "add", 2, 0, true},
    {BI::Sub, "sub", 2, 0, true},
    {BI::Mul, "mul", 2, 0, true},
    {BI::Div, "div", 2, 0, true},
    {BI::Rem, "rem", 2, 0, true},
    {BI::Lt, "lt", 2, 0, false},
    {BI::Eq, "eq", 2, 1, false},
    {BI::Concat, "concat", 2, 0, false},
    {BI::Strlen, "strlen", 1, 0, false},
    {BI::ToString, "to_string", 1, 0, false},
    {BI::Emp, "emp", 0, 2, false},
    {BI::MapPut, "put", 3, 2, false},
    {BI::MapGet, "get", 2, 2, false},
    {BI::MapContains, "contains", 2, 2, false},
    {BI::MapRemove, "remove", 2, 2, false},
    {BI::MapSize, "size", 1, 2, false},
};

const Info& info(BI b) {
    for (auto& i : kTable)
        if (i.b == b) return i;
    return kTable[0];
}

}  // namespace

std::optional<BI> builtin_by_name(const std::string& name) {
    for (auto& i : kTable)
        if (name == i.name) return i.b;
    return std::nullopt;
}

const char* builtin_name(BI b) { return info(b).name; }
int builtin_arity(BI b) { return info(b).arity; }
int builtin_ty_arity(BI b) { return info(b).ty_arity; }
bool builtin_impure(BI b) { return info(b).impure; }

}  // namespace mv
