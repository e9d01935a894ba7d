#pragma once

#include "minivella/ast.hpp"

namespace mv {

struct TypecheckResult {
    bool ok = false;
    std::vector<Diagnostic> diags;
};

// Annotates every expression in place (Expr::ann, Stmt::ann). On failure the
// program is left partially annotated and at least one Diagnostic is returned.
TypecheckResult typecheck(Program& p);

// True iff the arm patterns cover every value of the scrutinee type.
bool patterns_exhaustive(const AdtRegistry& reg,
                         const std::vector<PatternPtr>& pats, const TypePtr& ty);

}  // namespace mv
