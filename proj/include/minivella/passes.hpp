#pragma once

#include "minivella/ast.hpp"

namespace mv::passes {

// Internal plumbing: renames binders so every binder in the program is
// unique. Later passes rely on this (substitution without capture, global
// flow analysis keyed by name). Top-level definition names are kept stable.
void uniquify(Program& p);

// Removes library definitions not reachable from the main expression /
// transitions / field initializers, and unused let-bindings whose bound
// expression cannot raise or touch state.
void eliminate_dead_code(Program& p);

// Rewrites every match so all patterns are flat; exhaustiveness-preserving.
void flatten_matches(Program& p);

// Curried Fun/App -> NAryFun/Call. Named functions whose call sites all
// supply the same argument count are collapsed to that arity; everything
// else keeps arity 1. Re-annotates the program afterwards.
void uncurry(Program& p);

// TFun/TApp -> Dispatch/DispatchCall via a monovariant type-flow fixpoint.
// Fails (CompileError) when a type application cannot be grounded.
void monomorphize(Program& p);

// Recomputes Expr::ann bottom-up for any pipeline stage (trusting, no
// checking). Used after transformations that rebuild the tree.
void reannotate(Program& p);

// --- helpers shared between passes and tests ---

// Deep copy. When `tv` is non-null, substitutes the type variable *tv :=
// repl in every type position along the way.
ExprPtr clone_expr(const ExprPtr& e, const std::string* tv = nullptr,
                   const TypePtr& repl = nullptr);

// Replaces free occurrences of variable `from` with variable `to`.
ExprPtr subst_var(const ExprPtr& e, const std::string& from,
                  const std::string& to);
std::vector<StmtPtr> subst_var_stmts(const std::vector<StmtPtr>& body,
                                     const std::string& from,
                                     const std::string& to);

// --- machine-checkable pass invariants ---

bool all_patterns_flat(const Program& p);
bool calls_arity_consistent(const Program& p);  // post-uncurry
bool no_type_vars(const Program& p);            // post-monomorphize

}  // namespace mv::passes
