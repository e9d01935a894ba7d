#pragma once

#include "minivella/ast.hpp"

// Closure-converted program: a flat set of first-order functions plus
// straight-line statement bodies. No nested lambdas remain; every function
// body references only its parameters, its environment slots, its locals,
// and program globals. This is the input to the code generator.

namespace mv::cc {

struct CAtom {
    enum class Kind { Var, Global, Lit };
    Kind kind = Kind::Var;
    std::string name;  // Var / Global
    Literal lit;       // Lit
    TypePtr ty;        // always set
};

enum class CK {
    Copy,          // dst = atom
    BuiltinOp,     // dst = op {ty_args} (atoms)
    Call,          // dst = call atoms[0] (atoms[1..])     closure invocation
    MakeClosure,   // dst = closure fn_id [capture atoms]
    EnvPatch,      // patch closure args[0]'s env slot `field` with args[1]
    MakeDispatch,  // dst = dispatch value: table_id + shared env [captures]
    DispatchCall,  // dst = invoke entry `key_ty` of table atoms[0]
    MakeConstr,    // dst = ctor `op` of adt `adt_name` {ty_args} (atoms)
    MakeMsg,       // dst = message { msg_fields }
    Switch,        // branch on constructor tag of atoms[0]
    Ret,           // return atoms[0]
    // contract statements
    LoadField,     // dst = state field
    StoreField,    // state field := atoms[0]
    MapGetS,       // dst = field[atoms[0]]  (Option value)
    MapPutS,       // field[atoms[0]] := atoms[1]
    Emit,          // send / event atoms[0]
};

struct CStmt;
using CStmtPtr = std::shared_ptr<CStmt>;

struct CArm {
    std::string ctor;
    int tag = 0;
    std::vector<std::string> binders;  // "" = field ignored
    std::vector<TypePtr> binder_types;
    std::vector<CStmtPtr> body;
};

struct CStmt {
    CK kind;
    std::string dst;
    TypePtr dst_ty;
    std::string op;        // builtin name / constructor name
    std::string adt_name;  // MakeConstr
    std::string field;     // state field / EnvPatch env slot
    std::vector<TypePtr> ty_args;
    std::vector<CAtom> args;
    int fn_id = -1;    // MakeClosure
    int table_id = -1; // MakeDispatch
    TypePtr key_ty;    // DispatchCall
    std::vector<std::pair<std::string, CAtom>> msg_fields;  // MakeMsg
    std::vector<CArm> arms;                           // Switch
    bool is_event = false;                            // Emit
};

struct CFunc {
    int id = 0;
    std::string name;  // debug name, unique
    std::vector<std::string> params;
    std::vector<TypePtr> param_types;
    std::vector<std::string> env;  // captured variables, in capture order
    std::vector<TypePtr> env_types;
    TypePtr ret_type;
    std::vector<CStmtPtr> body;  // every path ends in Ret
};

// Module-level dispatch table: ground type -> entry function id. The entry
// functions of one table share a single environment layout; the runtime
// dispatch value is (table id, env pointer).
struct CDispatchTable {
    int id = 0;
    std::vector<std::pair<TypePtr, int>> entries;  // sorted by type key
    std::vector<std::string> env;
    std::vector<TypePtr> env_types;
};

struct CGlobal {
    std::string name;
    TypePtr ty;
    std::vector<CStmtPtr> body;  // ends in Ret; result becomes the global
};

struct CField {
    std::string name;
    TypePtr ty;
    std::vector<CStmtPtr> init;  // ends in Ret
};

struct CTransition {
    std::string name;
    std::vector<std::string> params;
    std::vector<TypePtr> param_types;
    std::vector<CStmtPtr> body;
};

struct CContract {
    std::string name;
    std::vector<CField> fields;
    std::vector<CTransition> transitions;
};

struct ClosuredProgram {
    std::vector<ADTDecl> adts;
    std::vector<CFunc> funcs;
    std::vector<CDispatchTable> dispatch_tables;
    std::vector<CGlobal> globals;
    std::optional<CContract> contract;
    std::vector<CStmtPtr> main;  // expression programs; ends in Ret
    TypePtr main_ty;
};

// Input must be fully lowered: flat patterns, n-ary calls, no type
// abstractions (Dispatch/DispatchCall only).
ClosuredProgram closure_convert(const Program& p);

// Machine check: no function body references an undefined name.
bool no_residual_free_vars(const ClosuredProgram& cp);

}  // namespace mv::cc
