#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minivella/ast.hpp"
#include "minivella/builtins.hpp"
#include "minivella/closured.hpp"
#include "minivella/types.hpp"

// Low-level typed IR: functions over virtual registers, basic blocks,
// explicit allocation and tag switches, a global type-descriptor table and
// dispatch tables as data. This is what the VM executes and what `.mvir`
// files contain.

namespace mv::tgt {

struct CtorInfo {
    std::string name;
    int tag = 0;                 // = declaration index, fits in a byte
    std::vector<int> field_tds;  // descriptor indices
    // packed layout of the heap cell for this constructor
    int cell_size = 1;           // 1 tag byte + packed fields
    std::vector<int> offsets;    // field offsets within the cell
};

struct TypeDescriptor {
    enum class Kind { Int, String, ByStr, ByStrX, Adt, Map, Function, Message };
    Kind kind = Kind::Int;
    bool is_signed = true;  // Int
    int width = 32;         // Int
    int byte_len = 0;       // ByStrX
    std::string adt_name;   // Adt
    std::vector<int> targs;        // Adt: type-argument descriptor indices
    std::vector<CtorInfo> ctors;   // Adt
    int key_td = -1, val_td = -1;  // Map
    std::vector<int> param_tds;    // Function
    int ret_td = -1;               // Function
    std::string show;              // canonical type string (dedup key)
    TypePtr source;                // original type, drives serialization
};

struct Layout {
    bool boxed = false;
    int inline_size = 0;  // bytes occupied inside a cell / env record
    int align = 1;
    bool by_ref = false;  // passed/returned by reference (> two eightbytes)
};

// Layout under the fixed 8-byte-reference model; t must be ground.
Layout layout_of(const TypePtr& t);

// Recomputes packed cell sizes and field offsets for every ADT descriptor
// (used by the lowering and by the .mvir loader).
void compute_ctor_layouts(std::vector<TypeDescriptor>& tds);

enum class Op {
    LitK,         // dst = literal
    Copy,         // dst = args[0]
    Arith,        // dst = bi(args...)        also eq/lt/concat/len/to_string
    MapOp,        // dst = bi(args...)        runtime call, uses arg_tds
    Call,         // dst = closure-call args[0](env, args[1..])
    MakeClosure,  // dst = (fn, new env with args)
    EnvPatch,     // env-of(args[0])[env_slot] = args[1]
    MakeDispatch, // dst = (table, new env with args)
    DispatchCall, // dst = table-lookup args[0] at key_td, invoke entry
    Alloc,        // dst = new ADT cell; tag + packed stores of args
    GetField,     // dst = field `index` of cell args[0]
    MakeMsg,      // dst = message of (names, args) with arg_tds
    LoadGlobal,   // dst = globals[gidx]
    LoadField,    // dst = state field
    StoreField,   // state field := args[0]
    MapGetS,      // dst = state field[args[0]]
    MapPutS,      // state field[args[0]] := args[1]
    Emit,         // send/event args[0]
};

struct TInstr {
    Op op;
    int dst = -1;
    int td = -1;  // result descriptor
    std::vector<int> args;
    Literal lit;                          // LitK
    BI bi = BI::Add;                      // Arith / MapOp
    std::vector<int> arg_tds;             // MapOp type args / MakeMsg field tds
    int fn = -1;                          // MakeClosure
    int table = -1;                       // MakeDispatch
    int key_td = -1;                      // DispatchCall
    int tag = -1;                         // Alloc / GetField
    int index = -1;                       // GetField field position
    int adt_td = -1;                      // GetField: cell descriptor
    int env_slot = -1;                    // EnvPatch
    int gidx = -1;                        // LoadGlobal
    std::vector<std::string> names;       // MakeMsg field names
    std::string field;                    // state ops
    bool is_event = false;                // Emit
};

struct TBlock {
    enum class Term { Ret, Jmp, Switch };
    std::vector<TInstr> instrs;
    Term term = Term::Ret;
    int ret_reg = -1;                         // Ret
    int jmp_to = -1;                          // Jmp
    int sw_reg = -1;                          // Switch scrutinee
    std::vector<std::pair<int, int>> cases;   // (tag, block)
    int sw_default = -1;                      // -1 = none
};

struct TFunc {
    int id = 0;
    std::string name;
    std::vector<int> param_tds;  // registers 0..n-1; env convention: the
                                 // environment reference is the implicit
                                 // first actual of every closure call
    std::vector<int> env_tds;    // captured slots, loaded into registers
                                 // n..n+m-1 at entry
    int ret_td = -1;
    bool sret = false;  // result larger than two eightbytes: returned
                        // through a caller-provided slot
    int nregs = 0;
    std::vector<TBlock> blocks;  // entry = block 0
};

struct TDispatchTable {
    int id = 0;
    std::vector<std::pair<int, int>> entries;  // (key td, fn id)
    std::vector<int> env_tds;
};

struct TGlobal {
    std::string name;
    int td = -1;
    int init_fn = -1;  // zero-param function computing the value
};

struct TField {
    std::string name;
    int td = -1;
    int init_fn = -1;
};

struct TTransition {
    std::string name;
    int fn = -1;  // parameters of the transition = parameters of fn
    std::vector<std::string> param_names;
};

struct TContract {
    std::string name;
    std::vector<TField> fields;
    std::vector<TTransition> transitions;
};

struct TargetModule {
    std::vector<ADTDecl> adts;  // carried for serialization drivers
    std::vector<TypeDescriptor> tds;
    std::vector<TFunc> funcs;
    std::vector<TDispatchTable> tables;
    std::vector<TGlobal> globals;
    std::optional<TContract> contract;
    int main_fn = -1;  // expression programs
    int main_td = -1;
};

TargetModule lower(const cc::ClosuredProgram& p);

// Stable textual form (.mvir). parse throws CompileError on malformed input.
std::string emit_text(const TargetModule& m);
TargetModule parse_text(const std::string& text);

// Module verifier: returns problems (empty = ok). Checks call arities,
// by-reference classifications, register bounds, descriptor references.
std::vector<std::string> verify(const TargetModule& m);

}  // namespace mv::tgt
