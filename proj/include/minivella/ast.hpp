#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "minivella/diag.hpp"
#include "minivella/types.hpp"
#include "minivella/wideint.hpp"

namespace mv {

struct Literal {
    enum class Kind { Int, Str, ByStrX };
    Kind kind = Kind::Int;
    rt::WideInt i;
    std::string s;
    std::vector<uint8_t> bytes;

    TypePtr type() const;

    static Literal make_int(rt::WideInt v);
    static Literal make_str(std::string v);
    static Literal make_bystrx(std::vector<uint8_t> v);
};

bool literal_equal(const Literal& a, const Literal& b);

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct Pattern {
    enum class Kind { Wildcard, Binder, Ctor };
    Kind kind = Kind::Wildcard;
    std::string name;               // binder name / constructor name
    std::vector<PatternPtr> subs;   // Ctor sub-patterns
    SourceLoc loc;

    static PatternPtr wildcard(SourceLoc loc = {});
    static PatternPtr binder(std::string name, SourceLoc loc = {});
    static PatternPtr ctor(std::string name, std::vector<PatternPtr> subs,
                           SourceLoc loc = {});
};

// A pattern is FLAT iff it is Wildcard, Binder, or a Ctor whose sub-patterns
// are all Wildcard/Binder.
bool pattern_is_flat(const PatternPtr& p);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class ExprKind {
    Lit,
    Var,
    Let,
    LetRec,   // recursive binding; annotated type in `ty`
    Fun,      // one parameter (curried)
    App,      // one argument (curried)
    TFun,
    TApp,
    Constr,
    Match,    // scrutinee is a variable, held in `name`
    Builtin,
    Msg,
    // post-uncurry forms
    NAryFun,  // params in `params`/`ty_args`, body in `a`
    Call,     // callee in `a`, arguments in `args`
    // post-monomorphize forms
    Dispatch,      // replaces a TFun: per-ground-type specialized bodies
    DispatchCall,  // replaces a TApp: table lookup at ground key `ty` + invoke
};

struct MatchArm {
    PatternPtr pat;
    ExprPtr body;
};

struct MsgField {
    std::string name;
    ExprPtr value;
};

struct DispatchEntry {
    TypePtr type;  // ground key
    ExprPtr body;  // specialized copy of the TFun body
};

struct Expr {
    ExprKind kind;
    SourceLoc loc;
    TypePtr ann;  // filled by the typechecker / maintained by passes

    Literal lit;                      // Lit
    std::string name;                 // Var / binder / Fun param / Constr ctor
                                      // / Builtin op / TFun tyvar / Match scrutinee
    std::string adt_name;             // Constr
    TypePtr ty;                       // Fun param type / TApp & DispatchCall arg
                                      // / LetRec annotation
    std::vector<TypePtr> ty_args;     // Constr type args / Builtin resolved type
                                      // args / NAryFun param types
    std::vector<std::string> params;  // NAryFun param names
    ExprPtr a, b;                     // see ExprKind comments
    std::vector<ExprPtr> args;        // Constr / Builtin / Call arguments
    std::vector<MatchArm> arms;       // Match
    std::vector<MsgField> fields;     // Msg
    std::vector<DispatchEntry> entries;  // Dispatch
};

ExprPtr make_expr(ExprKind k, SourceLoc loc = {});
ExprPtr mk_lit(Literal l, SourceLoc loc = {});
ExprPtr mk_var(std::string name, SourceLoc loc = {});
ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body, SourceLoc loc = {});
ExprPtr mk_fun(std::string param, TypePtr pty, ExprPtr body, SourceLoc loc = {});
ExprPtr mk_app(ExprPtr f, ExprPtr arg, SourceLoc loc = {});

struct ADTCtor {
    std::string name;
    std::vector<TypePtr> field_types;  // may mention the ADT's type params
};

struct ADTDecl {
    std::string name;
    std::vector<std::string> ty_params;
    std::vector<ADTCtor> ctors;  // constructor tag = position in this list
    SourceLoc loc;
    bool builtin = false;
};

// Contract statement sublanguage.
enum class StmtKind {
    Bind,        // x = e
    LoadField,   // x <- f
    StoreField,  // f := e
    MapGet,      // x <- f[k]   (x : Option v)
    MapPut,      // f[k] := e
    MatchStmt,   // match x with | pat => stmts ... end
    Emit,        // send e | event e
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct StmtArm {
    PatternPtr pat;
    std::vector<StmtPtr> body;
};

struct Stmt {
    StmtKind kind;
    SourceLoc loc;
    std::string name;   // bound variable / MatchStmt scrutinee variable
    std::string field;  // state field
    ExprPtr e;          // Bind rhs / StoreField value / map key
    ExprPtr e2;         // MapPut value
    bool is_event = false;  // Emit: event vs send
    std::vector<StmtArm> arms;
    TypePtr ann;        // type of the bound variable (typechecker)
};

struct ContractField {
    std::string name;
    TypePtr type;
    ExprPtr init;
    SourceLoc loc;
};

struct TransParam {
    std::string name;
    TypePtr type;
};

struct Transition {
    std::string name;
    std::vector<TransParam> params;
    std::vector<StmtPtr> body;
    SourceLoc loc;
};

struct Contract {
    std::string name;
    std::vector<ContractField> fields;
    std::vector<Transition> transitions;
};

struct LibDef {
    std::string name;
    ExprPtr value;
    bool is_rec = false;
    TypePtr rec_type;  // mandatory annotation for recursive defs
    SourceLoc loc;
};

struct Program {
    std::vector<ADTDecl> adts;  // builtin family first, then user decls
    std::vector<LibDef> defs;
    std::optional<Contract> contract;
    ExprPtr main;  // expression programs; null for contract programs
};

// Constructor lookup over a program's ADT declarations.
struct AdtRegistry {
    const Program* prog = nullptr;

    explicit AdtRegistry(const Program& p) : prog(&p) {}

    const ADTDecl* find_adt(const std::string& name) const;
    // (decl, constructor index) or nullptr
    std::pair<const ADTDecl*, int> find_ctor(const std::string& ctor) const;
};

// The builtin ADT family (Bool, Option, List, Pair). List and Option are the
// only self/mutually-referencing declarations permitted.
std::vector<ADTDecl> builtin_adts();

std::set<std::string> free_vars(const ExprPtr& e);
std::set<std::string> free_vars_stmts(const std::vector<StmtPtr>& body);

// Deterministic fresh name: returns `hint` when unused, else hint_1, hint_2...
std::string fresh_name(const std::string& hint, const std::set<std::string>& used);

std::string pretty_print(const ExprPtr& e);
std::string pretty_print(const PatternPtr& p);
std::string pretty_print_program(const Program& p);
std::string pretty_print_stmts(const std::vector<StmtPtr>& body, int indent);

// Structural equality ignoring locations and annotations.
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool program_equal(const Program& a, const Program& b);

}  // namespace mv
