#pragma once

#include <string>

#include "minivella/ast.hpp"
#include "minivella/interp.hpp"
#include "minivella/target.hpp"
#include "minivella/vm.hpp"

#include "json.hpp"

// The whole-program pipeline and the canonical run-output format shared by
// the interpreter and the VM. Both engines produce the same JSON document
// for the same program and inputs; the differential tests compare the
// serialized bytes.

namespace mv::pipeline {

// Pass names accepted by dump_after, in pipeline order.
extern const char* const kPassNames[];  // terminated by nullptr

// parse + typecheck; throws CompileError with diagnostics on failure
Program frontend(const std::string& source);

// Runs the full pass pipeline on a typechecked program and lowers it.
// When dump_after names a pass, the program as of that pass is
// pretty-printed into *dump (for "lower", the .mvir text).
tgt::TargetModule compile(const Program& checked,
                          const std::string& dump_after = "",
                          std::string* dump = nullptr);

// ----- canonical run output -----
// expression programs: {"result": <value>} or {"error":{"kind","message"}}
// contract runs:       {"state","messages","events"} or the same error form

nlohmann::ordered_json error_json(const RtError& e);

nlohmann::ordered_json run_expr_interp(const Program& checked,
                                       rt::Limits limits);
nlohmann::ordered_json run_expr_vm(const tgt::TargetModule& mod,
                                   rt::Limits limits);

// When state is null, field initializers compute the starting state.
nlohmann::ordered_json run_contract_interp(const Program& checked,
                                           const nlohmann::json* state,
                                           const nlohmann::json& message,
                                           rt::Limits limits);
nlohmann::ordered_json run_contract_vm(const tgt::TargetModule& mod,
                                       const nlohmann::json* state,
                                       const nlohmann::json& message,
                                       rt::Limits limits);

}  // namespace mv::pipeline
