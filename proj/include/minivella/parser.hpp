#pragma once

#include <optional>

#include "minivella/ast.hpp"

namespace mv {

struct ParseResult {
    std::optional<Program> program;
    std::vector<Diagnostic> diags;

    bool ok() const { return program.has_value(); }
};

// Parses an expression program or a contract program (one grammar covers
// both). Builtin ADTs are prepended to the result's declarations.
ParseResult parse_program(const std::string& text);

// Helpers for tests and for the state/message file formats.
std::optional<TypePtr> parse_type_string(const std::string& text);
std::optional<ExprPtr> parse_expr_string(const std::string& text);

}  // namespace mv
