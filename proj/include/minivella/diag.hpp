#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mv {

struct SourceLoc {
    int line = 0;  // 1-based; 0 means "unknown"
    int col = 0;

    bool known() const { return line > 0; }
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    SourceLoc loc;
};

// "file:line:col: severity: message"
std::string format_diagnostic(const std::string& file, const Diagnostic& d);

// Runtime error taxonomy shared by the interpreter and the VM. Both engines
// must report the same kind for the same program, so the differential tests
// can compare output JSON byte for byte.
enum class RtErrorKind {
    Overflow,
    DivByZero,
    StackOverflow,
    StepLimitExceeded,
    SerializationError,
    DeserializationError,
    Internal,
};

const char* rt_error_kind_name(RtErrorKind k);

struct RtError : std::runtime_error {
    RtErrorKind kind;
    RtError(RtErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

// Compile-time failure carrying diagnostics (used by the CLI and tests).
struct CompileError : std::runtime_error {
    std::vector<Diagnostic> diags;
    explicit CompileError(std::vector<Diagnostic> ds)
        : std::runtime_error(ds.empty() ? "compile error" : ds.front().message),
          diags(std::move(ds)) {}
    explicit CompileError(const std::string& msg, SourceLoc loc = {})
        : std::runtime_error(msg), diags{{Severity::Error, msg, loc}} {}
};

}  // namespace mv
