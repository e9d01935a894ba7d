#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "minivella/diag.hpp"

namespace mv {

enum class Tok {
    Ident,     // lower-case-initial identifier (also _foo, $tmp)
    UIdent,    // upper-case-initial identifier (constructors, type names)
    TyVar,     // 'A
    Number,    // decimal digits
    Str,       // quoted string (decoded)
    Hex,       // 0x.. byte string (decoded bytes in `bytes`)
    // keywords
    KwLet, KwRec, KwIn, KwFun, KwTfun, KwMatch, KwWith, KwEnd, KwBuiltin,
    KwType, KwOf, KwContract, KwField, KwTransition, KwSend, KwEvent,
    KwForall, KwEmp,
    // punctuation
    LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Arrow,      // ->
    FatArrow,   // =>
    Eq,         // =
    Bar,        // |
    Colon,      // :
    Semi,       // ;
    Comma,      // ,
    At,         // @
    Assign,     // :=
    LArrow,     // <-
    Dot,        // .
    Underscore, // _
    Minus,      // -
    Eof,
};

struct Token {
    Tok kind;
    std::string text;
    std::vector<uint8_t> bytes;  // Hex
    SourceLoc loc;
};

// Tokenizes the whole input; lexical errors become Diagnostics (never throws).
std::vector<Token> lex(const std::string& input, std::vector<Diagnostic>& diags);

}  // namespace mv
