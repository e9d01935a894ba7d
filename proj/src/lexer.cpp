#include "minivella/lexer.hpp"

#include <cctype>
#include <map>

namespace mv {

namespace {

const std::map<std::string, Tok>& keywords() {
    static const std::map<std::string, Tok> kw = {
        {"let", Tok::KwLet},           {"rec", Tok::KwRec},
        {"in", Tok::KwIn},             {"fun", Tok::KwFun},
        {"tfun", Tok::KwTfun},         {"match", Tok::KwMatch},
        {"with", Tok::KwWith},         {"end", Tok::KwEnd},
        {"builtin", Tok::KwBuiltin},   {"type", Tok::KwType},
        {"of", Tok::KwOf},             {"contract", Tok::KwContract},
        {"field", Tok::KwField},       {"transition", Tok::KwTransition},
        {"send", Tok::KwSend},         {"event", Tok::KwEvent},
        {"forall", Tok::KwForall},     {"Emp", Tok::KwEmp},
    };
    return kw;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::vector<Token> lex(const std::string& input, std::vector<Diagnostic>& diags) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;

    auto loc_here = [&]() { return SourceLoc{line, col}; };
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n && i < input.size(); ++k, ++i) {
            if (input[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto push = [&](Tok k, std::string text, SourceLoc loc) {
        out.push_back(Token{k, std::move(text), {}, loc});
    };

    while (i < input.size()) {
        char c = input[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        // (* comments, nested *)
        if (c == '(' && i + 1 < input.size() && input[i + 1] == '*') {
            SourceLoc start = loc_here();
            int depth = 0;
            while (i < input.size()) {
                if (input[i] == '(' && i + 1 < input.size() && input[i + 1] == '*') {
                    depth++;
                    advance(2);
                } else if (input[i] == '*' && i + 1 < input.size() &&
                           input[i + 1] == ')') {
                    depth--;
                    advance(2);
                    if (depth == 0) break;
                } else {
                    advance(1);
                }
            }
            if (depth != 0)
                diags.push_back({Severity::Error, "unterminated comment", start});
            continue;
        }
        SourceLoc loc = loc_here();
        if (c == '"') {
            advance(1);
            std::string s;
            bool closed = false;
            while (i < input.size()) {
                char d = input[i];
                if (d == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                if (d == '\\' && i + 1 < input.size()) {
                    char e = input[i + 1];
                    switch (e) {
                        case 'n': s += '\n'; break;
                        case 't': s += '\t'; break;
                        case '"': s += '"'; break;
                        case '\\': s += '\\'; break;
                        default:
                            diags.push_back({Severity::Error,
                                             "unknown escape in string literal",
                                             loc_here()});
                    }
                    advance(2);
                    continue;
                }
                s += d;
                advance(1);
            }
            if (!closed)
                diags.push_back({Severity::Error, "unterminated string literal", loc});
            push(Tok::Str, std::move(s), loc);
            continue;
        }
        if (c == '0' && i + 1 < input.size() &&
            (input[i + 1] == 'x' || input[i + 1] == 'X')) {
            advance(2);
            std::vector<uint8_t> bytes;
            std::string digits;
            while (i < input.size() && hex_digit(input[i]) >= 0) {
                digits += input[i];
                advance(1);
            }
            if (digits.empty() || digits.size() % 2 != 0) {
                diags.push_back({Severity::Error,
                                 "hex literal must have an even number of digits",
                                 loc});
            } else {
                for (size_t k = 0; k + 1 < digits.size() + 1; k += 2)
                    bytes.push_back((uint8_t)(hex_digit(digits[k]) * 16 +
                                              hex_digit(digits[k + 1])));
            }
            Token t{Tok::Hex, "0x" + digits, std::move(bytes), loc};
            out.push_back(std::move(t));
            continue;
        }
        if (std::isdigit((unsigned char)c)) {
            std::string n;
            while (i < input.size() && std::isdigit((unsigned char)input[i])) {
                n += input[i];
                advance(1);
            }
            push(Tok::Number, std::move(n), loc);
            continue;
        }
        if (c == '\'') {
            advance(1);
            std::string n;
            while (i < input.size() &&
                   (std::isalnum((unsigned char)input[i]) || input[i] == '_')) {
                n += input[i];
                advance(1);
            }
            if (n.empty())
                diags.push_back({Severity::Error, "expected type variable name", loc});
            push(Tok::TyVar, std::move(n), loc);
            continue;
        }
        if (std::isalpha((unsigned char)c) || c == '_' || c == '$') {
            std::string n;
            while (i < input.size() &&
                   (std::isalnum((unsigned char)input[i]) || input[i] == '_' ||
                    input[i] == '$')) {
                n += input[i];
                advance(1);
            }
            if (n == "_") {
                push(Tok::Underscore, n, loc);
                continue;
            }
            auto it = keywords().find(n);
            if (it != keywords().end()) {
                push(it->second, n, loc);
                continue;
            }
            bool upper = std::isupper((unsigned char)n[0]);
            push(upper ? Tok::UIdent : Tok::Ident, std::move(n), loc);
            continue;
        }
        switch (c) {
            case '(': advance(1); push(Tok::LParen, "(", loc); break;
            case ')': advance(1); push(Tok::RParen, ")", loc); break;
            case '{': advance(1); push(Tok::LBrace, "{", loc); break;
            case '}': advance(1); push(Tok::RBrace, "}", loc); break;
            case '[': advance(1); push(Tok::LBracket, "[", loc); break;
            case ']': advance(1); push(Tok::RBracket, "]", loc); break;
            case '|': advance(1); push(Tok::Bar, "|", loc); break;
            case ';': advance(1); push(Tok::Semi, ";", loc); break;
            case ',': advance(1); push(Tok::Comma, ",", loc); break;
            case '@': advance(1); push(Tok::At, "@", loc); break;
            case '.': advance(1); push(Tok::Dot, ".", loc); break;
            case '-':
                if (i + 1 < input.size() && input[i + 1] == '>') {
                    advance(2);
                    push(Tok::Arrow, "->", loc);
                } else {
                    advance(1);
                    push(Tok::Minus, "-", loc);
                }
                break;
            case '=':
                if (i + 1 < input.size() && input[i + 1] == '>') {
                    advance(2);
                    push(Tok::FatArrow, "=>", loc);
                } else {
                    advance(1);
                    push(Tok::Eq, "=", loc);
                }
                break;
            case ':':
                if (i + 1 < input.size() && input[i + 1] == '=') {
                    advance(2);
                    push(Tok::Assign, ":=", loc);
                } else {
                    advance(1);
                    push(Tok::Colon, ":", loc);
                }
                break;
            case '<':
                if (i + 1 < input.size() && input[i + 1] == '-') {
                    advance(2);
                    push(Tok::LArrow, "<-", loc);
                } else {
                    diags.push_back({Severity::Error, "unexpected character '<'", loc});
                    advance(1);
                }
                break;
            default:
                diags.push_back({Severity::Error,
                                 std::string("unexpected character '") + c + "'",
                                 loc});
                advance(1);
        }
    }
    out.push_back(Token{Tok::Eof, "", {}, loc_here()});
    return out;
}

}  // namespace mv
