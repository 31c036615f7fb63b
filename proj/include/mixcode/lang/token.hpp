#pragma once

// Token model for MiniPy, the indentation-based mini-language the whole
// toolkit operates on.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixcode::lang {

enum class TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    StrLiteral,
    Operator,
    Punct,
    Newline,
    Indent,
    Dedent,
};

struct Token {
    TokenKind kind;
    std::string lexeme;  // empty only for Indent/Dedent
    int line = 0;        // 1-based source line

    bool operator==(const Token&) const = default;
};

struct LexError : std::runtime_error {
    LexError(int line_, const std::string& reason_)
        : std::runtime_error("lex error at line " + std::to_string(line_) + ": " + reason_),
          line(line_),
          reason(reason_) {}
    int line;
    std::string reason;
};

inline const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::IntLiteral: return "integer";
        case TokenKind::StrLiteral: return "string";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punct: return "punctuation";
        case TokenKind::Newline: return "newline";
        case TokenKind::Indent: return "indent";
        case TokenKind::Dedent: return "dedent";
    }
    return "?";
}

}  // namespace mixcode::lang
