#pragma once

// MiniPy lexer.
//
// Source files are UTF-8 with LF line endings and 4-space indentation; tab
// characters are rejected outright.  Each non-blank line yields its tokens
// followed by one Newline token; indentation changes surface as Indent/Dedent
// tokens (one level per step, lexeme empty).  Blank lines are skipped.
// Dotted builtin names like `api.add` lex as a single Identifier token so the
// call name is one renameable unit.

#include <cctype>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mixcode/lang/token.hpp"

namespace mixcode::lang {

inline bool is_keyword(std::string_view s) {
    static const char* kKeywords[] = {
        "def", "return", "if", "elif", "else", "while", "for",  "in",    "pass",
        "and", "or",     "not", "True", "False", "None", "print", "range", "input",
    };
    for (const char* k : kKeywords) {
        if (s == k) return true;
    }
    return false;
}

inline std::vector<Token> tokenize(std::string_view source) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    int line = 0;
    int indent_level = 0;

    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

    while (pos < source.size()) {
        // One source line per iteration.
        std::size_t eol = source.find('\n', pos);
        const bool has_newline = eol != std::string_view::npos;
        if (!has_newline) eol = source.size();
        const std::string_view text = source.substr(pos, eol - pos);
        pos = has_newline ? eol + 1 : eol;
        ++line;

        if (text.find('\t') != std::string_view::npos) {
            throw LexError(line, "tab character in indentation or code");
        }

        std::size_t col = 0;
        while (col < text.size() && text[col] == ' ') ++col;
        if (col == text.size()) continue;  // blank line: no tokens, no indent handling

        if (col % 4 != 0) {
            throw LexError(line, "indentation is not a multiple of 4 spaces");
        }
        const int level = static_cast<int>(col / 4);
        if (level > indent_level + 1) {
            throw LexError(line, "indentation jumps more than one level");
        }
        if (level == indent_level + 1) {
            tokens.push_back({TokenKind::Indent, "", line});
        }
        while (level < indent_level) {
            tokens.push_back({TokenKind::Dedent, "", line});
            --indent_level;
        }
        indent_level = level;

        while (col < text.size()) {
            const char c = text[col];
            if (c == ' ') {
                ++col;
                continue;
            }
            if (ident_start(c)) {
                std::size_t end = col;
                while (end < text.size() && ident_char(text[end])) ++end;
                std::string lexeme(text.substr(col, end - col));
                // Dotted builtin name: consume one `.name` continuation.
                if (end + 1 < text.size() && text[end] == '.' && ident_start(text[end + 1])) {
                    std::size_t end2 = end + 1;
                    while (end2 < text.size() && ident_char(text[end2])) ++end2;
                    lexeme += '.';
                    lexeme += text.substr(end + 1, end2 - end - 1);
                    end = end2;
                }
                const TokenKind kind = is_keyword(lexeme) ? TokenKind::Keyword : TokenKind::Identifier;
                tokens.push_back({kind, std::move(lexeme), line});
                col = end;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t end = col;
                while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
                if (end < text.size() && ident_start(text[end])) {
                    throw LexError(line, "malformed number");
                }
                const std::string_view digits = text.substr(col, end - col);
                // 64-bit checked: reject literals that do not fit.
                if (digits.size() > 19 ||
                    (digits.size() == 19 && digits > std::string_view("9223372036854775807"))) {
                    throw LexError(line, "integer literal overflows 64 bits");
                }
                tokens.push_back({TokenKind::IntLiteral, std::string(digits), line});
                col = end;
                continue;
            }
            if (c == '"') {
                std::size_t end = col + 1;
                while (end < text.size() && text[end] != '"') ++end;
                if (end == text.size()) {
                    throw LexError(line, "unterminated string literal");
                }
                tokens.push_back({TokenKind::StrLiteral,
                                  std::string(text.substr(col, end - col + 1)), line});
                col = end + 1;
                continue;
            }
            // Operators and punctuation.
            auto two = [&](char a, char b) {
                return c == a && col + 1 < text.size() && text[col + 1] == b;
            };
            if (two('=', '=') || two('!', '=') || two('<', '=') || two('>', '=') || two('/', '/')) {
                tokens.push_back({TokenKind::Operator, std::string(text.substr(col, 2)), line});
                col += 2;
                continue;
            }
            if (c == '=' || c == '<' || c == '>' || c == '+' || c == '-' || c == '*' || c == '%') {
                tokens.push_back({TokenKind::Operator, std::string(1, c), line});
                ++col;
                continue;
            }
            if (c == '(' || c == ')' || c == ',' || c == ':') {
                tokens.push_back({TokenKind::Punct, std::string(1, c), line});
                ++col;
                continue;
            }
            throw LexError(line, std::string("illegal character '") + c + "'");
        }
        tokens.push_back({TokenKind::Newline, "\n", line});
    }

    while (indent_level > 0) {
        tokens.push_back({TokenKind::Dedent, "", line});
        --indent_level;
    }
    return tokens;
}

}  // namespace mixcode::lang
