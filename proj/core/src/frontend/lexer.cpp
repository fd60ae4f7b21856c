#include <cctype>
#include <set>

#include "fspvm/frontend.hpp"

namespace fspvm {

std::string_view syntax_error_name(SyntaxErrorKind k) {
    switch (k) {
    case SyntaxErrorKind::UnknownCharacter: return "UnknownCharacter";
    case SyntaxErrorKind::UnterminatedString: return "UnterminatedString";
    case SyntaxErrorKind::UnterminatedComment: return "UnterminatedComment";
    case SyntaxErrorKind::UnexpectedToken: return "UnexpectedToken";
    case SyntaxErrorKind::UnclosedBlock: return "UnclosedBlock";
    }
    return "?";
}

SyntaxError::SyntaxError(SyntaxErrorKind kind, std::string message, SourceSpan span, std::string expected,
                         std::string got)
    : std::runtime_error(span.str() + ": " + std::string(syntax_error_name(kind)) + ": " + message),
      kind_(kind),
      span_(std::move(span)),
      expected_(std::move(expected)),
      got_(std::move(got)) {}

namespace {

const std::set<std::string, std::less<>>& keywords() {
    static const std::set<std::string, std::less<>> k{
        "contract", "struct",   "mapping",  "modifier", "function", "returns",  "return",      "if",
        "else",     "while",    "for",      "throw",    "public",   "private",  "internal",    "external",
        "view",     "pure",     "payable",  "constant", "true",     "false",    "bool",        "address",
        "string",   "require",  "assert",   "revert",   "pragma",   "memory",   "storage",     "constructor",
    };
    return k;
}

bool numbered_type_keyword(std::string_view w) {
    auto digits_from = [&](std::size_t i) {
        for (; i < w.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(w[i]))) {
                return false;
            }
        }
        return true;
    };
    if (w.rfind("uint", 0) == 0) {
        return digits_from(4);
    }
    if (w.rfind("int", 0) == 0) {
        return digits_from(3);
    }
    if (w.rfind("bytes", 0) == 0 && w.size() > 5) {
        return digits_from(5);
    }
    return false;
}

constexpr std::string_view kPuncts[] = {
    "=>", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "++", "--", "<", ">", "=", "!",
    "+",  "-",  "*",  "/",  "%",  "(",  ")",  "{",  "}",  "[",  "]",  ";",  ",",  ".",  "^",  "~",
};

class Lexer {
public:
    Lexer(std::string_view src, const std::string& file) : src_(src), file_(file) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            if (pos_ >= src_.size()) {
                break;
            }
            out.push_back(next());
        }
        Token end;
        end.kind = TokenKind::End;
        end.span = here_span();
        out.push_back(end);
        return out;
    }

private:
    SourceSpan here_span() const {
        SourceSpan s{file_, line_, col_, line_, col_};
        return s;
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                SourceSpan start = here_span();
                advance();
                advance();
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
                    advance();
                }
                if (pos_ + 1 >= src_.size()) {
                    throw SyntaxError(SyntaxErrorKind::UnterminatedComment, "unterminated block comment", start);
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    Token finish(TokenKind k, std::size_t start, SourceSpan span) {
        Token t;
        t.kind = k;
        t.lexeme = std::string(src_.substr(start, pos_ - start));
        span.end_line = last_line_;
        span.end_col = last_col_;
        t.span = std::move(span);
        return t;
    }

    void step() {
        last_line_ = line_;
        last_col_ = col_;
        advance();
    }

    Token next() {
        std::size_t start = pos_;
        SourceSpan span = here_span();
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                          src_[pos_] == '$')) {
                step();
            }
            std::string_view w = src_.substr(start, pos_ - start);
            bool kw = keywords().count(w) || numbered_type_keyword(w);
            return finish(kw ? TokenKind::Keyword : TokenKind::Identifier, start, span);
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            if (c == '0' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
                step();
                step();
                std::size_t digits = pos_;
                while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
                    step();
                }
                if (pos_ == digits) {
                    throw SyntaxError(SyntaxErrorKind::UnknownCharacter, "hex literal without digits", span);
                }
                return finish(TokenKind::HexLiteral, start, span);
            }
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                step();
            }
            return finish(TokenKind::IntLiteral, start, span);
        }
        if (c == '"' || c == '\'') {
            step();
            while (pos_ < src_.size() && src_[pos_] != c && src_[pos_] != '\n') {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') {
                    step();
                }
                step();
            }
            if (pos_ >= src_.size() || src_[pos_] != c) {
                throw SyntaxError(SyntaxErrorKind::UnterminatedString, "unterminated string literal", span);
            }
            step();
            return finish(TokenKind::StringLiteral, start, span);
        }
        for (std::string_view p : kPuncts) {
            if (src_.substr(pos_, p.size()) == p) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    step();
                }
                return finish(TokenKind::Punct, start, span);
            }
        }
        std::string shown = static_cast<unsigned char>(c) < 0x80 ? std::string(1, c) : "non-ASCII byte";
        throw SyntaxError(SyntaxErrorKind::UnknownCharacter, "unknown character '" + shown + "'", span);
    }

    std::string_view src_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    int last_line_ = 1;
    int last_col_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view source, const std::string& file) { return Lexer(source, file).run(); }

}  // namespace fspvm
