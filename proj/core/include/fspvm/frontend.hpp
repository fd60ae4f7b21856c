#pragma once

// Solidity-subset lexer and parser, and the `.lol` dump format (printer and
// reader) for typed Lolisa.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fspvm/lolisa.hpp"

namespace fspvm {

enum class TokenKind { Keyword, Identifier, IntLiteral, HexLiteral, StringLiteral, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string lexeme;  // HexLiteral keeps its 0x prefix; StringLiteral keeps its quotes
    SourceSpan span;
};

enum class SyntaxErrorKind { UnknownCharacter, UnterminatedString, UnterminatedComment, UnexpectedToken, UnclosedBlock };

std::string_view syntax_error_name(SyntaxErrorKind k);

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SyntaxErrorKind kind, std::string message, SourceSpan span, std::string expected = {},
                std::string got = {});
    SyntaxErrorKind kind() const { return kind_; }
    const SourceSpan& span() const { return span_; }
    const std::string& expected() const { return expected_; }
    const std::string& got() const { return got_; }

private:
    SyntaxErrorKind kind_;
    SourceSpan span_;
    std::string expected_;
    std::string got_;
};

/// Maximal-munch tokenization, comments stripped, ending with one End token.
std::vector<Token> lex(std::string_view source, const std::string& file = {});

/// Recursive-descent parse of a single contract (pragmas are skipped).
UContract parse_source(const std::vector<Token>& tokens);
UContract parse_solidity(std::string_view source, const std::string& file = {});

/// A single expression in the surface grammar, e.g. a spec clause. `old(e)`
/// parses to UExprKind::Old.
UExprPtr parse_expression(std::string_view text, const std::string& file = {}, int line = 1);

// ---------------------------------------------------------------- dump format

/// Whole-contract dump: header, structs, state, modifiers, functions.
std::string pretty_print(const Contract& c);
/// Statement list as `s1;;\n  s2;; nil` (empty list prints `nil`).
std::string pretty_print(const StmtList& stmts, int uint_width = 256, int indent = 0);
std::string pretty_print(const Stmt& s, int uint_width = 256, int indent = 0);
std::string pretty_print(const Expr& e, int uint_width = 256);
std::string pretty_print(const LType& t, int uint_width = 256);
/// One-line abbreviation of a statement for traces.
std::string stmt_head(const Stmt& s, int uint_width = 256);

/// Inverse of pretty_print(Contract), re-typechecked.
Contract parse_lolisa_text(std::string_view text, const std::string& file = {});
/// Inverse of pretty_print(StmtList), typechecked in ctx.
StmtList parse_lolisa_stmts(std::string_view text, const TypeContext& ctx, const std::string& file = {});

}  // namespace fspvm
