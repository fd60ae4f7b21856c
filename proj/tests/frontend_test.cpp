#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "fspvm/frontend.hpp"

using namespace fspvm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string corpus(const std::string& name) { return read_file(std::string(FSPVM_CORPUS_DIR) + "/" + name); }

SyntaxErrorKind syntax_error(const std::string& src) {
    try {
        parse_solidity(src);
    } catch (const SyntaxError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "parsed: " << src;
    return SyntaxErrorKind::UnexpectedToken;
}

std::vector<std::string> lexemes(const std::string& src) {
    std::vector<std::string> out;
    for (const auto& t : lex(src)) {
        if (t.kind != TokenKind::End) {
            out.push_back(t.lexeme);
        }
    }
    return out;
}

// Whitespace-separated words of a dump, so layout does not matter.
std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

bool contains_words(const std::string& haystack, const std::string& needle) {
    auto join = [](const std::string& s) {
        std::string out;
        for (const auto& w : words(s)) {
            out += w + " ";
        }
        return out;
    };
    return join(haystack).find(join(needle)) != std::string::npos;
}

const char* kCorpus[] = {"erc20.sol", "erc20_broken.sol", "sponsor.sol", "pathological.sol"};

}  // namespace

TEST(Lex, Declaration) {
    auto toks = lex("uint public close;");
    ASSERT_EQ(toks.size(), 5u);
    EXPECT_EQ(toks[0].kind, TokenKind::Keyword);
    EXPECT_EQ(toks[0].lexeme, "uint");
    EXPECT_EQ(toks[1].kind, TokenKind::Keyword);
    EXPECT_EQ(toks[2].kind, TokenKind::Identifier);
    EXPECT_EQ(toks[2].lexeme, "close");
    EXPECT_EQ(toks[3].lexeme, ";");
    EXPECT_EQ(toks[4].kind, TokenKind::End);
}

TEST(Lex, MaximalMunch) {
    EXPECT_EQ(lexemes("x >= 1"), (std::vector<std::string>{"x", ">=", "1"}));
    EXPECT_EQ(lexemes("a=>b==c"), (std::vector<std::string>{"a", "=>", "b", "==", "c"}));
    EXPECT_EQ(lex("x >= 1")[2].kind, TokenKind::IntLiteral);
    EXPECT_EQ(lex("0xFF")[0].kind, TokenKind::HexLiteral);
}

TEST(Lex, Errors) {
    auto kind = [](const std::string& s) {
        try {
            lex(s);
        } catch (const SyntaxError& e) {
            return e.kind();
        }
        ADD_FAILURE();
        return SyntaxErrorKind::UnexpectedToken;
    };
    EXPECT_EQ(kind("@"), SyntaxErrorKind::UnknownCharacter);
    EXPECT_EQ(kind("x = \"abc"), SyntaxErrorKind::UnterminatedString);
    EXPECT_EQ(kind("/* never closed"), SyntaxErrorKind::UnterminatedComment);
}

TEST(Lex, CommentsAndSpans) {
    auto toks = lex("a // line\n/* block\n */ b");
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[1].lexeme, "b");
    EXPECT_EQ(toks[1].span.line, 3);
    EXPECT_EQ(toks[1].span.col, 5);
}

TEST(Lex, LexemesRoundTrip) {
    for (const char* f : kCorpus) {
        std::string src = corpus(f);
        std::vector<std::string> ls = lexemes(src);
        std::string joined;
        for (const auto& l : ls) {
            joined += l + " ";
        }
        EXPECT_EQ(lexemes(joined), ls) << f;
        // Without comments the source is the lexemes modulo whitespace.
        std::string stripped, glued;
        for (const auto& t : lex(src)) {
            glued += t.lexeme;
        }
        std::istringstream in(src);
        std::string line;
        while (std::getline(in, line)) {
            auto c = line.find("//");
            if (c != std::string::npos) {
                line = line.substr(0, c);
            }
            for (char ch : line) {
                if (!std::isspace(static_cast<unsigned char>(ch))) {
                    stripped += ch;
                }
            }
        }
        EXPECT_EQ(stripped, glued) << f;
    }
}

TEST(Parse, StateVariable) {
    UContract c = parse_solidity("contract C { uint public close; }");
    EXPECT_EQ(c.name, "C");
    ASSERT_EQ(c.state.size(), 1u);
    EXPECT_EQ(c.state[0]->kind, StmtKind::Var);
    EXPECT_EQ(*c.state[0]->vis, Visibility::Public);
    EXPECT_EQ(c.state[0]->name, "close");
    EXPECT_EQ(c.state[0]->type.name, "uint");
    Contract typed = typecheck_contract(c);
    EXPECT_EQ(typed.state()[0]->type(), LType::uint(256));
    EXPECT_EQ(typecheck_contract(c, TypeOptions{64}).state()[0]->type(), LType::uint(64));
}

TEST(Parse, GuardWithThrow) {
    UContract c = parse_solidity("contract C { function f() { if (now < open || now > close) { throw; } } }");
    const UStmt& s = *c.functions[0].body[0];
    EXPECT_EQ(s.kind, StmtKind::If);
    EXPECT_EQ(s.e1->kind, UExprKind::Binary);
    EXPECT_EQ(s.e1->bop, BinOp::Or);
    EXPECT_EQ(s.e1->args[0]->bop, BinOp::Lt);
    EXPECT_EQ(s.e1->args[1]->bop, BinOp::Gt);
    ASSERT_EQ(s.body.size(), 1u);
    EXPECT_EQ(s.body[0]->kind, StmtKind::Throw);
    ASSERT_EQ(s.else_body.size(), 1u);
    EXPECT_EQ(s.else_body[0]->kind, StmtKind::Snil);
}

TEST(Parse, PrecedenceAndDesugaring) {
    UContract c = parse_solidity(R"(contract C { function f(uint a) {
        a += 2 * 3 + 1;
        a++;
        require(a > 1, "too small");
    } })");
    const auto& b = c.functions[0].body;
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0]->kind, StmtKind::Assignv);
    EXPECT_EQ(b[0]->e2->bop, BinOp::Add);
    EXPECT_EQ(b[0]->e2->args[1]->bop, BinOp::Add);
    EXPECT_EQ(b[0]->e2->args[1]->args[0]->bop, BinOp::Mul);
    EXPECT_EQ(b[1]->e2->args[1]->text, "1");
    EXPECT_EQ(b[2]->kind, StmtKind::If);
    EXPECT_EQ(b[2]->e1->kind, UExprKind::Unary);
    EXPECT_EQ(b[2]->body[0]->kind, StmtKind::Throw);
}

TEST(Parse, Errors) {
    EXPECT_EQ(syntax_error("contract C {"), SyntaxErrorKind::UnclosedBlock);
    EXPECT_EQ(syntax_error("contract C { function f() { if (x) { "), SyntaxErrorKind::UnclosedBlock);
    EXPECT_EQ(syntax_error("contract C { uint x }"), SyntaxErrorKind::UnexpectedToken);
    EXPECT_EQ(syntax_error("contract C { function f() { x + 1; } }"), SyntaxErrorKind::UnexpectedToken);
    EXPECT_EQ(syntax_error(""), SyntaxErrorKind::UnexpectedToken);
    try {
        parse_solidity("contract C {\n  uint x\n}");
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.span().line, 3);
        EXPECT_EQ(e.expected(), "';'");
    }
}

TEST(PrettyPrint, SnilList) {
    Contract c = typecheck_contract(parse_solidity("contract C { function f() { ; } }"));
    EXPECT_EQ(pretty_print(c.functions()[0].body()), "Snil;; nil");
    TypeContext ctx;
    StmtList back = parse_lolisa_stmts("Snil;; nil", ctx);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0]->kind(), StmtKind::Snil);
}

TEST(PrettyPrint, AssignvLine) {
    const char* src = "contract C { uint open; uint privilegeOpen; function f() { open = privilegeOpen; } }";
    Contract c = typecheck_contract(parse_solidity(src), TypeOptions{64});
    const StmtList& body = c.functions()[0].body();
    EXPECT_EQ(pretty_print(body, 64) + "\n",
              "Assignv (Evar (Some open) Tuint) (Evar (Some privilegeOpen) Tuint);; nil\n");
    TypeContext ctx = TypeContext::for_contract(c);
    StmtList back = parse_lolisa_stmts(pretty_print(body, 64), ctx);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_TRUE(same_tree(*back[0], *body[0]));
}

TEST(PrettyPrint, Figure5Fragment) {
    Contract c = typecheck_contract(parse_solidity(corpus("figure5.sol")), TypeOptions{64});
    std::string dump = pretty_print(c);
    EXPECT_TRUE(contains_words(dump, "Var (Some public) (Evar (Some close) Tuint);;"));
    EXPECT_TRUE(contains_words(dump, "Var (Some public) (Evar (Some finalLimit) Tuint);;"));
    EXPECT_TRUE(contains_words(dump, "Assignv (Evar (Some open) Tuint) (Evar (Some privilegeOpen) Tuint);;"));
    EXPECT_TRUE(contains_words(dump, "If (Evar (Some now) Tuint (<) Evar (Some open) Tuint (|) Evar (Some now) Tuint "
                                     "(>) Evar (Some close) Tuint) (Throw;; nil) (Snil;; nil);;"));
    EXPECT_TRUE(contains_words(dump, "If (Evar (Some index) Tuint (==) Econst (Vint (INT I64 Unsigned 0))) "
                                     "(Throw;; nil) (Snil;; nil);;"));
    Contract back = parse_lolisa_text(dump);
    EXPECT_TRUE(same_tree(c, back));
    EXPECT_EQ(pretty_print(back), dump);
}

TEST(PrettyPrint, CorpusRoundTrip) {
    for (const char* f : kCorpus) {
        Contract c = typecheck_contract(parse_solidity(corpus(f)));
        std::string dump = pretty_print(c);
        Contract back = parse_lolisa_text(dump, f);
        EXPECT_TRUE(same_tree(c, back)) << f;
        EXPECT_EQ(pretty_print(back), dump) << f;
        // Normalization through the dump is idempotent on the untyped tree too.
        Contract again = typecheck_contract(erase(back), TypeOptions{back.uint_width()});
        EXPECT_EQ(pretty_print(again), dump) << f;
    }
}

TEST(PrettyPrint, ParenthesizesOnlyWhenNeeded) {
    TypeContext ctx = TypeContext().with_var("a", LType::uint(8)).with_var("b", LType::uint(8));
    auto show = [&](const char* src) { return pretty_print(*typecheck_expr(ctx, *parse_expression(src))); };
    EXPECT_EQ(show("a - (b - a)"), "Evar (Some a) (Tint I8 Unsigned) (-) (Evar (Some b) (Tint I8 Unsigned) (-) Evar (Some a) (Tint I8 Unsigned))");
    EXPECT_EQ(show("a - b - a"), "Evar (Some a) (Tint I8 Unsigned) (-) Evar (Some b) (Tint I8 Unsigned) (-) Evar (Some a) (Tint I8 Unsigned)");
    for (const char* src : {"(a + b) * a", "a * b + a", "!(a < b) && (b == a || a != 1)", "-(a + 1)", "a % (b / 2)"}) {
        ExprPtr e = typecheck_expr(ctx, *parse_expression(src));
        std::string text = "Var None (Evar (Some t) " + pretty_print(e->type()) + ") (" + pretty_print(*e) + ");; nil";
        StmtList back = parse_lolisa_stmts(text, ctx);
        ASSERT_EQ(back.size(), 1u) << src;
        EXPECT_TRUE(same_tree(*back[0]->init_expr(), *e)) << src;
    }
}

TEST(ParseLolisa, Errors) {
    EXPECT_THROW(parse_lolisa_text("Contract C (Tuint I64)\nState\n  (nil)\n"), SyntaxError);
    EXPECT_THROW(parse_lolisa_text("Contract C (Tuint I7)\nState (nil)\nEnd\n"), SyntaxError);
    EXPECT_THROW(parse_lolisa_text(
                     "Contract C (Tuint I64)\nState (Var None (Evar (Some x) Tbool) (Econst (Vint (INT I64 Unsigned 0)));; nil)\nEnd\n"),
                 TypeErrors);
    EXPECT_THROW(parse_lolisa_text(
                     "Contract C (Tuint I8)\nState (Var None (Evar (Some x) Tuint) (Econst (Vint (INT I8 Unsigned 300)));; nil)\nEnd\n"),
                 SyntaxError);
}

TEST(Parse, TotalOnTokenSoup) {
    std::mt19937_64 rng(99);
    const char* atoms[] = {"contract", "C", "{", "}", "(", ")", "[", "]", ";", "uint", "x", "=", "+", "if", "else",
                           "while", "for", "function", "returns", "return", "mapping", "=>", "1", "0x1f", "true",
                           ",", ".", "_", "modifier", "struct", "!", "&&", "require", "throw", "\"s\"", "public"};
    auto t0 = std::chrono::steady_clock::now();
    int parsed = 0, located = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string src = "contract C { ";
        int n = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int k = 0; k < n; ++k) {
            src += atoms[std::uniform_int_distribution<std::size_t>(0, std::size(atoms) - 1)(rng)];
            src += ' ';
        }
        if (rng() % 2) {
            src += "}";
        }
        try {
            parse_solidity(src);
            ++parsed;
        } catch (const SyntaxError& e) {
            EXPECT_EQ(e.span().line, 1);
            EXPECT_GE(e.span().col, 1);
            EXPECT_LE(e.span().col, static_cast<int>(src.size()) + 1);
            ++located;
        }
    }
    EXPECT_EQ(parsed + located, 10000);
    EXPECT_GT(parsed, 0);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(20));
}

TEST(PrettyPrint, Figure5Snapshot) {
    Contract c = typecheck_contract(parse_solidity(corpus("figure5.sol")), TypeOptions{64});
    EXPECT_EQ(pretty_print(c), corpus("figure5.lol"));
    EXPECT_TRUE(same_tree(parse_lolisa_text(corpus("figure5.lol")), c));
}
