#include <set>

#include "fspvm/frontend.hpp"

namespace fspvm {

namespace {

constexpr int kMaxDepth = 512;

bool is_elementary_keyword(const Token& t) {
    if (t.kind != TokenKind::Keyword) {
        return false;
    }
    const std::string& w = t.lexeme;
    return w == "bool" || w == "address" || w == "string" || w.rfind("uint", 0) == 0 || w.rfind("int", 0) == 0 ||
           w.rfind("bytes", 0) == 0;
}

std::string describe(const Token& t) {
    switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Identifier: return "identifier '" + t.lexeme + "'";
    case TokenKind::IntLiteral:
    case TokenKind::HexLiteral: return "number " + t.lexeme;
    case TokenKind::StringLiteral: return "string " + t.lexeme;
    default: return "'" + t.lexeme + "'";
    }
}

std::string unescape(const std::string& lexeme) {
    std::string out;
    for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
        char c = lexeme[i];
        if (c == '\\' && i + 2 < lexeme.size()) {
            char n = lexeme[++i];
            switch (n) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '0': out += '\0'; break;
            default: out += n; break;
            }
        } else {
            out += c;
        }
    }
    return out;
}

class Parser {
public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {
        if (toks_.empty() || toks_.back().kind != TokenKind::End) {
            throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "token stream must end with End", {});
        }
    }

    UContract source() {
        std::optional<UContract> contract;
        while (!at_end()) {
            if (is_kw("pragma")) {
                while (!at_end() && !is_punct(";")) {
                    ++i_;
                }
                expect_punct(";");
            } else if (is_kw("contract") && !contract) {
                contract = contract_def();
            } else {
                unexpected(contract ? "end of input" : "'contract'");
            }
        }
        if (!contract) {
            unexpected("'contract'");
        }
        return *contract;
    }

    UExprPtr single_expression() {
        UExprPtr e = expr();
        if (!at_end()) {
            unexpected("end of expression");
        }
        return e;
    }

private:
    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p(p) {
            if (++p.depth_ > kMaxDepth) {
                throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "nesting too deep", p.cur().span);
            }
        }
        ~DepthGuard() { --p.depth_; }
        Parser& p;
    };

    const Token& cur() const { return toks_[i_]; }
    const Token& peek(std::size_t k = 1) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& prev() const { return toks_[i_ == 0 ? 0 : i_ - 1]; }
    bool at_end() const { return cur().kind == TokenKind::End; }
    bool is_punct(std::string_view p) const { return cur().kind == TokenKind::Punct && cur().lexeme == p; }
    bool is_kw(std::string_view k) const { return cur().kind == TokenKind::Keyword && cur().lexeme == k; }

    SourceSpan span_from(const Token& start) const {
        SourceSpan s = start.span;
        const Token& last = i_ > 0 ? prev() : start;
        s.end_line = last.span.end_line;
        s.end_col = last.span.end_col;
        if (s.end_line < s.line || (s.end_line == s.line && s.end_col < s.col)) {
            s.end_line = s.line;
            s.end_col = s.col;
        }
        return s;
    }

    [[noreturn]] void unexpected(const std::string& expected) {
        if (at_end() && !open_blocks_.empty()) {
            throw SyntaxError(SyntaxErrorKind::UnclosedBlock,
                              "block opened at " + open_blocks_.back().str() + " is not closed", cur().span, "'}'",
                              describe(cur()));
        }
        throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "expected " + expected + ", got " + describe(cur()),
                          cur().span, expected, describe(cur()));
    }

    const Token& expect_punct(std::string_view p) {
        if (!is_punct(p)) {
            unexpected("'" + std::string(p) + "'");
        }
        return toks_[i_++];
    }

    bool accept_punct(std::string_view p) {
        if (is_punct(p)) {
            ++i_;
            return true;
        }
        return false;
    }

    std::string expect_ident(const std::string& what = "identifier") {
        if (cur().kind != TokenKind::Identifier) {
            unexpected(what);
        }
        return toks_[i_++].lexeme;
    }

    void open_block() {
        open_blocks_.push_back(cur().span);
        expect_punct("{");
    }

    void close_block() {
        expect_punct("}");
        open_blocks_.pop_back();
    }

    std::optional<Visibility> visibility_keyword() {
        if (cur().kind != TokenKind::Keyword) {
            return std::nullopt;
        }
        const std::string& w = cur().lexeme;
        if (w == "public" || w == "external") {
            return Visibility::Public;
        }
        if (w == "private") {
            return Visibility::Private;
        }
        if (w == "internal") {
            return Visibility::Internal;
        }
        return std::nullopt;
    }

    // ------------------------------------------------------------ declarations

    UContract contract_def() {
        const Token& start = cur();
        ++i_;
        UContract c;
        c.name = expect_ident("contract name");
        open_block();
        while (!is_punct("}")) {
            if (at_end()) {
                unexpected("'}'");
            }
            if (is_kw("struct")) {
                c.structs.push_back(struct_def());
            } else if (is_kw("modifier")) {
                c.modifiers.push_back(modifier_def());
            } else if ((is_kw("function") && peek().kind == TokenKind::Identifier) || is_kw("constructor")) {
                c.functions.push_back(function_def());
            } else if (is_type_start()) {
                c.state.push_back(state_var());
            } else {
                unexpected("contract member");
            }
        }
        close_block();
        c.span = span_from(start);
        return c;
    }

    UStructDef struct_def() {
        const Token& start = cur();
        ++i_;
        UStructDef s;
        s.name = expect_ident("struct name");
        open_block();
        while (!is_punct("}")) {
            const Token& fs = cur();
            UParam p;
            p.type = type();
            p.name = expect_ident("field name");
            expect_punct(";");
            p.span = span_from(fs);
            s.fields.push_back(std::move(p));
        }
        close_block();
        s.span = span_from(start);
        return s;
    }

    UStmtPtr state_var() {
        const Token& start = cur();
        auto s = std::make_shared<UStmt>();
        s->kind = StmtKind::Var;
        s->type = type();
        for (;;) {
            if (auto v = visibility_keyword()) {
                s->vis = v;
                ++i_;
            } else if (is_kw("constant")) {
                ++i_;
            } else {
                break;
            }
        }
        s->name = expect_ident("variable name");
        if (accept_punct("=")) {
            s->e1 = expr();
        }
        expect_punct(";");
        s->span = span_from(start);
        return s;
    }

    std::vector<UParam> params() {
        std::vector<UParam> out;
        expect_punct("(");
        if (accept_punct(")")) {
            return out;
        }
        do {
            const Token& ps = cur();
            UParam p;
            p.type = type();
            skip_location();
            p.name = expect_ident("parameter name");
            p.span = span_from(ps);
            out.push_back(std::move(p));
        } while (accept_punct(","));
        expect_punct(")");
        return out;
    }

    void skip_location() {
        while (is_kw("memory") || is_kw("storage") || (cur().kind == TokenKind::Identifier && cur().lexeme == "calldata")) {
            ++i_;
        }
    }

    UModifierDef modifier_def() {
        const Token& start = cur();
        ++i_;
        UModifierDef m;
        m.name = expect_ident("modifier name");
        if (is_punct("(")) {
            m.params = params();
        }
        m.body = block();
        m.span = span_from(start);
        return m;
    }

    UFunctionDef function_def() {
        const Token& start = cur();
        UFunctionDef f;
        if (is_kw("constructor")) {
            ++i_;
            f.name = "constructor";
        } else {
            ++i_;
            f.name = expect_ident("function name");
        }
        f.params = params();
        for (;;) {
            if (auto v = visibility_keyword()) {
                f.vis = v;
                ++i_;
            } else if (is_kw("view") || is_kw("pure") || is_kw("payable") || is_kw("constant")) {
                ++i_;
            } else if (cur().kind == TokenKind::Identifier) {
                const Token& us = cur();
                UModifierUse use;
                use.name = toks_[i_++].lexeme;
                if (accept_punct("(")) {
                    if (!accept_punct(")")) {
                        do {
                            use.args.push_back(expr());
                        } while (accept_punct(","));
                        expect_punct(")");
                    }
                }
                use.span = span_from(us);
                f.modifiers.push_back(std::move(use));
            } else {
                break;
            }
        }
        if (is_kw("returns")) {
            ++i_;
            f.rets = type_list();
        }
        f.body = block();
        f.span = span_from(start);
        return f;
    }

    std::vector<UType> type_list() {
        std::vector<UType> out;
        expect_punct("(");
        if (accept_punct(")")) {
            return out;
        }
        do {
            out.push_back(type());
            skip_location();
        } while (accept_punct(","));
        expect_punct(")");
        return out;
    }

    // ------------------------------------------------------------ types

    bool is_type_start() const {
        if (is_elementary_keyword(cur())) {
            return !(cur().lexeme == "address" && peek().kind == TokenKind::Punct && peek().lexeme == "(");
        }
        if (is_kw("mapping") || (is_kw("function") && peek().kind == TokenKind::Punct && peek().lexeme == "(")) {
            return true;
        }
        if (cur().kind == TokenKind::Identifier) {
            const Token& n = peek();
            return n.kind == TokenKind::Identifier ||
                   (n.kind == TokenKind::Keyword && (n.lexeme == "memory" || n.lexeme == "storage" ||
                                                     n.lexeme == "public" || n.lexeme == "private" ||
                                                     n.lexeme == "internal"));
        }
        return false;
    }

    UType type() {
        DepthGuard g(*this);
        const Token& start = cur();
        if (is_elementary_keyword(cur())) {
            ++i_;
            if (start.lexeme == "address" && is_kw("payable")) {
                ++i_;
            }
            return UType::named(start.lexeme, start.span);
        }
        if (is_kw("mapping")) {
            ++i_;
            expect_punct("(");
            UType k = type();
            expect_punct("=>");
            UType v = type();
            expect_punct(")");
            return UType::mapping(std::move(k), std::move(v), span_from(start));
        }
        if (is_kw("function")) {
            ++i_;
            std::vector<UType> ps = type_list();
            while (visibility_keyword() || is_kw("view") || is_kw("pure") || is_kw("payable")) {
                ++i_;
            }
            std::vector<UType> rs;
            if (is_kw("returns")) {
                ++i_;
                rs = type_list();
            }
            return UType::function(std::move(ps), std::move(rs), span_from(start));
        }
        if (cur().kind == TokenKind::Identifier) {
            ++i_;
            return UType::named(start.lexeme, start.span);
        }
        unexpected("type");
    }

    // ------------------------------------------------------------ statements

    UStmtList block() {
        UStmtList out;
        open_block();
        while (!is_punct("}")) {
            if (at_end()) {
                unexpected("'}'");
            }
            out.push_back(statement());
        }
        close_block();
        return out;
    }

    UStmtList body() {
        if (is_punct("{")) {
            return block();
        }
        return {statement()};
    }

    UStmtPtr make(StmtKind k, const Token& start) {
        auto s = std::make_shared<UStmt>();
        s->kind = k;
        s->span = span_from(start);
        return s;
    }

    UStmtPtr throw_stmt(const Token& start) {
        auto s = std::make_shared<UStmt>();
        s->kind = StmtKind::Throw;
        s->span = span_from(start);
        return s;
    }

    UStmtPtr statement() {
        DepthGuard g(*this);
        const Token& start = cur();
        if (is_kw("if")) {
            ++i_;
            expect_punct("(");
            UExprPtr c = expr();
            expect_punct(")");
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::If;
            s->e1 = c;
            s->body = body();
            if (is_kw("else")) {
                ++i_;
                s->else_body = body();
            } else {
                s->else_body = {make(StmtKind::Snil, start)};
            }
            s->span = span_from(start);
            return s;
        }
        if (is_kw("while")) {
            ++i_;
            expect_punct("(");
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::While;
            s->e1 = expr();
            expect_punct(")");
            s->body = body();
            s->span = span_from(start);
            return s;
        }
        if (is_kw("for")) {
            ++i_;
            expect_punct("(");
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::For;
            if (!is_punct(";")) {
                s->init.push_back(simple(true));
            }
            expect_punct(";");
            if (!is_punct(";")) {
                s->e1 = expr();
            }
            expect_punct(";");
            if (!is_punct(")")) {
                s->step.push_back(simple(false));
            }
            expect_punct(")");
            s->body = body();
            s->span = span_from(start);
            return s;
        }
        if (is_kw("return")) {
            ++i_;
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::Return;
            if (!is_punct(";")) {
                s->exprs = return_values();
            }
            expect_punct(";");
            s->span = span_from(start);
            return s;
        }
        if (is_kw("throw")) {
            ++i_;
            expect_punct(";");
            return throw_stmt(start);
        }
        if (is_kw("revert")) {
            ++i_;
            expect_punct("(");
            if (cur().kind == TokenKind::StringLiteral) {
                ++i_;
            }
            expect_punct(")");
            expect_punct(";");
            return throw_stmt(start);
        }
        if (is_kw("require") || is_kw("assert")) {
            ++i_;
            expect_punct("(");
            UExprPtr c = expr();
            if (accept_punct(",")) {
                if (cur().kind != TokenKind::StringLiteral) {
                    unexpected("message string");
                }
                ++i_;
            }
            expect_punct(")");
            expect_punct(";");
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::If;
            s->span = span_from(start);
            s->e1 = UExpr::unary(UnOp::Not, c, c->span);
            s->body = {throw_stmt(start)};
            s->else_body = {make(StmtKind::Snil, start)};
            return s;
        }
        if (cur().kind == TokenKind::Identifier && cur().lexeme == "_" && peek().kind == TokenKind::Punct &&
            peek().lexeme == ";") {
            i_ += 2;
            return make(StmtKind::Placeholder, start);
        }
        if (accept_punct(";")) {
            return make(StmtKind::Snil, start);
        }
        UStmtPtr s = simple(true);
        expect_punct(";");
        return s;
    }

    std::vector<UExprPtr> return_values() {
        if (is_punct("(")) {
            std::size_t save = i_;
            ++i_;
            UExprPtr first = expr();
            if (accept_punct(",")) {
                std::vector<UExprPtr> out{first};
                do {
                    out.push_back(expr());
                } while (accept_punct(","));
                expect_punct(")");
                return out;
            }
            i_ = save;
        }
        return {expr()};
    }

    // Declaration, assignment, increment or call, without the trailing ';'.
    UStmtPtr simple(bool allow_decl) {
        const Token& start = cur();
        if (allow_decl && is_type_start()) {
            auto s = std::make_shared<UStmt>();
            s->kind = StmtKind::Var;
            s->type = type();
            skip_location();
            s->name = expect_ident("variable name");
            if (accept_punct("=")) {
                s->e1 = expr();
            }
            s->span = span_from(start);
            return s;
        }
        UExprPtr lhs = expr();
        auto s = std::make_shared<UStmt>();
        static const std::pair<std::string_view, BinOp> compound[] = {
            {"+=", BinOp::Add}, {"-=", BinOp::Sub}, {"*=", BinOp::Mul}, {"/=", BinOp::Div}, {"%=", BinOp::Mod}};
        if (accept_punct("=")) {
            s->kind = StmtKind::Assignv;
            s->e1 = lhs;
            s->e2 = expr();
            s->span = span_from(start);
            return s;
        }
        for (const auto& [p, op] : compound) {
            if (accept_punct(p)) {
                UExprPtr rhs = expr();
                s->kind = StmtKind::Assignv;
                s->e1 = lhs;
                s->span = span_from(start);
                s->e2 = UExpr::binary(op, lhs, rhs, s->span);
                return s;
            }
        }
        if (is_punct("++") || is_punct("--")) {
            BinOp op = is_punct("++") ? BinOp::Add : BinOp::Sub;
            ++i_;
            s->kind = StmtKind::Assignv;
            s->e1 = lhs;
            s->span = span_from(start);
            s->e2 = UExpr::binary(op, lhs, UExpr::int_lit("1", s->span), s->span);
            return s;
        }
        if (lhs->kind == UExprKind::Call) {
            s->kind = StmtKind::CallStmt;
            s->e1 = lhs;
            s->span = span_from(start);
            return s;
        }
        unexpected("assignment or call");
    }

    // ------------------------------------------------------------ expressions

    UExprPtr expr() { return binary_level(0); }

    UExprPtr binary_level(int level) {
        static const std::vector<std::vector<std::pair<std::string_view, BinOp>>> levels = {
            {{"||", BinOp::Or}},
            {{"&&", BinOp::And}},
            {{"==", BinOp::Eq}, {"!=", BinOp::Ne}},
            {{"<", BinOp::Lt}, {"<=", BinOp::Le}, {">", BinOp::Gt}, {">=", BinOp::Ge}},
            {{"+", BinOp::Add}, {"-", BinOp::Sub}},
            {{"*", BinOp::Mul}, {"/", BinOp::Div}, {"%", BinOp::Mod}},
        };
        if (level == static_cast<int>(levels.size())) {
            return unary();
        }
        DepthGuard g(*this);
        const Token& start = cur();
        UExprPtr lhs = binary_level(level + 1);
        for (;;) {
            bool matched = false;
            for (const auto& [p, op] : levels[level]) {
                if (is_punct(p)) {
                    ++i_;
                    UExprPtr rhs = binary_level(level + 1);
                    lhs = UExpr::binary(op, lhs, rhs, span_from(start));
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                return lhs;
            }
        }
    }

    UExprPtr unary() {
        DepthGuard g(*this);
        const Token& start = cur();
        if (accept_punct("!")) {
            UExprPtr a = unary();
            return UExpr::unary(UnOp::Not, a, span_from(start));
        }
        if (accept_punct("-")) {
            UExprPtr a = unary();
            return UExpr::unary(UnOp::Neg, a, span_from(start));
        }
        return postfix();
    }

    UExprPtr postfix() {
        const Token& start = cur();
        UExprPtr e = primary();
        for (;;) {
            if (accept_punct(".")) {
                std::string f = expect_ident("member name");
                e = UExpr::member(e, f, span_from(start));
            } else if (accept_punct("[")) {
                UExprPtr k = expr();
                expect_punct("]");
                e = UExpr::index(e, k, span_from(start));
            } else if (is_punct("(")) {
                if (e->kind != UExprKind::Var) {
                    unexpected("operator");
                }
                ++i_;
                std::vector<UExprPtr> args;
                if (!accept_punct(")")) {
                    do {
                        args.push_back(expr());
                    } while (accept_punct(","));
                    expect_punct(")");
                }
                std::string callee = e->text;
                e = callee == "old" && args.size() == 1 ? UExpr::old(args[0], span_from(start))
                                                        : UExpr::call(callee, std::move(args), span_from(start));
            } else {
                return e;
            }
        }
    }

    UExprPtr primary() {
        const Token& t = cur();
        switch (t.kind) {
        case TokenKind::IntLiteral: ++i_; return UExpr::int_lit(t.lexeme, t.span);
        case TokenKind::HexLiteral: ++i_; return UExpr::hex_lit(t.lexeme.substr(2), t.span);
        case TokenKind::StringLiteral: ++i_; return UExpr::string_lit(unescape(t.lexeme), t.span);
        case TokenKind::Identifier: ++i_; return UExpr::var(t.lexeme, t.span);
        case TokenKind::Keyword:
            if (t.lexeme == "true" || t.lexeme == "false") {
                ++i_;
                return UExpr::bool_lit(t.lexeme == "true", t.span);
            }
            if (is_elementary_keyword(t) && peek().kind == TokenKind::Punct && peek().lexeme == "(") {
                ++i_;
                return UExpr::var(t.lexeme, t.span);  // conversion syntax, resolved as a call
            }
            break;
        case TokenKind::Punct:
            if (t.lexeme == "(") {
                DepthGuard g(*this);
                ++i_;
                UExprPtr e = expr();
                expect_punct(")");
                return e;
            }
            break;
        default: break;
        }
        unexpected("expression");
    }

    const std::vector<Token>& toks_;
    std::size_t i_ = 0;
    int depth_ = 0;
    std::vector<SourceSpan> open_blocks_;
};

}  // namespace

UContract parse_source(const std::vector<Token>& tokens) { return Parser(tokens).source(); }

UContract parse_solidity(std::string_view source, const std::string& file) { return parse_source(lex(source, file)); }

UExprPtr parse_expression(std::string_view text, const std::string& file, int line) {
    std::vector<Token> toks = lex(text, file);
    for (auto& t : toks) {
        t.span.line += line - 1;
        t.span.end_line += line - 1;
    }
    return Parser(toks).single_expression();
}

}  // namespace fspvm
