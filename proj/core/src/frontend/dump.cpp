#include <cctype>
#include <cstdio>

#include "fspvm/frontend.hpp"

namespace fspvm {

namespace {

std::string pad(int n) { return std::string(static_cast<std::size_t>(n), ' '); }

std::string width_tag(int w) { return "I" + std::to_string(w); }

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c; break;
        }
    }
    return out + "\"";
}

std::string hex_bits(const Bits256& b, int digits) {
    std::string out(static_cast<std::size_t>(digits), '0');
    Bits256 v = b;
    for (int i = digits - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = "0123456789abcdef"[static_cast<unsigned>(v & 0xf)];
        v >>= 4;
    }
    return "0x" + out;
}

int precedence(BinOp op) {
    switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return 6;
    }
    return 0;
}

std::string vis_opt(const std::optional<Visibility>& v) {
    return v ? "(Some " + std::string(visibility_name(*v)) + ")" : "None";
}

template <class T, class F>
std::string inline_list(const std::vector<T>& items, F&& render) {
    if (items.empty()) {
        return "(nil)";
    }
    std::string out = "(";
    for (const auto& it : items) {
        out += render(it) + ";; ";
    }
    return out + "nil)";
}

class Printer {
public:
    explicit Printer(int uint_width) : w_(uint_width) {}

    std::string type(const LType& t) const {
        switch (t.kind()) {
        case TypeKind::Int:
            if (!t.is_signed() && t.width() == w_) {
                return "Tuint";
            }
            return "(Tint " + width_tag(t.width()) + (t.is_signed() ? " Signed)" : " Unsigned)");
        case TypeKind::Bool: return "Tbool";
        case TypeKind::Address: return "Taddress";
        case TypeKind::String: return "Tstring";
        case TypeKind::Bytes: return "(Tbytes " + std::to_string(t.bytes_len()) + ")";
        case TypeKind::Mapping: return "(Tmap " + type(t.key()) + " " + type(t.value()) + ")";
        case TypeKind::Struct: return "(Tstruct " + t.struct_name() + ")";
        case TypeKind::Fun:
            return "(Tfun " + types(t.params()) + " " + types(t.rets()) + ")";
        case TypeKind::Unit: return "Tunit";
        }
        return "?";
    }

    std::string types(const std::vector<LType>& ts) const {
        return inline_list(ts, [&](const LType& t) { return type(t); });
    }

    // Bare value, without surrounding parentheses.
    std::string value(const Value& v) const {
        switch (v.kind()) {
        case ValueKind::Int:
            return "Vint (INT " + width_tag(v.int_width()) +
                   (v.int_signedness() == Signedness::Signed ? " Signed " : " Unsigned ") + v.int_value().str() + ")";
        case ValueKind::Bool: return std::string("Vbool ") + (v.as_bool() ? "true" : "false");
        case ValueKind::Address: return "Vaddress " + hex_bits(v.address_bits(), 40);
        case ValueKind::String: return "Vstring " + quote_string(v.as_string());
        case ValueKind::Bytes: {
            std::string h = "0x";
            for (auto b : v.as_bytes()) {
                char buf[3];
                std::snprintf(buf, sizeof buf, "%02x", b);
                h += buf;
            }
            return "Vbytes " + h;
        }
        case ValueKind::Map: {
            const MapData& m = v.as_map();
            std::vector<std::pair<Value, Value>> entries(m.entries.begin(), m.entries.end());
            return "Vmapv " + type(m.key_type) + " " + type(m.value_type) + " " + value_arg(*m.fallback) + " " +
                   inline_list(entries, [&](const std::pair<Value, Value>& kv) {
                       return "(" + value_arg(kv.first) + " |-> " + value_arg(kv.second) + ")";
                   });
        }
        case ValueKind::Struct: {
            const StructData& s = v.as_struct();
            return "Vstruct " + s.name + " " +
                   inline_list(s.fields, [&](const std::pair<std::string, Value>& f) {
                       return "(" + f.first + " |-> " + value_arg(f.second) + ")";
                   });
        }
        case ValueKind::FunPtr: return "Vfunptr " + v.funptr_name() + " " + type(v.type());
        case ValueKind::Unit: return "Vunit";
        case ValueKind::InitData: return "VinitData";
        }
        return "?";
    }

    std::string value_arg(const Value& v) const {
        std::string s = value(v);
        return s.find(' ') == std::string::npos ? s : "(" + s + ")";
    }

    std::string expr(const Expr& e) const {
        switch (e.kind()) {
        case ExprKind::Const: return "Econst (" + value(e.value()) + ")";
        case ExprKind::Var: return "Evar (Some " + e.name() + ") " + type(e.type());
        case ExprKind::Bop: {
            int p = precedence(e.binop());
            const Expr& l = *e.arg(0);
            const Expr& r = *e.arg(1);
            std::string ls = l.kind() == ExprKind::Bop && precedence(l.binop()) < p ? arg(l) : expr(l);
            std::string rs = r.kind() == ExprKind::Bop && precedence(r.binop()) <= p ? arg(r) : expr(r);
            return ls + " (" + std::string(binop_symbol(e.binop())) + ") " + rs;
        }
        case ExprKind::Uop: return "Euop (" + std::string(unop_symbol(e.unop())) + ") (" + expr(*e.arg(0)) + ")";
        case ExprKind::Map: return "Emap (" + expr(*e.arg(0)) + ") (" + expr(*e.arg(1)) + ") " + type(e.type());
        case ExprKind::Field: return "Efield (" + expr(*e.arg(0)) + ") " + e.name() + " " + type(e.type());
        case ExprKind::Call:
            return "Ecall " + e.name() + " " + inline_list(e.args(), [&](const ExprPtr& a) { return arg(*a); }) + " " +
                   types(e.ret_types());
        case ExprKind::Old: return "Eold (" + expr(*e.arg(0)) + ")";
        }
        return "?";
    }

    std::string arg(const Expr& e) const { return "(" + expr(e) + ")"; }

    std::string stmt(const Stmt& s, int ind) const {
        switch (s.kind()) {
        case StmtKind::Var: {
            std::string out = "Var " + vis_opt(s.vis()) + " (Evar (Some " + s.name() + ") " + type(s.type()) + ")";
            if (s.init_expr()) {
                out += " " + arg(*s.init_expr());
            }
            return out;
        }
        case StmtKind::Assignv: return "Assignv " + arg(*s.lhs()) + " " + arg(*s.rhs());
        case StmtKind::If:
            return "If " + arg(*s.cond()) + "\n" + pad(ind + 2) + nested(s.body(), ind + 2) + "\n" + pad(ind + 2) +
                   nested(s.else_body(), ind + 2);
        case StmtKind::While: return "While " + arg(*s.cond()) + "\n" + pad(ind + 2) + nested(s.body(), ind + 2);
        case StmtKind::For:
            return "For " + nested(s.init(), ind + 4) + " " + arg(*s.cond()) + " " + nested(s.step(), ind + 4) + "\n" +
                   pad(ind + 2) + nested(s.body(), ind + 2);
        case StmtKind::Throw: return "Throw";
        case StmtKind::Snil: return "Snil";
        case StmtKind::Placeholder: return "Placeholder";
        case StmtKind::Return:
            return "Return " + inline_list(s.exprs(), [&](const ExprPtr& e) { return arg(*e); });
        case StmtKind::CallStmt: return "CallStmt " + arg(*s.call());
        }
        return "?";
    }

    // `s1;;\n<pad>s2;; nil`, items starting at column ind.
    std::string list(const StmtList& l, int ind) const {
        if (l.empty()) {
            return "nil";
        }
        std::string out;
        for (std::size_t i = 0; i < l.size(); ++i) {
            if (i > 0) {
                out += "\n" + pad(ind);
            }
            out += stmt(*l[i], ind) + ";;";
        }
        return out + " nil";
    }

    std::string nested(const StmtList& l, int ind) const { return "(" + list(l, ind + 1) + ")"; }

    std::string params(const std::vector<Param>& ps) const {
        return inline_list(ps, [&](const Param& p) { return "(" + p.name + " : " + type(p.type) + ")"; });
    }

private:
    int w_;
};

}  // namespace

std::string pretty_print(const LType& t, int uint_width) { return Printer(uint_width).type(t); }
std::string pretty_print(const Expr& e, int uint_width) { return Printer(uint_width).expr(e); }
std::string pretty_print(const Stmt& s, int uint_width, int indent) { return Printer(uint_width).stmt(s, indent); }
std::string pretty_print(const StmtList& l, int uint_width, int indent) {
    return Printer(uint_width).list(l, indent);
}

std::string stmt_head(const Stmt& s, int uint_width) {
    std::string full = Printer(uint_width).stmt(s, 0);
    std::string head = full.substr(0, full.find('\n'));
    if (head.size() > 96) {
        head = head.substr(0, 93) + "...";
    }
    return head;
}

std::string pretty_print(const Contract& c) {
    Printer p(c.uint_width());
    std::string out = "Contract " + c.name() + " (Tuint " + width_tag(c.uint_width()) + ")\n";
    for (const auto& name : c.struct_order()) {
        const auto& fields = c.structs().at(name);
        out += "Struct " + name + "\n  " + inline_list(fields, [&](const std::pair<std::string, LType>& f) {
                   return "(" + f.first + " : " + p.type(f.second) + ")";
               }) + "\n";
    }
    out += "State\n  " + p.nested(c.state(), 2) + "\n";
    for (const auto& m : c.modifiers()) {
        out += "Modifier " + m.name() + " " + p.params(m.params()) + "\n  " + p.nested(m.body(), 2) + "\n";
    }
    for (const auto& f : c.functions()) {
        out += "Function " + f.name() + " " + vis_opt(f.vis()) + " " + p.params(f.params()) + " " + p.types(f.rets()) +
               "\n  " + inline_list(f.modifiers(), [&](const ModifierUse& u) {
                   return "(" + u.name + " " +
                          inline_list(u.args, [&](const ExprPtr& a) { return p.arg(*a); }) + ")";
               }) +
               "\n  " + p.nested(f.body(), 2) + "\n";
    }
    return out + "End\n";
}

// ---------------------------------------------------------------- reader

namespace {

enum class DTok { Ident, Number, Hex, String, LParen, RParen, Semi2, Colon, Op, End };

struct DToken {
    DTok kind;
    std::string text;
    SourceSpan span;
};

std::vector<DToken> dump_lex(std::string_view src, const std::string& file) {
    std::vector<DToken> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&] {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto is_ident = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '.' || c == '#';
    };
    auto is_op = [](char c) { return std::string_view("+-*/%<>=!&|").find(c) != std::string_view::npos; };
    while (i < src.size()) {
        char c = src[i];
        SourceSpan span{file, line, col, line, col};
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv();
            continue;
        }
        std::size_t start = i;
        DTok kind;
        if (c == '(' || c == ')' || c == ':') {
            kind = c == '(' ? DTok::LParen : c == ')' ? DTok::RParen : DTok::Colon;
            adv();
        } else if (c == ';' && i + 1 < src.size() && src[i + 1] == ';') {
            kind = DTok::Semi2;
            adv();
            adv();
        } else if (c == '"') {
            kind = DTok::String;
            adv();
            while (i < src.size() && src[i] != '"' && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < src.size()) {
                    adv();
                }
                adv();
            }
            if (i >= src.size() || src[i] != '"') {
                throw SyntaxError(SyntaxErrorKind::UnterminatedString, "unterminated string literal", span);
            }
            adv();
        } else if (c == '0' && i + 1 < src.size() && src[i + 1] == 'x') {
            kind = DTok::Hex;
            adv();
            adv();
            while (i < src.size() && std::isxdigit(static_cast<unsigned char>(src[i]))) {
                adv();
            }
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            kind = DTok::Number;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                adv();
            }
        } else if (is_ident(c)) {
            kind = DTok::Ident;
            while (i < src.size() && is_ident(src[i])) {
                adv();
            }
        } else if (is_op(c)) {
            kind = DTok::Op;
            while (i < src.size() && is_op(src[i])) {
                adv();
            }
        } else {
            throw SyntaxError(SyntaxErrorKind::UnknownCharacter, std::string("unknown character '") + c + "'", span);
        }
        span.end_line = line;
        span.end_col = col > 1 ? col - 1 : col;
        out.push_back({kind, std::string(src.substr(start, i - start)), span});
    }
    out.push_back({DTok::End, "", SourceSpan{file, line, col, line, col}});
    return out;
}

std::string unquote(const std::string& s) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) {
            char n = s[++i];
            out += n == 'n' ? '\n' : n == 't' ? '\t' : n == 'r' ? '\r' : n;
        } else {
            out += s[i];
        }
    }
    return out;
}

class DumpReader {
public:
    DumpReader(std::vector<DToken> toks, int uint_width) : t_(std::move(toks)), w_(uint_width) {}

    UContract contract() {
        UContract c;
        c.span = cur().span;
        word("Contract");
        c.name = ident();
        lparen();
        word("Tuint");
        w_ = width();
        rparen();
        while (is_word("Struct")) {
            ++i_;
            UStructDef s;
            s.span = cur().span;
            s.name = ident();
            s.fields = params();
            c.structs.push_back(std::move(s));
        }
        word("State");
        c.state = nested();
        while (is_word("Modifier")) {
            ++i_;
            UModifierDef m;
            m.span = cur().span;
            m.name = ident();
            m.params = params();
            m.body = nested();
            c.modifiers.push_back(std::move(m));
        }
        while (is_word("Function")) {
            ++i_;
            UFunctionDef f;
            f.span = cur().span;
            f.name = ident();
            f.vis = vis();
            f.params = params();
            for (auto& t : types()) {
                f.rets.push_back(UType::of(t));
            }
            list_of([&] {
                lparen();
                UModifierUse u;
                u.span = cur().span;
                u.name = ident();
                u.args = expr_args();
                rparen();
                f.modifiers.push_back(std::move(u));
            });
            f.body = nested();
            c.functions.push_back(std::move(f));
        }
        word("End");
        end();
        return c;
    }

    UStmtList stmts() {
        UStmtList l = bare_list();
        end();
        return l;
    }

    int uint_width() const { return w_; }

private:
    const DToken& cur() const { return t_[i_]; }
    bool is(DTok k) const { return cur().kind == k; }
    bool is_word(std::string_view w) const { return is(DTok::Ident) && cur().text == w; }

    [[noreturn]] void unexpected(const std::string& expected) const {
        std::string got = is(DTok::End) ? "end of input" : "'" + cur().text + "'";
        throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "expected " + expected + ", got " + got, cur().span,
                          expected, got);
    }

    void expect(DTok k, const char* what) {
        if (!is(k)) {
            unexpected(what);
        }
        ++i_;
    }
    void lparen() { expect(DTok::LParen, "'('"); }
    void rparen() { expect(DTok::RParen, "')'"); }
    void end() { expect(DTok::End, "end of input"); }
    void word(std::string_view w) {
        if (!is_word(w)) {
            unexpected("'" + std::string(w) + "'");
        }
        ++i_;
    }
    std::string ident() {
        if (!is(DTok::Ident)) {
            unexpected("identifier");
        }
        return t_[i_++].text;
    }
    bool is_op_paren(const char* op = nullptr) const {
        return i_ + 2 < t_.size() && t_[i_].kind == DTok::LParen && t_[i_ + 1].kind == DTok::Op &&
               t_[i_ + 2].kind == DTok::RParen && (!op || t_[i_ + 1].text == op);
    }

    int width() {
        std::string w = ident();
        if (w.size() < 2 || w[0] != 'I') {
            unexpected("integer width tag");
        }
        int n = 0;
        for (std::size_t j = 1; j < w.size(); ++j) {
            if (!std::isdigit(static_cast<unsigned char>(w[j])) || n > 1000) {
                unexpected("integer width tag");
            }
            n = n * 10 + (w[j] - '0');
        }
        if (!is_valid_int_width(n)) {
            unexpected("integer width tag");
        }
        return n;
    }

    // `(x;; y;; nil)` or `(nil)`, with f parsing one item.
    template <class F>
    void list_of(F&& f) {
        lparen();
        while (!is_word("nil")) {
            f();
            expect(DTok::Semi2, "';;'");
        }
        ++i_;
        rparen();
    }

    std::optional<Visibility> vis() {
        if (is_word("None")) {
            ++i_;
            return std::nullopt;
        }
        lparen();
        word("Some");
        std::string v = ident();
        rparen();
        if (v == "public") {
            return Visibility::Public;
        }
        if (v == "private") {
            return Visibility::Private;
        }
        if (v == "internal") {
            return Visibility::Internal;
        }
        --i_;
        unexpected("visibility");
    }

    std::vector<UParam> params() {
        std::vector<UParam> out;
        list_of([&] {
            lparen();
            UParam p;
            p.span = cur().span;
            p.name = ident();
            expect(DTok::Colon, "':'");
            p.type = UType::of(type(), p.span);
            rparen();
            out.push_back(std::move(p));
        });
        return out;
    }

    std::vector<LType> types() {
        std::vector<LType> out;
        list_of([&] { out.push_back(type()); });
        return out;
    }

    LType type() {
        if (is(DTok::Ident)) {
            std::string w = ident();
            if (w == "Tuint") {
                return LType::uint(w_);
            }
            if (w == "Tbool") {
                return LType::boolean();
            }
            if (w == "Taddress") {
                return LType::address();
            }
            if (w == "Tstring") {
                return LType::string();
            }
            if (w == "Tunit") {
                return LType::unit();
            }
            --i_;
            unexpected("type");
        }
        lparen();
        std::string w = ident();
        LType out;
        if (w == "Tint") {
            int n = width();
            std::string s = ident();
            if (s != "Signed" && s != "Unsigned") {
                --i_;
                unexpected("Signed or Unsigned");
            }
            out = LType::integer(n, s == "Signed" ? Signedness::Signed : Signedness::Unsigned);
        } else if (w == "Tbytes") {
            if (!is(DTok::Number) || cur().text.size() > 2) {
                unexpected("byte count");
            }
            int n = std::stoi(t_[i_++].text);
            if (n < 1 || n > 32) {
                --i_;
                unexpected("byte count 1..32");
            }
            out = LType::bytes(n);
        } else if (w == "Tmap") {
            LType k = type();
            LType v = type();
            out = LType::mapping(k, v);
        } else if (w == "Tstruct") {
            out = LType::structure(ident());
        } else if (w == "Tfun") {
            std::vector<LType> ps = types();
            std::vector<LType> rs = types();
            out = LType::function(std::move(ps), std::move(rs));
        } else {
            --i_;
            unexpected("type constructor");
        }
        rparen();
        return out;
    }

    BigInt number(bool allow_negative) {
        bool neg = false;
        if (allow_negative && is(DTok::Op) && cur().text == "-") {
            neg = true;
            ++i_;
        }
        if (!is(DTok::Number)) {
            unexpected("number");
        }
        BigInt n(t_[i_++].text);
        return neg ? BigInt(-n) : n;
    }

    Bits256 hex(int max_digits) {
        if (!is(DTok::Hex) || cur().text.size() < 3 || static_cast<int>(cur().text.size()) - 2 > max_digits) {
            unexpected("hex literal");
        }
        Bits256 v = 0;
        for (char ch : t_[i_++].text.substr(2)) {
            v = (v << 4) | Bits256(std::isdigit(static_cast<unsigned char>(ch)) ? ch - '0' : (std::tolower(ch) - 'a' + 10));
        }
        return v;
    }

    Value value_arg() {
        if (is(DTok::LParen)) {
            lparen();
            Value v = value();
            rparen();
            return v;
        }
        return value();
    }

    Value value() {
        std::string w = ident();
        if (w == "Vint") {
            lparen();
            word("INT");
            int n = width();
            std::string s = ident();
            if (s != "Signed" && s != "Unsigned") {
                --i_;
                unexpected("Signed or Unsigned");
            }
            Signedness sg = s == "Signed" ? Signedness::Signed : Signedness::Unsigned;
            SourceSpan at = cur().span;
            BigInt k = number(true);
            rparen();
            Value v = int_wrap(n, sg, k);
            if (v.int_value() != k) {
                throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "integer out of range for its type", at);
            }
            return v;
        }
        if (w == "Vbool") {
            std::string b = ident();
            if (b != "true" && b != "false") {
                --i_;
                unexpected("true or false");
            }
            return Value::boolean(b == "true");
        }
        if (w == "Vaddress") {
            return Value::address(hex(40));
        }
        if (w == "Vstring") {
            if (!is(DTok::String)) {
                unexpected("string");
            }
            return Value::string(unquote(t_[i_++].text));
        }
        if (w == "Vbytes") {
            if (!is(DTok::Hex) || cur().text.size() % 2 != 0 || cur().text.size() < 4 || cur().text.size() > 66) {
                unexpected("byte string");
            }
            std::string h = t_[i_++].text.substr(2);
            std::vector<std::uint8_t> octets;
            for (std::size_t j = 0; j < h.size(); j += 2) {
                octets.push_back(static_cast<std::uint8_t>(std::stoi(h.substr(j, 2), nullptr, 16)));
            }
            return Value::bytes(std::move(octets));
        }
        if (w == "Vmapv") {
            LType k = type();
            LType v = type();
            Value fallback = value_arg();
            std::map<Value, Value> entries;
            list_of([&] {
                lparen();
                Value key = value_arg();
                if (!is(DTok::Op) || cur().text != "|->") {
                    unexpected("'|->'");
                }
                ++i_;
                Value val = value_arg();
                rparen();
                entries[key] = val;
            });
            try {
                return Value::map(k, v, fallback, std::move(entries));
            } catch (const DomainError& e) {
                throw SyntaxError(SyntaxErrorKind::UnexpectedToken, e.what(), cur().span);
            }
        }
        if (w == "Vstruct") {
            std::string name = ident();
            std::vector<std::pair<std::string, Value>> fields;
            list_of([&] {
                lparen();
                std::string f = ident();
                if (!is(DTok::Op) || cur().text != "|->") {
                    unexpected("'|->'");
                }
                ++i_;
                Value val = value_arg();
                rparen();
                fields.emplace_back(f, val);
            });
            return Value::structure(name, std::move(fields));
        }
        if (w == "Vfunptr") {
            std::string name = ident();
            LType t = type();
            if (!t.is_fun()) {
                unexpected("function type");
            }
            return Value::funptr(name, t);
        }
        if (w == "Vunit") {
            return Value::unit();
        }
        --i_;
        unexpected("value constructor");
    }

    // ------------------------------------------------------------ expressions

    UExprPtr arg() {
        lparen();
        UExprPtr e = expr();
        rparen();
        return e;
    }

    std::vector<UExprPtr> expr_args() {
        std::vector<UExprPtr> out;
        list_of([&] { out.push_back(arg()); });
        return out;
    }

    UExprPtr expr() { return binary(1); }

    // Operands joined by `(op)` tokens, by precedence, left-associative.
    UExprPtr binary(int min_prec) {
        if (++depth_ > 512) {
            throw SyntaxError(SyntaxErrorKind::UnexpectedToken, "nesting too deep", cur().span);
        }
        UExprPtr lhs = operand();
        for (;;) {
            if (!is_op_paren()) {
                break;
            }
            std::optional<BinOp> op = binop_of(t_[i_ + 1].text);
            if (!op) {
                ++i_;
                unexpected("binary operator");
            }
            int p = precedence(*op);
            if (p < min_prec) {
                break;
            }
            i_ += 3;
            UExprPtr rhs = binary(p + 1);
            lhs = UExpr::binary(*op, lhs, rhs, lhs->span);
        }
        --depth_;
        return lhs;
    }

    static std::optional<BinOp> binop_of(const std::string& op) {
        static const std::pair<std::string_view, BinOp> ops[] = {
            {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}, {"/", BinOp::Div}, {"%", BinOp::Mod},
            {"<", BinOp::Lt},  {"<=", BinOp::Le}, {">", BinOp::Gt},  {">=", BinOp::Ge}, {"==", BinOp::Eq},
            {"!=", BinOp::Ne}, {"&", BinOp::And}, {"|", BinOp::Or},
        };
        for (const auto& [sym, bop] : ops) {
            if (sym == op) {
                return bop;
            }
        }
        return std::nullopt;
    }

    UExprPtr operand() {
        if (is(DTok::LParen) && !is_op_paren()) {
            return arg();
        }
        SourceSpan at = cur().span;
        std::string w = ident();
        if (w == "Econst") {
            lparen();
            Value v = value();
            rparen();
            return UExpr::constant_of(std::move(v), at);
        }
        if (w == "Evar") {
            lparen();
            word("Some");
            std::string name = ident();
            rparen();
            LType t = type();
            return UExpr::var(name, at, t);
        }
        if (w == "Euop") {
            if (!is_op_paren()) {
                unexpected("'(!)' or '(-)'");
            }
            std::string op = t_[i_ + 1].text;
            i_ += 3;
            if (op != "!" && op != "-") {
                i_ -= 2;
                unexpected("unary operator");
            }
            UExprPtr a = arg();
            return UExpr::unary(op == "!" ? UnOp::Not : UnOp::Neg, a, at);
        }
        if (w == "Emap") {
            UExprPtr base = arg();
            UExprPtr key = arg();
            type();
            return UExpr::index(base, key, at);
        }
        if (w == "Efield") {
            UExprPtr base = arg();
            std::string f = ident();
            type();
            return UExpr::member(base, f, at);
        }
        if (w == "Ecall") {
            std::string f = ident();
            std::vector<UExprPtr> args = expr_args();
            types();
            return UExpr::call(f, std::move(args), at);
        }
        if (w == "Eold") {
            return UExpr::old(arg(), at);
        }
        --i_;
        unexpected("expression");
    }

    // ------------------------------------------------------------ statements

    UStmtList nested() {
        lparen();
        UStmtList l = bare_list();
        rparen();
        return l;
    }

    UStmtList bare_list() {
        UStmtList out;
        while (!is_word("nil")) {
            out.push_back(stmt());
            expect(DTok::Semi2, "';;'");
        }
        ++i_;
        return out;
    }

    UStmtPtr stmt() {
        auto s = std::make_shared<UStmt>();
        s->span = cur().span;
        std::string w = ident();
        if (w == "Var") {
            s->kind = StmtKind::Var;
            s->vis = vis();
            lparen();
            word("Evar");
            lparen();
            word("Some");
            s->name = ident();
            rparen();
            s->type = UType::of(type(), s->span);
            rparen();
            if (is(DTok::LParen)) {
                s->e1 = arg();
            }
        } else if (w == "Assignv") {
            s->kind = StmtKind::Assignv;
            s->e1 = arg();
            s->e2 = arg();
        } else if (w == "If") {
            s->kind = StmtKind::If;
            s->e1 = arg();
            s->body = nested();
            s->else_body = nested();
        } else if (w == "While") {
            s->kind = StmtKind::While;
            s->e1 = arg();
            s->body = nested();
        } else if (w == "For") {
            s->kind = StmtKind::For;
            s->init = nested();
            s->e1 = arg();
            s->step = nested();
            s->body = nested();
        } else if (w == "Throw") {
            s->kind = StmtKind::Throw;
        } else if (w == "Snil") {
            s->kind = StmtKind::Snil;
        } else if (w == "Placeholder") {
            s->kind = StmtKind::Placeholder;
        } else if (w == "Return") {
            s->kind = StmtKind::Return;
            s->exprs = expr_args();
        } else if (w == "CallStmt") {
            s->kind = StmtKind::CallStmt;
            s->e1 = arg();
        } else {
            --i_;
            unexpected("statement");
        }
        return s;
    }

    std::vector<DToken> t_;
    std::size_t i_ = 0;
    int w_;
    int depth_ = 0;
};

}  // namespace

Contract parse_lolisa_text(std::string_view text, const std::string& file) {
    DumpReader r(dump_lex(text, file), 256);
    UContract u = r.contract();
    return typecheck_contract(u, TypeOptions{r.uint_width()});
}

StmtList parse_lolisa_stmts(std::string_view text, const TypeContext& ctx, const std::string& file) {
    DumpReader r(dump_lex(text, file), ctx.options().uint_width);
    UStmtList u = r.stmts();
    TypeContext c = ctx;
    StmtList out;
    for (const auto& s : u) {
        auto [typed, next] = typecheck_stmt(c, *s);
        out.push_back(typed);
        c = next;
    }
    return out;
}

}  // namespace fspvm
