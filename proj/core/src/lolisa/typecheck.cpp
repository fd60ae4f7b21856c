#include <algorithm>
#include <set>

#include "builders.hpp"
#include "fspvm/lolisa.hpp"

namespace fspvm {

std::string_view type_error_name(TypeErrorKind k) {
    switch (k) {
    case TypeErrorKind::UnboundIdentifier: return "UnboundIdentifier";
    case TypeErrorKind::TypeMismatch: return "TypeMismatch";
    case TypeErrorKind::BadOperand: return "BadOperand";
    case TypeErrorKind::ArityMismatch: return "ArityMismatch";
    case TypeErrorKind::NotAnLValue: return "NotAnLValue";
    case TypeErrorKind::ReturnOutsideFunction: return "ReturnOutsideFunction";
    case TypeErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case TypeErrorKind::UnknownModifier: return "UnknownModifier";
    case TypeErrorKind::MissingPlaceholder: return "MissingPlaceholder";
    case TypeErrorKind::MisplacedPlaceholder: return "MisplacedPlaceholder";
    case TypeErrorKind::UnknownType: return "UnknownType";
    }
    return "?";
}

std::string TypeError::str() const {
    return span.str() + ": " + std::string(type_error_name(kind)) + ": " + message;
}

namespace {

std::string join_errors(const std::vector<TypeError>& errors) {
    std::string out;
    for (const auto& e : errors) {
        if (!out.empty()) {
            out += "\n";
        }
        out += e.str();
    }
    return out;
}

[[noreturn]] void fail(TypeErrorKind k, std::string message, const SourceSpan& span) {
    throw TypeErrors({TypeError{k, std::move(message), span}});
}

const std::set<std::string>& reserved_names() {
    static const std::set<std::string> names{"now", "msg", "block", "this", "old"};
    return names;
}

bool contains_fun(const LType& t) {
    if (t.is_fun()) {
        return true;
    }
    if (t.is_mapping()) {
        return contains_fun(t.key()) || contains_fun(t.value());
    }
    return false;
}

bool is_literal(const UExpr& e) {
    switch (e.kind) {
    case UExprKind::IntLit:
    case UExprKind::HexLit: return true;
    case UExprKind::Unary: return e.uop == UnOp::Neg && is_literal(*e.args[0]);
    default: return false;
    }
}

BigInt parse_digits(const std::string& digits, int base, const SourceSpan& span) {
    BigInt n = 0;
    for (char ch : digits) {
        int d;
        if (ch >= '0' && ch <= '9') {
            d = ch - '0';
        } else if (base == 16 && ch >= 'a' && ch <= 'f') {
            d = ch - 'a' + 10;
        } else if (base == 16 && ch >= 'A' && ch <= 'F') {
            d = ch - 'A' + 10;
        } else if (ch == '_') {
            continue;
        } else {
            fail(TypeErrorKind::TypeMismatch, "malformed numeric literal '" + digits + "'", span);
        }
        if (d >= base) {
            fail(TypeErrorKind::TypeMismatch, "malformed numeric literal '" + digits + "'", span);
        }
        n = n * base + d;
    }
    return n;
}

bool fits(const BigInt& n, const LType& t) {
    int w = t.width();
    if (t.is_signed()) {
        BigInt half = BigInt(1) << (w - 1);
        return n >= -half && n < half;
    }
    return n >= 0 && n < (BigInt(1) << w);
}

struct Builtin {
    const char* name;
    enum { Uint, Address } type;
};

constexpr Builtin kBuiltins[] = {
    {"now", Builtin::Uint},          {"this", Builtin::Address},        {"msg.sender", Builtin::Address},
    {"msg.value", Builtin::Uint},    {"block.number", Builtin::Uint},   {"block.timestamp", Builtin::Uint},
};

}  // namespace

TypeErrors::TypeErrors(std::vector<TypeError> errors) : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

LType FunctionDef::fun_type() const {
    std::vector<LType> ps;
    for (const auto& p : params_) {
        ps.push_back(p.type);
    }
    return LType::function(std::move(ps), rets_);
}

const FunctionDef* Contract::find_function(const std::string& name) const {
    for (const auto& f : functions_) {
        if (f.name() == name) {
            return &f;
        }
    }
    return nullptr;
}

const ModifierDef* Contract::find_modifier(const std::string& name) const {
    for (const auto& m : modifiers_) {
        if (m.name() == name) {
            return &m;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------- context

TypeContext::TypeContext(TypeOptions opts) : opts_(opts), scopes_(1) {}

TypeContext TypeContext::for_contract(const Contract& c) {
    TypeContext ctx(TypeOptions{c.uint_width()});
    ctx.structs_ = c.structs();
    for (const auto& s : c.state()) {
        ctx.state_[s->name()] = s->type();
    }
    for (const auto& f : c.functions()) {
        FunctionSig sig;
        for (const auto& p : f.params()) {
            sig.params.push_back(p.type);
        }
        sig.rets = f.rets();
        ctx.functions_[f.name()] = std::move(sig);
    }
    return ctx;
}

std::optional<LType> TypeContext::lookup_var(const std::string& name, VarScope* scope) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
        auto f = it->find(name);
        if (f != it->end()) {
            if (scope) {
                *scope = VarScope::Local;
            }
            return f->second;
        }
    }
    auto s = state_.find(name);
    if (s != state_.end()) {
        if (scope) {
            *scope = VarScope::State;
        }
        return s->second;
    }
    return std::nullopt;
}

const FunctionSig* TypeContext::lookup_function(const std::string& name) const {
    auto f = functions_.find(name);
    return f == functions_.end() ? nullptr : &f->second;
}

TypeContext TypeContext::with_var(const std::string& name, const LType& t, const SourceSpan& span) const {
    if (reserved_names().count(name)) {
        fail(TypeErrorKind::DuplicateDeclaration, "'" + name + "' is a built-in name", span);
    }
    if (scopes_.back().count(name)) {
        fail(TypeErrorKind::DuplicateDeclaration, "'" + name + "' is already declared in this scope", span);
    }
    TypeContext out = *this;
    out.scopes_.back()[name] = t;
    return out;
}

TypeContext TypeContext::push_scope() const {
    TypeContext out = *this;
    out.scopes_.emplace_back();
    return out;
}

TypeContext TypeContext::with_old(bool allowed) const {
    TypeContext out = *this;
    out.allow_old_ = allowed;
    return out;
}

LType TypeContext::resolve_type(const UType& t) const {
    switch (t.kind) {
    case UType::Kind::Resolved: {
        const LType& r = *t.resolved;
        if (r.is_struct() && !structs_.count(r.struct_name())) {
            fail(TypeErrorKind::UnknownType, "unknown struct '" + r.struct_name() + "'", t.span);
        }
        if (r.is_mapping()) {
            resolve_type(UType::of(r.key(), t.span));
            resolve_type(UType::of(r.value(), t.span));
        }
        return r;
    }
    case UType::Kind::Mapping: {
        LType k = resolve_type(t.kids[0]);
        LType v = resolve_type(t.kids[1]);
        if (!k.is_scalar()) {
            fail(TypeErrorKind::UnknownType, "mapping key type must be elementary, got " + k.str(), t.kids[0].span);
        }
        if (contains_fun(v)) {
            fail(TypeErrorKind::UnknownType, "mapping values cannot hold functions", t.kids[1].span);
        }
        return LType::mapping(k, v);
    }
    case UType::Kind::Function: {
        std::vector<LType> ps, rs;
        for (const auto& k : t.kids) {
            ps.push_back(resolve_type(k));
        }
        for (const auto& r : t.rets) {
            rs.push_back(resolve_type(r));
        }
        return LType::function(std::move(ps), std::move(rs));
    }
    case UType::Kind::Name: break;
    }
    const std::string& n = t.name;
    if (n == "uint") {
        return LType::uint(opts_.uint_width);
    }
    if (n == "int") {
        return LType::sint(opts_.uint_width);
    }
    if (n == "bool") {
        return LType::boolean();
    }
    if (n == "address") {
        return LType::address();
    }
    if (n == "string") {
        return LType::string();
    }
    auto numeric_suffix = [&](std::size_t prefix) -> int {
        if (n.size() <= prefix || n.size() > prefix + 3) {
            return -1;
        }
        int v = 0;
        for (std::size_t i = prefix; i < n.size(); ++i) {
            if (n[i] < '0' || n[i] > '9') {
                return -1;
            }
            v = v * 10 + (n[i] - '0');
        }
        return n[prefix] == '0' ? -1 : v;
    };
    if (n.rfind("uint", 0) == 0 || n.rfind("int", 0) == 0) {
        bool u = n[0] == 'u';
        int w = numeric_suffix(u ? 4 : 3);
        if (is_valid_int_width(w)) {
            return u ? LType::uint(w) : LType::sint(w);
        }
    }
    if (n.rfind("bytes", 0) == 0) {
        int len = numeric_suffix(5);
        if (len >= 1 && len <= 32) {
            return LType::bytes(len);
        }
    }
    if (structs_.count(n)) {
        return LType::structure(n);
    }
    fail(TypeErrorKind::UnknownType, "unknown type '" + n + "'", t.span);
}

// ---------------------------------------------------------------- checker

class Typechecker {
public:
    explicit Typechecker(TypeContext ctx, std::vector<TypeError>* sink = nullptr) : ctx_(std::move(ctx)), sink_(sink) {}

    TypeContext& ctx() { return ctx_; }

    ExprPtr check(const UExpr& e, const LType& expected, const std::string& context) {
        ExprPtr r = infer(e, expected);
        if (!(r->type() == expected)) {
            fail(TypeErrorKind::TypeMismatch, context + ": expected " + expected.str() + ", got " + r->type().str(),
                 e.span);
        }
        return r;
    }

    ExprPtr infer(const UExpr& e, const std::optional<LType>& hint) {
        switch (e.kind) {
        case UExprKind::IntLit: return int_literal(parse_digits(e.text, 10, e.span), hint, e.span);
        case UExprKind::HexLit: return hex_literal(e, hint);
        case UExprKind::BoolLit: return ExprBuilder::constant(Value::boolean(e.bool_value), e.span);
        case UExprKind::StringLit: return ExprBuilder::constant(Value::string(e.text), e.span);
        case UExprKind::Const: return ExprBuilder::constant(*e.constant, e.span);
        case UExprKind::Var: return variable(e);
        case UExprKind::Member: return member(e);
        case UExprKind::Binary: return binary(e, hint);
        case UExprKind::Unary: return unary(e, hint);
        case UExprKind::Index: {
            ExprPtr base = infer(*e.args[0], std::nullopt);
            if (!base->type().is_mapping()) {
                fail(TypeErrorKind::TypeMismatch, "indexed expression: expected a mapping, got " + base->type().str(),
                     e.args[0]->span);
            }
            ExprPtr key = check(*e.args[1], base->type().key(), "mapping key");
            LType vt = base->type().value();
            return ExprBuilder::map(std::move(base), std::move(key), std::move(vt), e.span);
        }
        case UExprKind::Call: return call(e);
        case UExprKind::Old: return old(e, hint);
        }
        fail(TypeErrorKind::TypeMismatch, "unsupported expression", e.span);
    }

    StmtPtr stmt(const UStmt& s) {
        switch (s.kind) {
        case StmtKind::Var: {
            LType t = ctx_.resolve_type(s.type);
            ExprPtr init;
            std::optional<TypeErrors> deferred;
            if (s.e1) {
                try {
                    init = check(*s.e1, t, "initializer of '" + s.name + "'");
                } catch (const TypeErrors& err) {
                    deferred = err;
                }
            } else if (t.is_fun()) {
                deferred = TypeErrors({TypeError{TypeErrorKind::TypeMismatch,
                                                 "function-typed variable '" + s.name + "' needs an initializer",
                                                 s.span}});
            }
            ctx_ = ctx_.with_var(s.name, t, s.span);
            if (deferred) {
                throw *deferred;
            }
            return StmtBuilder::var(s.vis, s.name, t, init, s.span);
        }
        case StmtKind::Assignv: {
            ExprPtr lhs = infer(*s.e1, std::nullopt);
            if (!is_lvalue(*lhs)) {
                fail(TypeErrorKind::NotAnLValue, "left-hand side of assignment is not assignable", s.e1->span);
            }
            ExprPtr rhs = check(*s.e2, lhs->type(), "assignment");
            return StmtBuilder::assign(std::move(lhs), std::move(rhs), s.span);
        }
        case StmtKind::If: {
            ExprPtr c = check(*s.e1, LType::boolean(), "if condition");
            StmtList t = scoped(s.body);
            StmtList f = scoped(s.else_body);
            return StmtBuilder::if_(std::move(c), std::move(t), std::move(f), s.span);
        }
        case StmtKind::While: {
            ExprPtr c = check(*s.e1, LType::boolean(), "while condition");
            return StmtBuilder::while_(std::move(c), scoped(s.body), s.span);
        }
        case StmtKind::For: {
            TypeContext saved = ctx_;
            ctx_ = ctx_.push_scope();
            try {
                StmtList init = list(s.init);
                ExprPtr c = s.e1 ? check(*s.e1, LType::boolean(), "for condition")
                                 : ExprBuilder::constant(Value::boolean(true), s.span);
                StmtList step = list(s.step);
                StmtList body = scoped(s.body);
                ctx_ = saved;
                return StmtBuilder::for_(std::move(init), std::move(c), std::move(step), std::move(body), s.span);
            } catch (...) {
                ctx_ = saved;
                throw;
            }
        }
        case StmtKind::Throw:
        case StmtKind::Snil: return StmtBuilder::leaf(s.kind, s.span);
        case StmtKind::Placeholder:
            if (!ctx_.in_modifier_) {
                fail(TypeErrorKind::MisplacedPlaceholder, "'_' outside a modifier body", s.span);
            }
            return StmtBuilder::leaf(s.kind, s.span);
        case StmtKind::Return: {
            if (!ctx_.rets_) {
                fail(TypeErrorKind::ReturnOutsideFunction, "return outside a function body", s.span);
            }
            const auto& rets = *ctx_.rets_;
            if (s.exprs.size() != rets.size()) {
                fail(TypeErrorKind::ArityMismatch, "return with " + std::to_string(s.exprs.size()) +
                                                       " values in a function returning " +
                                                       std::to_string(rets.size()),
                     s.span);
            }
            std::vector<ExprPtr> out;
            for (std::size_t i = 0; i < rets.size(); ++i) {
                out.push_back(check(*s.exprs[i], rets[i], "return value " + std::to_string(i)));
            }
            return StmtBuilder::ret(std::move(out), s.span);
        }
        case StmtKind::CallStmt: {
            if (!s.e1 || s.e1->kind != UExprKind::Call) {
                fail(TypeErrorKind::TypeMismatch, "expression statement must be a call", s.span);
            }
            ExprPtr c = infer(*s.e1, std::nullopt);
            if (c->kind() != ExprKind::Call) {
                fail(TypeErrorKind::TypeMismatch, "expression statement must be a call", s.span);
            }
            return StmtBuilder::call(std::move(c), s.span);
        }
        }
        fail(TypeErrorKind::TypeMismatch, "unsupported statement", s.span);
    }

    /// Statements in order; with a sink, errors are recorded and checking continues.
    StmtList list(const UStmtList& stmts) {
        StmtList out;
        for (const auto& s : stmts) {
            if (!sink_) {
                out.push_back(stmt(*s));
                continue;
            }
            try {
                out.push_back(stmt(*s));
            } catch (const TypeErrors& err) {
                sink_->insert(sink_->end(), err.errors().begin(), err.errors().end());
            }
        }
        return out;
    }

    StmtList scoped(const UStmtList& stmts) {
        TypeContext saved = ctx_;
        ctx_ = ctx_.push_scope();
        try {
            StmtList out = list(stmts);
            ctx_ = saved;
            return out;
        } catch (...) {
            ctx_ = saved;
            throw;
        }
    }

private:
    static bool is_lvalue(const Expr& e) {
        switch (e.kind()) {
        case ExprKind::Var: return e.scope() != VarScope::Builtin;
        case ExprKind::Map:
        case ExprKind::Field: return is_lvalue(*e.arg(0));
        default: return false;
        }
    }

    LType default_uint() const { return LType::uint(ctx_.opts_.uint_width); }

    ExprPtr int_literal(const BigInt& n, const std::optional<LType>& hint, const SourceSpan& span) {
        LType t = hint && hint->is_int() ? *hint : (n < 0 ? LType::sint(ctx_.opts_.uint_width) : default_uint());
        if (!fits(n, t)) {
            fail(TypeErrorKind::TypeMismatch, "literal " + n.str() + " does not fit " + t.str(), span);
        }
        return ExprBuilder::constant(Value::integer(t.width(), t.signedness(), n), span);
    }

    ExprPtr hex_literal(const UExpr& e, const std::optional<LType>& hint) {
        BigInt n = parse_digits(e.text, 16, e.span);
        if (hint && hint->kind() == TypeKind::Address) {
            if (n >= (BigInt(1) << 160)) {
                fail(TypeErrorKind::TypeMismatch, "address literal 0x" + e.text + " exceeds 160 bits", e.span);
            }
            return ExprBuilder::constant(Value::address(Bits256(n)), e.span);
        }
        if (hint && hint->kind() == TypeKind::Bytes && static_cast<int>(e.text.size()) == 2 * hint->bytes_len()) {
            std::vector<std::uint8_t> octets;
            for (std::size_t i = 0; i < e.text.size(); i += 2) {
                octets.push_back(static_cast<std::uint8_t>(parse_digits(e.text.substr(i, 2), 16, e.span)));
            }
            return ExprBuilder::constant(Value::bytes(std::move(octets)), e.span);
        }
        return int_literal(n, hint, e.span);
    }

    ExprPtr annotate(ExprPtr r, const UExpr& e) {
        if (e.annot && !(*e.annot == r->type())) {
            fail(TypeErrorKind::TypeMismatch, "'" + e.text + "' annotated " + e.annot->str() + " but declared " +
                                                  r->type().str(),
                 e.span);
        }
        return r;
    }

    std::optional<ExprPtr> builtin(const std::string& name, const SourceSpan& span) {
        for (const auto& b : kBuiltins) {
            if (name == b.name) {
                LType t = b.type == Builtin::Uint ? default_uint() : LType::address();
                std::string canonical = name == "block.timestamp" ? "now" : name;
                return ExprBuilder::var(canonical, t, VarScope::Builtin, span);
            }
        }
        return std::nullopt;
    }

    ExprPtr variable(const UExpr& e) {
        VarScope scope;
        if (auto t = ctx_.lookup_var(e.text, &scope)) {
            return annotate(ExprBuilder::var(e.text, *t, scope, e.span), e);
        }
        if (const FunctionSig* sig = ctx_.lookup_function(e.text)) {
            return annotate(ExprBuilder::constant(Value::funptr(e.text, LType::function(sig->params, sig->rets)), e.span),
                            e);
        }
        if (auto b = builtin(e.text, e.span)) {
            return annotate(*b, e);
        }
        fail(TypeErrorKind::UnboundIdentifier, "unbound identifier '" + e.text + "'", e.span);
    }

    ExprPtr member(const UExpr& e) {
        const UExpr& base = *e.args[0];
        if (base.kind == UExprKind::Var && (base.text == "msg" || base.text == "block") &&
            !ctx_.lookup_var(base.text)) {
            std::string full = base.text + "." + e.text;
            if (auto b = builtin(full, e.span)) {
                return *b;
            }
            fail(TypeErrorKind::UnboundIdentifier, "unknown built-in '" + full + "'", e.span);
        }
        ExprPtr b = infer(base, std::nullopt);
        if (!b->type().is_struct()) {
            fail(TypeErrorKind::TypeMismatch, "member access on " + b->type().str() + ", expected a struct", base.span);
        }
        const auto& fields = ctx_.structs_.at(b->type().struct_name());
        for (const auto& [fname, ftype] : fields) {
            if (fname == e.text) {
                return ExprBuilder::field(std::move(b), e.text, ftype, e.span);
            }
        }
        fail(TypeErrorKind::UnboundIdentifier,
             "struct " + b->type().struct_name() + " has no field '" + e.text + "'", e.span);
    }

    ExprPtr binary(const UExpr& e, const std::optional<LType>& hint) {
        const UExpr& l = *e.args[0];
        const UExpr& r = *e.args[1];
        if (is_logical(e.bop)) {
            std::string ctx = std::string("operand of ") + std::string(binop_symbol(e.bop));
            ExprPtr a = check(l, LType::boolean(), ctx);
            ExprPtr b = check(r, LType::boolean(), ctx);
            return ExprBuilder::bop(e.bop, std::move(a), std::move(b), LType::boolean(), e.span);
        }
        std::optional<LType> h = is_comparison(e.bop) ? std::nullopt : hint;
        ExprPtr a, b;
        if (is_literal(l) && !is_literal(r)) {
            b = infer(r, h);
            a = infer(l, b->type());
        } else {
            a = infer(l, h);
            b = infer(r, a->type());
        }
        LType t;
        try {
            t = binop_result_type(e.bop, a->type(), b->type());
        } catch (const DomainError&) {
            fail(TypeErrorKind::BadOperand, "bad operands for " + std::string(binop_symbol(e.bop)) + ": " +
                                                a->type().str() + ", " + b->type().str(),
                 e.span);
        }
        return ExprBuilder::bop(e.bop, std::move(a), std::move(b), std::move(t), e.span);
    }

    ExprPtr unary(const UExpr& e, const std::optional<LType>& hint) {
        const UExpr& a = *e.args[0];
        if (e.uop == UnOp::Not) {
            ExprPtr x = infer(a, LType::boolean());
            if (!x->type().is_bool()) {
                fail(TypeErrorKind::BadOperand, "bad operand for !: " + x->type().str(), e.span);
            }
            return ExprBuilder::uop(UnOp::Not, std::move(x), LType::boolean(), e.span);
        }
        if (a.kind == UExprKind::IntLit || a.kind == UExprKind::HexLit) {
            BigInt n = parse_digits(a.text, a.kind == UExprKind::IntLit ? 10 : 16, a.span);
            return int_literal(-n, hint, e.span);
        }
        ExprPtr x = infer(a, hint);
        LType t;
        try {
            t = unop_result_type(e.uop, x->type());
        } catch (const DomainError&) {
            fail(TypeErrorKind::BadOperand, "bad operand for unary -: " + x->type().str(), e.span);
        }
        return ExprBuilder::uop(e.uop, std::move(x), std::move(t), e.span);
    }

    ExprPtr call(const UExpr& e) {
        if (e.text == "old") {
            if (e.args.size() != 1) {
                fail(TypeErrorKind::ArityMismatch, "old takes one argument", e.span);
            }
            UExpr o = e;
            o.kind = UExprKind::Old;
            return old(o, std::nullopt);
        }
        if (e.text == "address" && e.args.size() == 1 && !ctx_.lookup_var("address") &&
            (e.args[0]->kind == UExprKind::IntLit || e.args[0]->kind == UExprKind::HexLit)) {
            const UExpr& a = *e.args[0];
            BigInt n = parse_digits(a.text, a.kind == UExprKind::IntLit ? 10 : 16, a.span);
            if (n >= (BigInt(1) << 160)) {
                fail(TypeErrorKind::TypeMismatch, "address literal exceeds 160 bits", a.span);
            }
            return ExprBuilder::constant(Value::address(Bits256(n)), e.span);
        }
        std::vector<LType> params, rets;
        bool indirect = false;
        VarScope scope = VarScope::Local;
        if (auto t = ctx_.lookup_var(e.text, &scope)) {
            if (!t->is_fun()) {
                fail(TypeErrorKind::TypeMismatch, "'" + e.text + "' has type " + t->str() + " and is not callable",
                     e.span);
            }
            params = t->params();
            rets = t->rets();
            indirect = true;
        } else if (const FunctionSig* sig = ctx_.lookup_function(e.text)) {
            params = sig->params;
            rets = sig->rets;
        } else {
            fail(TypeErrorKind::UnboundIdentifier, "unknown function '" + e.text + "'", e.span);
        }
        if (e.args.size() != params.size()) {
            fail(TypeErrorKind::ArityMismatch, "'" + e.text + "' takes " + std::to_string(params.size()) +
                                                   " arguments, got " + std::to_string(e.args.size()),
                 e.span);
        }
        std::vector<ExprPtr> args;
        for (std::size_t i = 0; i < params.size(); ++i) {
            args.push_back(check(*e.args[i], params[i], "argument " + std::to_string(i) + " of '" + e.text + "'"));
        }
        return ExprBuilder::call(e.text, indirect, scope, std::move(args), std::move(rets), e.span);
    }

    ExprPtr old(const UExpr& e, const std::optional<LType>& hint) {
        if (!ctx_.allow_old_) {
            fail(TypeErrorKind::UnboundIdentifier, "old(...) is only available in specifications", e.span);
        }
        ctx_.allow_old_ = false;
        ExprPtr inner;
        try {
            inner = infer(*e.args[0], hint);
        } catch (...) {
            ctx_.allow_old_ = true;
            throw;
        }
        ctx_.allow_old_ = true;
        return ExprBuilder::old(std::move(inner), e.span);
    }

    TypeContext ctx_;
    std::vector<TypeError>* sink_;
};

ExprPtr typecheck_expr(const TypeContext& ctx, const UExpr& e, const std::optional<LType>& expected) {
    Typechecker tc(ctx);
    return expected ? tc.check(e, *expected, "expression") : tc.infer(e, std::nullopt);
}

std::pair<StmtPtr, TypeContext> typecheck_stmt(const TypeContext& ctx, const UStmt& s) {
    Typechecker tc(ctx);
    StmtPtr out = tc.stmt(s);
    return {out, tc.ctx()};
}

namespace {

int count_placeholders(const UStmtList& body) {
    int n = 0;
    for (const auto& s : body) {
        n += s->kind == StmtKind::Placeholder;
        n += count_placeholders(s->body) + count_placeholders(s->else_body) + count_placeholders(s->init) +
             count_placeholders(s->step);
    }
    return n;
}

// Struct S reaches itself through by-value fields.
bool struct_cycle(const StructTable& structs, const std::string& start, const std::string& at,
                  std::set<std::string>& seen) {
    for (const auto& [fname, ftype] : structs.at(at)) {
        (void)fname;
        if (!ftype.is_struct() || !structs.count(ftype.struct_name())) {
            continue;
        }
        if (ftype.struct_name() == start) {
            return true;
        }
        if (seen.insert(ftype.struct_name()).second && struct_cycle(structs, start, ftype.struct_name(), seen)) {
            return true;
        }
    }
    return false;
}

}  // namespace

Contract typecheck_contract(const UContract& c, const TypeOptions& opts) {
    std::vector<TypeError> errors;
    auto guard = [&](auto&& f) {
        try {
            f();
        } catch (const TypeErrors& err) {
            errors.insert(errors.end(), err.errors().begin(), err.errors().end());
        }
    };

    TypeContext base(opts);

    // Struct names first so fields may refer to any struct.
    std::vector<std::string> order;
    for (const auto& s : c.structs) {
        if (base.structs_.count(s.name)) {
            errors.push_back({TypeErrorKind::DuplicateDeclaration, "struct '" + s.name + "' declared twice", s.span});
            continue;
        }
        base.structs_[s.name] = {};
        order.push_back(s.name);
    }
    StructTable structs;
    for (const auto& s : c.structs) {
        if (structs.count(s.name)) {
            continue;
        }
        std::vector<std::pair<std::string, LType>> fields;
        std::set<std::string> names;
        for (const auto& f : s.fields) {
            guard([&] {
                LType t = base.resolve_type(f.type);
                if (contains_fun(t)) {
                    fail(TypeErrorKind::UnknownType, "struct fields cannot hold functions", f.span);
                }
                if (!names.insert(f.name).second) {
                    fail(TypeErrorKind::DuplicateDeclaration, "field '" + f.name + "' declared twice", f.span);
                }
                fields.emplace_back(f.name, t);
            });
        }
        structs[s.name] = std::move(fields);
    }
    base.structs_ = structs;
    for (const auto& s : c.structs) {
        std::set<std::string> seen;
        if (structs.count(s.name) && struct_cycle(structs, s.name, s.name, seen)) {
            errors.push_back({TypeErrorKind::UnknownType, "struct '" + s.name + "' contains itself", s.span});
            base.structs_[s.name] = {};
        }
    }

    // Function signatures, so bodies and state initializers may call any function.
    std::vector<std::optional<FunctionSig>> sigs;
    for (const auto& f : c.functions) {
        std::optional<FunctionSig> sig;
        guard([&] {
            if (base.functions_.count(f.name)) {
                fail(TypeErrorKind::DuplicateDeclaration, "function '" + f.name + "' declared twice", f.span);
            }
            if (reserved_names().count(f.name)) {
                fail(TypeErrorKind::DuplicateDeclaration, "'" + f.name + "' is a built-in name", f.span);
            }
            FunctionSig s;
            for (const auto& p : f.params) {
                s.params.push_back(base.resolve_type(p.type));
            }
            for (const auto& r : f.rets) {
                s.rets.push_back(base.resolve_type(r));
            }
            base.functions_[f.name] = s;
            sig = std::move(s);
        });
        sigs.push_back(std::move(sig));
    }

    // State variables, in order.
    StmtList state;
    {
        Typechecker tc(base);
        for (const auto& s : c.state) {
            guard([&] {
                if (s->kind != StmtKind::Var) {
                    fail(TypeErrorKind::TypeMismatch, "only declarations may appear at contract level", s->span);
                }
                if (base.functions_.count(s->name)) {
                    fail(TypeErrorKind::DuplicateDeclaration, "'" + s->name + "' is already a function", s->span);
                }
                if (tc.ctx().state_.count(s->name)) {
                    fail(TypeErrorKind::DuplicateDeclaration, "state variable '" + s->name + "' declared twice",
                         s->span);
                }
                UStmt local = *s;
                StmtPtr typed;
                // Declared into the local scope by stmt(); move it to the state table.
                TypeContext before = tc.ctx();
                try {
                    typed = tc.stmt(local);
                } catch (...) {
                    if (auto t = tc.ctx().lookup_var(s->name)) {
                        before.state_[s->name] = *t;
                    }
                    tc.ctx() = before;
                    throw;
                }
                before.state_[s->name] = typed->type();
                tc.ctx() = before;
                state.push_back(typed);
            });
        }
        base.state_ = tc.ctx().state_;
    }

    // Modifiers.
    std::vector<ModifierDef> modifiers;
    std::set<std::string> modifier_names;
    for (const auto& m : c.modifiers) {
        guard([&] {
            if (!modifier_names.insert(m.name).second) {
                fail(TypeErrorKind::DuplicateDeclaration, "modifier '" + m.name + "' declared twice", m.span);
            }
            int holes = count_placeholders(m.body);
            if (holes == 0) {
                fail(TypeErrorKind::MissingPlaceholder, "modifier '" + m.name + "' has no '_' placeholder", m.span);
            }
            if (holes > 1) {
                fail(TypeErrorKind::MisplacedPlaceholder, "modifier '" + m.name + "' has more than one placeholder",
                     m.span);
            }
            TypeContext mctx = base.push_scope();
            mctx.in_modifier_ = true;
            std::vector<Param> params;
            for (const auto& p : m.params) {
                LType t = mctx.resolve_type(p.type);
                mctx = mctx.with_var(p.name, t, p.span);
                params.push_back({p.name, t});
            }
            std::size_t before = errors.size();
            Typechecker tc(mctx.push_scope(), &errors);
            StmtList body = tc.list(m.body);
            if (errors.size() == before) {
                modifiers.push_back(ContractBuilder::modifier(m.name, std::move(params), std::move(body), m.span));
            }
        });
    }

    // Functions.
    std::vector<FunctionDef> functions;
    for (std::size_t i = 0; i < c.functions.size(); ++i) {
        const auto& f = c.functions[i];
        if (!sigs[i]) {
            continue;
        }
        std::size_t before = errors.size();
        TypeContext fctx = base.push_scope();
        std::vector<Param> params;
        guard([&] {
            for (std::size_t j = 0; j < f.params.size(); ++j) {
                fctx = fctx.with_var(f.params[j].name, sigs[i]->params[j], f.params[j].span);
                params.push_back({f.params[j].name, sigs[i]->params[j]});
            }
        });
        std::vector<ModifierUse> uses;
        for (const auto& u : f.modifiers) {
            guard([&] {
                auto it = std::find_if(c.modifiers.begin(), c.modifiers.end(),
                                       [&](const UModifierDef& m) { return m.name == u.name; });
                if (it == c.modifiers.end()) {
                    fail(TypeErrorKind::UnknownModifier, "unknown modifier '" + u.name + "'", u.span);
                }
                const ModifierDef* md = nullptr;
                for (const auto& m : modifiers) {
                    if (m.name() == u.name) {
                        md = &m;
                    }
                }
                if (!md) {
                    return;  // the modifier itself failed to check
                }
                if (u.args.size() != md->params().size()) {
                    fail(TypeErrorKind::ArityMismatch, "modifier '" + u.name + "' takes " +
                                                           std::to_string(md->params().size()) + " arguments",
                         u.span);
                }
                Typechecker tc(fctx);
                ModifierUse use{u.name, {}};
                for (std::size_t j = 0; j < u.args.size(); ++j) {
                    use.args.push_back(tc.check(*u.args[j], md->params()[j].type, "modifier argument"));
                }
                uses.push_back(std::move(use));
            });
        }
        fctx.rets_ = sigs[i]->rets;
        Typechecker tc(fctx.push_scope(), &errors);
        StmtList body = tc.list(f.body);
        if (errors.size() == before) {
            functions.push_back(ContractBuilder::function(f.name, f.vis, std::move(params), sigs[i]->rets,
                                                          std::move(uses), std::move(body), f.span));
        }
    }

    if (!errors.empty()) {
        throw TypeErrors(std::move(errors));
    }
    return ContractBuilder::contract(c.name, std::move(order), std::move(structs), std::move(state),
                                     std::move(modifiers), std::move(functions), opts.uint_width);
}

}  // namespace fspvm
