#include "fspvm/lolisa.hpp"

namespace fspvm {

std::string SourceSpan::str() const {
    return (file.empty() ? std::string("<input>") : file) + ":" + std::to_string(line) + ":" + std::to_string(col);
}

UType UType::named(std::string n, SourceSpan s) {
    UType t;
    t.kind = Kind::Name;
    t.name = std::move(n);
    t.span = std::move(s);
    return t;
}

UType UType::mapping(UType k, UType v, SourceSpan s) {
    UType t;
    t.kind = Kind::Mapping;
    t.kids = {std::move(k), std::move(v)};
    t.span = std::move(s);
    return t;
}

UType UType::function(std::vector<UType> params, std::vector<UType> rets, SourceSpan s) {
    UType t;
    t.kind = Kind::Function;
    t.kids = std::move(params);
    t.rets = std::move(rets);
    t.span = std::move(s);
    return t;
}

UType UType::of(LType lt, SourceSpan s) {
    UType t;
    t.kind = Kind::Resolved;
    t.resolved = std::move(lt);
    t.span = std::move(s);
    return t;
}

namespace {

std::shared_ptr<UExpr> node(UExprKind k, SourceSpan s) {
    auto e = std::make_shared<UExpr>();
    e->kind = k;
    e->span = std::move(s);
    return e;
}

}  // namespace

UExprPtr UExpr::int_lit(std::string digits, SourceSpan s) {
    auto e = node(UExprKind::IntLit, std::move(s));
    e->text = std::move(digits);
    return e;
}

UExprPtr UExpr::bool_lit(bool b, SourceSpan s) {
    auto e = node(UExprKind::BoolLit, std::move(s));
    e->bool_value = b;
    return e;
}

UExprPtr UExpr::string_lit(std::string text, SourceSpan s) {
    auto e = node(UExprKind::StringLit, std::move(s));
    e->text = std::move(text);
    return e;
}

UExprPtr UExpr::hex_lit(std::string digits, SourceSpan s) {
    auto e = node(UExprKind::HexLit, std::move(s));
    e->text = std::move(digits);
    return e;
}

UExprPtr UExpr::var(std::string name, SourceSpan s, std::optional<LType> annot) {
    auto e = node(UExprKind::Var, std::move(s));
    e->text = std::move(name);
    e->annot = std::move(annot);
    return e;
}

UExprPtr UExpr::binary(BinOp op, UExprPtr a, UExprPtr b, SourceSpan s) {
    auto e = node(UExprKind::Binary, std::move(s));
    e->bop = op;
    e->args = {std::move(a), std::move(b)};
    return e;
}

UExprPtr UExpr::unary(UnOp op, UExprPtr a, SourceSpan s) {
    auto e = node(UExprKind::Unary, std::move(s));
    e->uop = op;
    e->args = {std::move(a)};
    return e;
}

UExprPtr UExpr::index(UExprPtr base, UExprPtr key, SourceSpan s) {
    auto e = node(UExprKind::Index, std::move(s));
    e->args = {std::move(base), std::move(key)};
    return e;
}

UExprPtr UExpr::member(UExprPtr base, std::string field, SourceSpan s) {
    auto e = node(UExprKind::Member, std::move(s));
    e->text = std::move(field);
    e->args = {std::move(base)};
    return e;
}

UExprPtr UExpr::call(std::string callee, std::vector<UExprPtr> args, SourceSpan s) {
    auto e = node(UExprKind::Call, std::move(s));
    e->text = std::move(callee);
    e->args = std::move(args);
    return e;
}

UExprPtr UExpr::old(UExprPtr inner, SourceSpan s) {
    auto e = node(UExprKind::Old, std::move(s));
    e->args = {std::move(inner)};
    return e;
}

UExprPtr UExpr::constant_of(Value v, SourceSpan s) {
    auto e = node(UExprKind::Const, std::move(s));
    e->constant = std::move(v);
    return e;
}

}  // namespace fspvm
