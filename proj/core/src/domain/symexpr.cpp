#include "fspvm/domain.hpp"

namespace fspvm {

namespace {

[[noreturn]] void ill_typed(const std::string& what) { throw DomainError(DomainErrorKind::IllTyped, what); }

std::shared_ptr<SymNode> make_node(SymKind kind, LType type, std::vector<SymExpr> args) {
    auto n = std::make_shared<SymNode>();
    n->kind = kind;
    n->type = std::move(type);
    for (const auto& a : args) {
        n->count += a.node_count();
        n->has_vars = n->has_vars || a.has_vars();
        n->partial = n->partial || a.partial();
    }
    n->args = std::move(args);
    return n;
}

const std::shared_ptr<const SymNode>& init_node() {
    static const std::shared_ptr<const SymNode> n = [] {
        auto m = std::make_shared<SymNode>();
        m->kind = SymKind::Concrete;
        m->value = Value::init_data();
        return m;
    }();
    return n;
}

}  // namespace

SymExpr::SymExpr() : node_(init_node()) {}

SymExpr SymExpr::concrete(Value v) {
    if (v.is_init_data()) {
        return SymExpr();
    }
    auto n = make_node(SymKind::Concrete, v.type(), {});
    n->value = std::move(v);
    return SymExpr(std::move(n));
}

SymExpr SymExpr::var(std::string name, LType type) {
    auto n = make_node(SymKind::Var, std::move(type), {});
    n->name = std::move(name);
    n->has_vars = true;
    return SymExpr(std::move(n));
}

SymExpr SymExpr::binary(BinOp op, SymExpr a, SymExpr b) {
    LType t = binop_result_type(op, a.type(), b.type());
    bool divisor_unsafe = (op == BinOp::Div || op == BinOp::Mod) && !(b.is_concrete() && b.value().int_bits() != 0);
    auto n = make_node(SymKind::App, std::move(t), {std::move(a), std::move(b)});
    n->bop = op;
    n->partial = n->partial || divisor_unsafe;
    return SymExpr(std::move(n));
}

SymExpr SymExpr::unary(UnOp op, SymExpr a) {
    LType t = unop_result_type(op, a.type());
    auto n = make_node(SymKind::App, std::move(t), {std::move(a)});
    n->unary = true;
    n->uop = op;
    return SymExpr(std::move(n));
}

SymExpr SymExpr::select(SymExpr map, SymExpr key) {
    if (!map.type().is_mapping() || !(map.type().key() == key.type())) {
        ill_typed("cannot index " + map.type().str() + " with " + key.type().str());
    }
    LType t = map.type().value();
    return SymExpr(make_node(SymKind::MapSelect, std::move(t), {std::move(map), std::move(key)}));
}

SymExpr SymExpr::field(SymExpr base, std::string field, LType type) {
    if (!base.type().is_struct()) {
        ill_typed("field access on " + base.type().str());
    }
    auto n = make_node(SymKind::FieldSel, std::move(type), {std::move(base)});
    n->name = std::move(field);
    return SymExpr(std::move(n));
}

SymExpr SymExpr::ite(SymExpr cond, SymExpr then_e, SymExpr else_e) {
    if (!cond.type().is_bool() || !(then_e.type() == else_e.type())) {
        ill_typed("ill-typed conditional");
    }
    LType t = then_e.type();
    return SymExpr(make_node(SymKind::Ite, std::move(t), {std::move(cond), std::move(then_e), std::move(else_e)}));
}

SymExpr SymExpr::store(SymExpr map, SymExpr key, SymExpr value) {
    const LType& mt = map.type();
    if (!mt.is_mapping() || !(mt.key() == key.type()) || !(mt.value() == value.type())) {
        ill_typed("ill-typed map store into " + mt.str());
    }
    LType t = mt;
    return SymExpr(make_node(SymKind::MapStore, std::move(t), {std::move(map), std::move(key), std::move(value)}));
}

SymExpr SymExpr::field_store(SymExpr base, std::string field, SymExpr value) {
    if (!base.type().is_struct()) {
        ill_typed("field store on " + base.type().str());
    }
    LType t = base.type();
    auto n = make_node(SymKind::FieldStore, std::move(t), {std::move(base), std::move(value)});
    n->name = std::move(field);
    return SymExpr(std::move(n));
}

SymKind SymExpr::kind() const { return node_->kind; }
const LType& SymExpr::type() const { return node_->type; }
bool SymExpr::is_init_data() const { return node_->kind == SymKind::Concrete && node_->value.is_init_data(); }
const Value& SymExpr::value() const { return node_->value; }
const std::string& SymExpr::name() const { return node_->name; }
bool SymExpr::is_unary() const { return node_->unary; }
BinOp SymExpr::binop() const { return node_->bop; }
UnOp SymExpr::unop() const { return node_->uop; }
const std::vector<SymExpr>& SymExpr::args() const { return node_->args; }
std::size_t SymExpr::node_count() const { return node_->count; }
bool SymExpr::has_vars() const { return node_->has_vars; }
bool SymExpr::partial() const { return node_->partial; }

std::string SymExpr::render() const {
    switch (kind()) {
    case SymKind::Concrete: return value().render();
    case SymKind::Var: return name();
    case SymKind::App:
        if (is_unary()) {
            return std::string(unop_symbol(unop())) + arg(0).render();
        } else {
            std::string_view sym = binop() == BinOp::And ? "&&" : binop() == BinOp::Or ? "||" : binop_symbol(binop());
            return "(" + arg(0).render() + " " + std::string(sym) + " " + arg(1).render() + ")";
        }
    case SymKind::MapSelect: return arg(0).render() + "[" + arg(1).render() + "]";
    case SymKind::FieldSel: return arg(0).render() + "." + name();
    case SymKind::Ite: return "ite(" + arg(0).render() + ", " + arg(1).render() + ", " + arg(2).render() + ")";
    case SymKind::MapStore: return arg(0).render() + "[" + arg(1).render() + " := " + arg(2).render() + "]";
    case SymKind::FieldStore: return arg(0).render() + "{" + name() + " := " + arg(1).render() + "}";
    }
    return "?";
}

int SymExpr::compare(const SymExpr& a, const SymExpr& b) {
    if (a.node_ == b.node_) {
        return 0;
    }
    const SymNode& x = *a.node_;
    const SymNode& y = *b.node_;
    if (x.kind != y.kind) {
        return x.kind < y.kind ? -1 : 1;
    }
    if (auto c = x.type <=> y.type; c != 0) {
        return c < 0 ? -1 : 1;
    }
    switch (x.kind) {
    case SymKind::Concrete: return Value::compare(x.value, y.value);
    case SymKind::Var: return x.name.compare(y.name) < 0 ? -1 : (x.name == y.name ? 0 : 1);
    case SymKind::App:
        if (x.unary != y.unary) {
            return x.unary ? -1 : 1;
        }
        if (x.unary ? x.uop != y.uop : x.bop != y.bop) {
            return (x.unary ? x.uop < y.uop : x.bop < y.bop) ? -1 : 1;
        }
        break;
    case SymKind::FieldSel:
    case SymKind::FieldStore:
        if (int c = x.name.compare(y.name)) {
            return c < 0 ? -1 : 1;
        }
        break;
    default: break;
    }
    if (x.args.size() != y.args.size()) {
        return x.args.size() < y.args.size() ? -1 : 1;
    }
    for (std::size_t i = 0; i < x.args.size(); ++i) {
        if (int c = compare(x.args[i], y.args[i])) {
            return c;
        }
    }
    return 0;
}

bool operator==(const SymExpr& a, const SymExpr& b) {
    if (a.node_ == b.node_) {
        return true;
    }
    if (a.node_count() != b.node_count()) {
        return false;
    }
    return SymExpr::compare(a, b) == 0;
}

SymExpr substitute(const SymExpr& e, const std::map<std::string, SymExpr>& bindings) {
    if (!e.has_vars()) {
        return e;
    }
    switch (e.kind()) {
    case SymKind::Var: {
        auto it = bindings.find(e.name());
        return it == bindings.end() ? e : it->second;
    }
    case SymKind::App:
        if (e.is_unary()) {
            return SymExpr::unary(e.unop(), substitute(e.arg(0), bindings));
        }
        return SymExpr::binary(e.binop(), substitute(e.arg(0), bindings), substitute(e.arg(1), bindings));
    case SymKind::MapSelect: return SymExpr::select(substitute(e.arg(0), bindings), substitute(e.arg(1), bindings));
    case SymKind::FieldSel: return SymExpr::field(substitute(e.arg(0), bindings), e.name(), e.type());
    case SymKind::Ite:
        return SymExpr::ite(substitute(e.arg(0), bindings), substitute(e.arg(1), bindings),
                            substitute(e.arg(2), bindings));
    case SymKind::MapStore:
        return SymExpr::store(substitute(e.arg(0), bindings), substitute(e.arg(1), bindings),
                              substitute(e.arg(2), bindings));
    case SymKind::FieldStore:
        return SymExpr::field_store(substitute(e.arg(0), bindings), e.name(), substitute(e.arg(1), bindings));
    case SymKind::Concrete: break;
    }
    return e;
}

namespace {

void collect_vars(const SymExpr& e, std::map<std::string, LType>& out) {
    if (!e.has_vars()) {
        return;
    }
    if (e.kind() == SymKind::Var) {
        out.emplace(e.name(), e.type());
        return;
    }
    for (const auto& a : e.args()) {
        collect_vars(a, out);
    }
}

}  // namespace

std::map<std::string, LType> free_vars(const SymExpr& e) {
    std::map<std::string, LType> out;
    collect_vars(e, out);
    return out;
}

}  // namespace fspvm
