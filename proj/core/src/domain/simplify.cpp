#include <algorithm>
#include <optional>
#include <unordered_map>

#include "fspvm/domain.hpp"

namespace fspvm {

namespace {

struct ExprLess {
    bool operator()(const SymExpr& a, const SymExpr& b) const { return SymExpr::compare(a, b) < 0; }
};

bool is_const(const SymExpr& e) { return e.is_concrete() && !e.is_init_data(); }

bool is_bool_const(const SymExpr& e, bool b) {
    return e.is_concrete() && e.value().kind() == ValueKind::Bool && e.value().as_bool() == b;
}

bool is_int_const(const SymExpr& e, const Bits256& bits) {
    return e.is_concrete() && e.value().kind() == ValueKind::Int && e.value().int_bits() == bits;
}

bool is_app(const SymExpr& e, BinOp op) { return e.kind() == SymKind::App && !e.is_unary() && e.binop() == op; }
bool is_app(const SymExpr& e, UnOp op) { return e.kind() == SymKind::App && e.is_unary() && e.unop() == op; }

SymExpr bool_const(bool b) { return SymExpr::concrete(Value::boolean(b)); }

Bits256 upper_bit(int w) { return Bits256(1) << (w - 1); }

// Sum of coefficient * term plus a constant, all modulo 2^width.
struct Linear {
    int width;
    Bits256 mask;
    std::map<SymExpr, Bits256, ExprLess> terms;
    Bits256 constant = 0;

    explicit Linear(int w) : width(w), mask(width_mask(w)) {}

    void add_term(const SymExpr& t, const Bits256& c) {
        auto [it, fresh] = terms.emplace(t, c & mask);
        if (!fresh) {
            it->second = (it->second + c) & mask;
        }
    }

    void collect(const SymExpr& e, const Bits256& c, bool in_mul) {
        if (e.is_concrete()) {
            constant = (constant + c * e.value().int_bits()) & mask;
            return;
        }
        if (e.kind() == SymKind::App) {
            if (e.is_unary()) {
                collect(e.arg(0), (Bits256(0) - c) & mask, in_mul);
                return;
            }
            switch (e.binop()) {
            case BinOp::Add:
                if (!in_mul) {
                    collect(e.arg(0), c, false);
                    collect(e.arg(1), c, false);
                    return;
                }
                break;
            case BinOp::Sub:
                if (!in_mul) {
                    collect(e.arg(0), c, false);
                    collect(e.arg(1), (Bits256(0) - c) & mask, false);
                    return;
                }
                break;
            case BinOp::Mul:
                if (e.arg(1).is_concrete()) {
                    collect(e.arg(0), (c * e.arg(1).value().int_bits()) & mask, true);
                    return;
                }
                if (e.arg(0).is_concrete()) {
                    collect(e.arg(1), (c * e.arg(0).value().int_bits()) & mask, true);
                    return;
                }
                break;
            default: break;
            }
        }
        add_term(e, c);
    }

    // Drops cancelled terms; fails if one of them could fault. Sums that
    // ended up with a unit coefficient are flattened into the outer sum.
    bool prune() {
        for (bool again = true; again;) {
            again = false;
            for (auto it = terms.begin(); it != terms.end(); ++it) {
                const SymExpr& t = it->first;
                const bool sum = is_app(t, BinOp::Add) || is_app(t, BinOp::Sub) || is_app(t, UnOp::Neg);
                if (sum && (it->second == 1 || it->second == mask)) {
                    SymExpr inner = t;
                    Bits256 c = it->second;
                    terms.erase(it);
                    collect(inner, c, false);
                    again = true;
                    break;
                }
            }
        }
        for (auto it = terms.begin(); it != terms.end();) {
            if (it->second == 0) {
                if (it->first.partial()) {
                    return false;
                }
                it = terms.erase(it);
            } else {
                ++it;
            }
        }
        return true;
    }

    SymExpr rebuild(Signedness s) const {
        auto lit = [&](const Bits256& b) { return SymExpr::concrete(Value::from_bits(width, s, b)); };
        const Bits256 minus_one = mask;
        // Lead with a unit-coefficient term when there is one: `b - a`, not `-a + b`.
        std::vector<std::pair<SymExpr, Bits256>> order(terms.begin(), terms.end());
        auto lead_with = [&](auto pred) {
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (pred(order[i].second)) {
                    std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i),
                                order.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                    return true;
                }
            }
            return false;
        };
        if (!lead_with([](const Bits256& c) { return c == 1; })) {
            lead_with([&](const Bits256& c) { return c != mask; });
        }
        std::optional<SymExpr> acc;
        bool constant_used = false;
        for (const auto& [t, c] : order) {
            if (!acc) {
                if (c == 1) {
                    acc = t;
                } else if (c == minus_one && constant != 0) {
                    acc = SymExpr::binary(BinOp::Sub, lit(constant), t);
                    constant_used = true;
                } else if (c == minus_one) {
                    acc = SymExpr::unary(UnOp::Neg, t);
                } else {
                    acc = SymExpr::binary(BinOp::Mul, t, lit(c));
                }
                continue;
            }
            if (c == 1) {
                acc = SymExpr::binary(BinOp::Add, *acc, t);
            } else if (c == minus_one) {
                acc = SymExpr::binary(BinOp::Sub, *acc, t);
            } else if (c > upper_bit(width)) {
                acc = SymExpr::binary(BinOp::Sub, *acc, SymExpr::binary(BinOp::Mul, t, lit((Bits256(0) - c) & mask)));
            } else {
                acc = SymExpr::binary(BinOp::Add, *acc, SymExpr::binary(BinOp::Mul, t, lit(c)));
            }
        }
        if (!acc) {
            return lit(constant);
        }
        if (constant == 0 || constant_used) {
            return *acc;
        }
        if (constant > upper_bit(width)) {
            return SymExpr::binary(BinOp::Sub, *acc, lit((Bits256(0) - constant) & mask));
        }
        return SymExpr::binary(BinOp::Add, *acc, lit(constant));
    }
};

SymExpr mark(SymExpr e) {
    e.node()->normal.store(true, std::memory_order_relaxed);
    return e;
}

SymExpr mk_binary(BinOp op, const SymExpr& a, const SymExpr& b);

SymExpr complement(BinOp op, const SymExpr& a, const SymExpr& b) {
    switch (op) {
    case BinOp::Lt: return mk_binary(BinOp::Ge, a, b);
    case BinOp::Le: return mk_binary(BinOp::Gt, a, b);
    case BinOp::Gt: return mk_binary(BinOp::Le, a, b);
    case BinOp::Ge: return mk_binary(BinOp::Lt, a, b);
    case BinOp::Eq: return mk_binary(BinOp::Ne, a, b);
    case BinOp::Ne: return mk_binary(BinOp::Eq, a, b);
    default: break;
    }
    throw DomainError(DomainErrorKind::IllTyped, "no complement operator");
}

SymExpr mk_unary(UnOp op, const SymExpr& a) {
    if (is_const(a)) {
        return SymExpr::concrete(apply_unop(op, a.value()));
    }
    if (op == UnOp::Not) {
        if (is_app(a, UnOp::Not)) {
            return a.arg(0);
        }
        if (a.kind() == SymKind::App && !a.is_unary() && is_comparison(a.binop())) {
            return complement(a.binop(), a.arg(0), a.arg(1));
        }
        return SymExpr::unary(op, a);
    }
    Linear lin(a.type().width());
    lin.collect(a, lin.mask, false);
    if (!lin.prune()) {
        return SymExpr::unary(op, a);
    }
    return lin.rebuild(a.type().signedness());
}

SymExpr linear_arith(BinOp op, const SymExpr& a, const SymExpr& b) {
    Linear lin(a.type().width());
    SymExpr whole = SymExpr::binary(op, a, b);
    lin.collect(whole, 1, false);
    if (!lin.prune()) {
        return whole;
    }
    return lin.rebuild(a.type().signedness());
}

// Linear form of a - b when the operands are integers; nullopt when it
// cannot be trusted to decide the comparison.
std::optional<Linear> difference(const SymExpr& a, const SymExpr& b) {
    if (!a.type().is_int()) {
        return std::nullopt;
    }
    Linear lin(a.type().width());
    lin.collect(a, 1, false);
    lin.collect(b, lin.mask, false);
    if (!lin.prune()) {
        return std::nullopt;
    }
    return lin;
}

SymExpr ordered(BinOp op, const SymExpr& a, const SymExpr& b) {
    if (SymExpr::compare(b, a) < 0) {
        return SymExpr::binary(op, b, a);
    }
    return SymExpr::binary(op, a, b);
}

SymExpr mk_logical(BinOp op, const SymExpr& a, const SymExpr& b) {
    const bool unit = op == BinOp::And;  // neutral element
    if (is_bool_const(a, unit)) {
        return b;
    }
    if (is_bool_const(b, unit)) {
        return a;
    }
    if (is_bool_const(a, !unit)) {
        return a;
    }
    if (is_bool_const(b, !unit) && !a.partial()) {
        return b;
    }
    if (a == b) {
        return a;
    }
    if (!a.partial() && !b.partial()) {
        if ((is_app(b, UnOp::Not) && b.arg(0) == a) || (is_app(a, UnOp::Not) && a.arg(0) == b)) {
            return bool_const(!unit);
        }
        return ordered(op, a, b);
    }
    return SymExpr::binary(op, a, b);
}

SymExpr mk_compare(BinOp op, const SymExpr& a, const SymExpr& b) {
    const bool reflexive = op == BinOp::Le || op == BinOp::Ge || op == BinOp::Eq;
    if (a == b && !a.partial()) {
        return bool_const(reflexive);
    }
    if (op == BinOp::Eq || op == BinOp::Ne) {
        const bool eq = op == BinOp::Eq;
        if (a.type().is_bool()) {
            for (int side = 0; side < 2; ++side) {
                const SymExpr& c = side == 0 ? a : b;
                const SymExpr& x = side == 0 ? b : a;
                if (is_bool_const(c, true)) {
                    return eq ? x : mk_unary(UnOp::Not, x);
                }
                if (is_bool_const(c, false)) {
                    return eq ? mk_unary(UnOp::Not, x) : x;
                }
            }
        }
        if (auto d = difference(a, b); d && d->terms.empty()) {
            return bool_const((d->constant == 0) == eq);
        }
        return ordered(op, a, b);
    }
    if (!a.type().is_signed() && !a.partial() && !b.partial()) {
        const Bits256 max = width_mask(a.type().width());
        // Unsigned bounds: 0 <= x <= max.
        if (is_int_const(b, 0) && (op == BinOp::Lt || op == BinOp::Ge)) {
            return bool_const(op == BinOp::Ge);
        }
        if (is_int_const(a, 0) && (op == BinOp::Gt || op == BinOp::Le)) {
            return bool_const(op == BinOp::Le);
        }
        if (is_int_const(b, max) && (op == BinOp::Gt || op == BinOp::Le)) {
            return bool_const(op == BinOp::Le);
        }
        if (is_int_const(a, max) && (op == BinOp::Lt || op == BinOp::Ge)) {
            return bool_const(op == BinOp::Ge);
        }
    }
    return SymExpr::binary(op, a, b);
}

SymExpr mk_binary(BinOp op, const SymExpr& a, const SymExpr& b) {
    if (is_const(a) && is_const(b)) {
        if ((op == BinOp::Div || op == BinOp::Mod) && b.value().int_bits() == 0) {
            // Left in place: the fault belongs to evaluation, not simplification.
            return SymExpr::binary(op, a, b);
        }
        return SymExpr::concrete(apply_binop(op, a.value(), b.value()));
    }
    if (is_logical(op)) {
        return mk_logical(op, a, b);
    }
    if (is_comparison(op)) {
        return mk_compare(op, a, b);
    }
    switch (op) {
    case BinOp::Add:
    case BinOp::Sub: return linear_arith(op, a, b);
    case BinOp::Mul:
        if (is_const(a) || is_const(b)) {
            return linear_arith(op, a, b);
        }
        return ordered(op, a, b);
    case BinOp::Div:
        if (is_int_const(b, 1)) {
            return a;
        }
        return SymExpr::binary(op, a, b);
    case BinOp::Mod:
        if (is_int_const(b, 1) && !a.partial()) {
            return SymExpr::concrete(Value::from_bits(a.type().width(), a.type().signedness(), 0));
        }
        return SymExpr::binary(op, a, b);
    default: break;
    }
    return SymExpr::binary(op, a, b);
}

SymExpr mk_ite(const SymExpr& c, const SymExpr& a, const SymExpr& b) {
    if (c.is_concrete()) {
        return c.value().as_bool() ? a : b;
    }
    if (a == b && !c.partial()) {
        return a;
    }
    if (is_app(c, UnOp::Not)) {
        return mk_ite(c.arg(0), b, a);
    }
    if (is_bool_const(a, true) && is_bool_const(b, false)) {
        return c;
    }
    if (is_bool_const(a, false) && is_bool_const(b, true)) {
        return mk_unary(UnOp::Not, c);
    }
    return SymExpr::ite(c, a, b);
}

SymExpr mk_select(const SymExpr& m, const SymExpr& k) {
    if (m.is_concrete()) {
        if (is_const(k)) {
            return SymExpr::concrete(m.value().map_get(k.value()));
        }
        if (m.value().as_map().entries.empty() && !k.partial()) {
            return SymExpr::concrete(*m.value().as_map().fallback);
        }
    }
    if (m.kind() == SymKind::MapStore) {
        const SymExpr& inner = m.arg(0);
        const SymExpr& k0 = m.arg(1);
        const SymExpr& v0 = m.arg(2);
        if (k0 == k) {
            if (!inner.partial()) {
                return v0;
            }
        } else if (is_const(k0) && is_const(k) && !v0.partial()) {
            return mk_select(inner, k);
        }
    }
    return SymExpr::select(m, k);
}

SymExpr mk_store(const SymExpr& m, const SymExpr& k, const SymExpr& v) {
    if (m.is_concrete() && is_const(k) && is_const(v)) {
        return SymExpr::concrete(m.value().map_set(k.value(), v.value()));
    }
    if (v.kind() == SymKind::MapSelect && v.arg(0) == m && v.arg(1) == k && !k.partial()) {
        return m;
    }
    if (m.kind() == SymKind::MapStore) {
        const SymExpr& inner = m.arg(0);
        const SymExpr& k0 = m.arg(1);
        const SymExpr& v0 = m.arg(2);
        if (k0 == k && !v0.partial()) {
            return mk_store(inner, k, v);
        }
        // Writes to distinct constant keys commute; keep them sorted.
        if (is_const(k0) && is_const(k) && k.value() < k0.value()) {
            return mk_store(mk_store(inner, k, v), k0, v0);
        }
    }
    return SymExpr::store(m, k, v);
}

SymExpr mk_field(const SymExpr& s, const std::string& f, const LType& t) {
    if (s.is_concrete()) {
        return SymExpr::concrete(s.value().field(f));
    }
    if (s.kind() == SymKind::FieldStore) {
        if (s.name() == f && !s.arg(0).partial()) {
            return s.arg(1);
        }
        if (s.name() != f && !s.arg(1).partial()) {
            return mk_field(s.arg(0), f, t);
        }
    }
    return SymExpr::field(s, f, t);
}

SymExpr mk_field_store(const SymExpr& s, const std::string& f, const SymExpr& v) {
    if (s.is_concrete() && is_const(v)) {
        return SymExpr::concrete(s.value().with_field(f, v.value()));
    }
    if (v.kind() == SymKind::FieldSel && v.name() == f && v.arg(0) == s) {
        return s;
    }
    if (s.kind() == SymKind::FieldStore) {
        if (s.name() == f && !s.arg(1).partial()) {
            return mk_field_store(s.arg(0), f, v);
        }
        if (f < s.name()) {
            return mk_field_store(mk_field_store(s.arg(0), f, v), s.name(), s.arg(1));
        }
    }
    return SymExpr::field_store(s, f, v);
}

class Simplifier {
public:
    SymExpr run(const SymExpr& e) {
        if (e.is_concrete() || e.kind() == SymKind::Var || e.node()->normal.load(std::memory_order_relaxed)) {
            return e;
        }
        if (auto it = memo_.find(e.node()); it != memo_.end()) {
            return it->second;
        }
        SymExpr r = mark(rewrite(e));
        memo_.emplace(e.node(), r);
        return r;
    }

private:
    SymExpr rewrite(const SymExpr& e) {
        switch (e.kind()) {
        case SymKind::App:
            if (e.is_unary()) {
                return mk_unary(e.unop(), run(e.arg(0)));
            }
            if (is_logical(e.binop())) {
                // Short-circuit: a dead right operand is never inspected.
                SymExpr a = run(e.arg(0));
                if (is_bool_const(a, e.binop() == BinOp::Or)) {
                    return a;
                }
                return mk_binary(e.binop(), a, run(e.arg(1)));
            }
            return mk_binary(e.binop(), run(e.arg(0)), run(e.arg(1)));
        case SymKind::MapSelect: return mk_select(run(e.arg(0)), run(e.arg(1)));
        case SymKind::FieldSel: return mk_field(run(e.arg(0)), e.name(), e.type());
        case SymKind::Ite: {
            SymExpr c = run(e.arg(0));
            if (c.is_concrete()) {
                return run(c.value().as_bool() ? e.arg(1) : e.arg(2));
            }
            return mk_ite(c, run(e.arg(1)), run(e.arg(2)));
        }
        case SymKind::MapStore: return mk_store(run(e.arg(0)), run(e.arg(1)), run(e.arg(2)));
        case SymKind::FieldStore: return mk_field_store(run(e.arg(0)), e.name(), run(e.arg(1)));
        default: break;
        }
        return e;
    }

    std::unordered_map<const SymNode*, SymExpr> memo_;
};

}  // namespace

SymExpr simplify(const SymExpr& e) { return Simplifier().run(e); }

}  // namespace fspvm
