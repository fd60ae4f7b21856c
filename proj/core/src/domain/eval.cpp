#include <unordered_map>

#include "fspvm/domain.hpp"

namespace fspvm {

namespace {

class ClosedEval {
public:
    explicit ClosedEval(const Assignment& a, bool use_memo) : assignment_(a), use_memo_(use_memo) {}

    Value run(const SymExpr& e) {
        if (e.is_concrete()) {
            return e.value();
        }
        if (!use_memo_ || e.node_count() < 8) {
            return eval(e);
        }
        if (auto it = memo_.find(e.node()); it != memo_.end()) {
            return it->second;
        }
        Value v = eval(e);
        memo_.emplace(e.node(), v);
        return v;
    }

private:
    Value eval(const SymExpr& e) {
        switch (e.kind()) {
        case SymKind::Concrete: return e.value();
        case SymKind::Var: {
            auto it = assignment_.find(e.name());
            if (it == assignment_.end()) {
                throw DomainError(DomainErrorKind::MissingAssignment, "no value for " + e.name());
            }
            return it->second;
        }
        case SymKind::App:
            if (e.is_unary()) {
                return apply_unop(e.unop(), run(e.arg(0)));
            }
            if (e.binop() == BinOp::And || e.binop() == BinOp::Or) {
                bool left = run(e.arg(0)).as_bool();
                if (left == (e.binop() == BinOp::Or)) {
                    return Value::boolean(left);
                }
                return Value::boolean(run(e.arg(1)).as_bool());
            }
            {
                Value a = run(e.arg(0));
                return apply_binop(e.binop(), a, run(e.arg(1)));
            }
        case SymKind::MapSelect: {
            Value m = run(e.arg(0));
            return m.map_get(run(e.arg(1)));
        }
        case SymKind::FieldSel: return run(e.arg(0)).field(e.name());
        case SymKind::Ite: return run(e.arg(0)).as_bool() ? run(e.arg(1)) : run(e.arg(2));
        case SymKind::MapStore: {
            Value m = run(e.arg(0));
            Value k = run(e.arg(1));
            return m.map_set(k, run(e.arg(2)));
        }
        case SymKind::FieldStore: {
            Value s = run(e.arg(0));
            return s.with_field(e.name(), run(e.arg(1)));
        }
        }
        return e.value();
    }

    const Assignment& assignment_;
    bool use_memo_;
    std::unordered_map<const SymNode*, Value> memo_;
};

class PartialEval {
public:
    explicit PartialEval(const PartialLookup& lookup) : lookup_(lookup) {}

    PartialResult run(const SymExpr& e) {
        switch (e.kind()) {
        case SymKind::Concrete: return e.value();
        case SymKind::Var: {
            if (const Value* v = lookup_.lookup(e.name())) {
                return *v;
            }
            return Blocked{e.name()};
        }
        case SymKind::App:
            if (e.is_unary()) {
                auto a = run(e.arg(0));
                if (auto* v = std::get_if<Value>(&a)) {
                    return apply_unop(e.unop(), *v);
                }
                return a;
            }
            if (e.binop() == BinOp::And || e.binop() == BinOp::Or) {
                return logical(e);
            }
            return strict(e, [&](const std::vector<Value>& v) { return apply_binop(e.binop(), v[0], v[1]); });
        case SymKind::MapSelect:
            return strict(e, [](const std::vector<Value>& v) { return v[0].map_get(v[1]); });
        case SymKind::FieldSel:
            return strict(e, [&](const std::vector<Value>& v) { return v[0].field(e.name()); });
        case SymKind::MapStore:
            return strict(e, [](const std::vector<Value>& v) { return v[0].map_set(v[1], v[2]); });
        case SymKind::FieldStore:
            return strict(e, [&](const std::vector<Value>& v) { return v[0].with_field(e.name(), v[1]); });
        case SymKind::Ite: {
            auto c = run(e.arg(0));
            if (auto* v = std::get_if<Value>(&c)) {
                return run(v->as_bool() ? e.arg(1) : e.arg(2));
            }
            if (!e.arg(0).partial()) {
                auto a = run(e.arg(1));
                auto b = run(e.arg(2));
                auto* va = std::get_if<Value>(&a);
                auto* vb = std::get_if<Value>(&b);
                if (va && vb && *va == *vb) {
                    return *va;
                }
            }
            return c;
        }
        }
        return Blocked{};
    }

private:
    PartialResult logical(const SymExpr& e) {
        const bool absorbing = e.binop() == BinOp::Or;
        auto l = run(e.arg(0));
        if (auto* v = std::get_if<Value>(&l)) {
            if (v->as_bool() == absorbing) {
                return *v;
            }
            return run(e.arg(1));
        }
        // Left blocked: the right side alone decides only if the left cannot fault.
        if (!e.arg(0).partial()) {
            auto r = run(e.arg(1));
            if (auto* v = std::get_if<Value>(&r); v && v->as_bool() == absorbing) {
                return *v;
            }
        }
        return l;
    }

    template <class F>
    PartialResult strict(const SymExpr& e, F&& f) {
        std::vector<Value> vals;
        vals.reserve(e.args().size());
        for (const auto& a : e.args()) {
            auto r = run(a);
            if (auto* b = std::get_if<Blocked>(&r)) {
                return *b;
            }
            vals.push_back(std::move(std::get<Value>(r)));
        }
        return f(vals);
    }

    const PartialLookup& lookup_;
};

}  // namespace

Value eval_closed(const SymExpr& e, const Assignment& assignment) {
    return ClosedEval(assignment, e.node_count() >= 64).run(e);
}

PartialResult eval_partial(const SymExpr& e, const PartialLookup& lookup) { return PartialEval(lookup).run(e); }

}  // namespace fspvm
