#include "fspvm/domain.hpp"

namespace fspvm {

namespace {

[[noreturn]] void bad_signature(std::string_view op, const std::string& types) {
    throw DomainError(DomainErrorKind::IllTyped, "operator " + std::string(op) + " not defined on " + types);
}

}  // namespace

std::string_view binop_symbol(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    }
    return "?";
}

std::string_view unop_symbol(UnOp op) { return op == UnOp::Not ? "!" : "-"; }

bool is_arith(BinOp op) {
    switch (op) {
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return true;
    default: return false;
    }
}

bool is_comparison(BinOp op) {
    switch (op) {
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne: return true;
    default: return false;
    }
}

bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

LType binop_result_type(BinOp op, const LType& a, const LType& b) {
    auto fail = [&] { bad_signature(binop_symbol(op), a.str() + ", " + b.str()); };
    if (is_logical(op)) {
        if (!a.is_bool() || !b.is_bool()) {
            fail();
        }
        return LType::boolean();
    }
    if (!(a == b)) {
        fail();
    }
    if (op == BinOp::Eq || op == BinOp::Ne) {
        if (!a.is_scalar()) {
            fail();
        }
        return LType::boolean();
    }
    if (!a.is_int()) {
        fail();
    }
    return is_comparison(op) ? LType::boolean() : a;
}

LType unop_result_type(UnOp op, const LType& a) {
    if (op == UnOp::Not ? !a.is_bool() : !a.is_int()) {
        bad_signature(unop_symbol(op), a.str());
    }
    return a;
}

Value apply_binop(BinOp op, const Value& a, const Value& b) {
    binop_result_type(op, a.type(), b.type());
    switch (op) {
    case BinOp::And: return Value::boolean(a.as_bool() && b.as_bool());
    case BinOp::Or: return Value::boolean(a.as_bool() || b.as_bool());
    case BinOp::Eq: return Value::boolean(a == b);
    case BinOp::Ne: return Value::boolean(!(a == b));
    default: break;
    }
    const int w = a.int_width();
    const Signedness s = a.int_signedness();
    switch (op) {
    case BinOp::Add: return Value::from_bits(w, s, a.int_bits() + b.int_bits());
    case BinOp::Sub: return Value::from_bits(w, s, a.int_bits() - b.int_bits());
    case BinOp::Mul: return Value::from_bits(w, s, a.int_bits() * b.int_bits());
    case BinOp::Div:
    case BinOp::Mod: {
        if (b.int_bits() == 0) {
            throw DomainError(DomainErrorKind::DivByZero, "division by zero");
        }
        if (s == Signedness::Unsigned) {
            return Value::from_bits(w, s, op == BinOp::Div ? a.int_bits() / b.int_bits() : a.int_bits() % b.int_bits());
        }
        // cpp_int division truncates toward zero and % takes the dividend's sign.
        BigInt x = a.int_value();
        BigInt y = b.int_value();
        return int_wrap(w, s, op == BinOp::Div ? BigInt(x / y) : BigInt(x % y));
    }
    default: break;
    }
    const int c = a.int_value().compare(b.int_value());
    switch (op) {
    case BinOp::Lt: return Value::boolean(c < 0);
    case BinOp::Le: return Value::boolean(c <= 0);
    case BinOp::Gt: return Value::boolean(c > 0);
    case BinOp::Ge: return Value::boolean(c >= 0);
    default: break;
    }
    bad_signature(binop_symbol(op), "values");
}

Value apply_unop(UnOp op, const Value& a) {
    unop_result_type(op, a.type());
    if (op == UnOp::Not) {
        return Value::boolean(!a.as_bool());
    }
    return Value::from_bits(a.int_width(), a.int_signedness(), Bits256(0) - a.int_bits());
}

}  // namespace fspvm
