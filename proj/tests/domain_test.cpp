#include <gtest/gtest.h>

#include <cstdint>

#include "fspvm/domain.hpp"
#include "symexpr_gen.hpp"

using namespace fspvm;

namespace {

Value u8(int n) { return Value::uint(8, n); }
Value i8(int n) { return Value::integer(8, Signedness::Signed, n); }
SymExpr c(Value v) { return SymExpr::concrete(std::move(v)); }

int native_u8(BinOp op, int a, int b) {
    switch (op) {
    case BinOp::Add: return static_cast<std::uint8_t>(a + b);
    case BinOp::Sub: return static_cast<std::uint8_t>(a - b);
    case BinOp::Mul: return static_cast<std::uint8_t>(a * b);
    case BinOp::Div: return a / b;
    case BinOp::Mod: return a % b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    default: return -1;
    }
}

int native_i8(BinOp op, int a, int b) {
    switch (op) {
    case BinOp::Add: return static_cast<std::int8_t>(a + b);
    case BinOp::Sub: return static_cast<std::int8_t>(a - b);
    case BinOp::Mul: return static_cast<std::int8_t>(a * b);
    case BinOp::Div: return static_cast<std::int8_t>(a / b);
    case BinOp::Mod: return static_cast<std::int8_t>(a % b);
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    default: return -1;
    }
}

int as_int(const Value& v) {
    if (v.kind() == ValueKind::Bool) {
        return v.as_bool();
    }
    return static_cast<int>(v.int_value());
}

}  // namespace

TEST(DefaultValue, ZeroElements) {
    EXPECT_EQ(default_value(LType::uint(64)), Value::uint(64, 0));
    Value m = default_value(LType::mapping(LType::address(), LType::uint(256)));
    EXPECT_EQ(m.as_map().entries.size(), 0u);
    EXPECT_EQ(*m.as_map().fallback, Value::uint(256, 0));
    EXPECT_EQ(default_value(LType::boolean()), Value::boolean(false));
    EXPECT_EQ(default_value(LType::bytes(4)).as_bytes(), std::vector<std::uint8_t>(4, 0));
}

TEST(DefaultValue, FunctionHasNone) {
    try {
        default_value(LType::function({}, {}));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.kind(), DomainErrorKind::NoDefault);
    }
}

TEST(DefaultValue, TypeOfDefaultIsType) {
    StructTable structs{{"P", {{"owner", LType::address()}, {"n", LType::sint(32)}}}};
    std::vector<LType> types = {
        LType::uint(8),    LType::sint(128),   LType::boolean(),
        LType::address(),  LType::string(),    LType::bytes(32),
        LType::unit(),     LType::structure("P"),
        LType::mapping(LType::string(), LType::mapping(LType::boolean(), LType::structure("P"))),
    };
    for (const auto& t : types) {
        EXPECT_EQ(default_value(t, structs).type(), t) << t.str();
    }
}

TEST(IntWrap, Uint8IncrementTable) {
    for (int n = 0; n < 256; ++n) {
        Value v = int_wrap(8, Signedness::Unsigned, n + 1);
        EXPECT_EQ(as_int(v), static_cast<std::uint8_t>(n + 1));
    }
    EXPECT_EQ(int_wrap(8, Signedness::Unsigned, 256), u8(0));
}

TEST(IntWrap, Int8TwosComplement) {
    for (int n = -300; n <= 300; ++n) {
        // C++20 defines integral narrowing as two's-complement wrapping.
        EXPECT_EQ(as_int(int_wrap(8, Signedness::Signed, n)), static_cast<std::int8_t>(n)) << n;
    }
    EXPECT_EQ(int_wrap(8, Signedness::Signed, 127 + 1).int_value(), -128);
}

TEST(IntWrap, Idempotent) {
    for (int w : {8, 16, 32, 64, 128, 256}) {
        for (auto s : {Signedness::Signed, Signedness::Unsigned}) {
            for (BigInt n : {BigInt(0), BigInt(-1), BigInt(1) << 255, (BigInt(1) << 300) + 7, -(BigInt(1) << 70)}) {
                Value once = int_wrap(w, s, n);
                EXPECT_EQ(int_wrap(w, s, once.int_value()), once);
            }
        }
    }
}

TEST(Operators, Uint8MatchesNativeArithmetic) {
    const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod,
                         BinOp::Lt,  BinOp::Le,  BinOp::Gt,  BinOp::Ge};
    for (int a = 0; a < 256; ++a) {
        for (int b = 0; b < 256; ++b) {
            for (BinOp op : ops) {
                if ((op == BinOp::Div || op == BinOp::Mod) && b == 0) {
                    continue;
                }
                ASSERT_EQ(as_int(apply_binop(op, u8(a), u8(b))), native_u8(op, a, b)) << a << binop_symbol(op) << b;
            }
        }
    }
}

TEST(Operators, Int8MatchesNativeArithmetic) {
    const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod,
                         BinOp::Lt,  BinOp::Le,  BinOp::Gt,  BinOp::Ge};
    for (int a = -128; a < 128; ++a) {
        for (int b = -128; b < 128; ++b) {
            for (BinOp op : ops) {
                if ((op == BinOp::Div || op == BinOp::Mod) && b == 0) {
                    continue;
                }
                ASSERT_EQ(as_int(apply_binop(op, i8(a), i8(b))), native_i8(op, a, b)) << a << binop_symbol(op) << b;
            }
        }
        EXPECT_EQ(as_int(apply_unop(UnOp::Neg, i8(a))), static_cast<std::int8_t>(-a));
    }
}

TEST(Operators, DivByZero) {
    try {
        apply_binop(BinOp::Div, u8(1), u8(0));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.kind(), DomainErrorKind::DivByZero);
    }
}

TEST(Operators, SignatureViolations) {
    EXPECT_THROW(binop_result_type(BinOp::Add, LType::boolean(), LType::uint(8)), DomainError);
    EXPECT_THROW(binop_result_type(BinOp::Add, LType::uint(8), LType::uint(16)), DomainError);
    EXPECT_THROW(binop_result_type(BinOp::And, LType::uint(8), LType::uint(8)), DomainError);
    EXPECT_THROW(binop_result_type(BinOp::Eq, LType::mapping(LType::uint(8), LType::uint(8)),
                                   LType::mapping(LType::uint(8), LType::uint(8))),
                 DomainError);
    EXPECT_EQ(binop_result_type(BinOp::Eq, LType::address(), LType::address()), LType::boolean());
    EXPECT_THROW(SymExpr::binary(BinOp::Lt, c(Value::boolean(true)), c(Value::boolean(false))), DomainError);
}

TEST(Render, ReportFormat) {
    EXPECT_EQ(Value::uint(64, 5).render(), "uint64(5)");
    EXPECT_EQ(Value::boolean(true).render(), "true");
    EXPECT_EQ(Value::address(1).render(), "addr(0x0000000000000000000000000000000000000001)");
    EXPECT_EQ(Value::init_data().render(), "initData");
    Value m = Value::map(LType::uint(8), LType::uint(8), u8(0)).map_set(u8(3), u8(9));
    EXPECT_EQ(m.render(), "map{default=uint8(0), [uint8(3)]=uint8(9)}");
}

TEST(Value, MapDefaultEntriesAreNotStored) {
    Value m = Value::map(LType::uint(8), LType::uint(8), u8(0));
    Value m2 = m.map_set(u8(1), u8(5)).map_set(u8(1), u8(0));
    EXPECT_EQ(m, m2);
    EXPECT_TRUE(m2.as_map().entries.empty());
}

TEST(Simplify, Examples) {
    const LType t = LType::uint(64);
    SymExpr x = SymExpr::var("x", t);
    EXPECT_EQ(simplify(SymExpr::binary(BinOp::Add, c(Value::uint(64, 2)), c(Value::uint(64, 3)))),
              c(Value::uint(64, 5)));
    EXPECT_EQ(simplify(SymExpr::binary(BinOp::Add, x, c(Value::uint(64, 0)))), x);
    EXPECT_EQ(simplify(SymExpr::binary(BinOp::Lt, c(Value::uint(64, 5)), c(Value::uint(64, 10)))),
              c(Value::boolean(true)));
    SymExpr b = SymExpr::var("b", LType::boolean());
    EXPECT_EQ(simplify(SymExpr::binary(BinOp::And, b, c(Value::boolean(true)))), b);
    EXPECT_EQ(simplify(SymExpr::ite(c(Value::boolean(true)), x, c(Value::uint(64, 1)))), x);
}

TEST(Simplify, SymbolicDivisorIsKept) {
    SymExpr x = SymExpr::var("x", LType::uint(8));
    SymExpr y = SymExpr::var("y", LType::uint(8));
    SymExpr q = SymExpr::binary(BinOp::Div, x, y);
    EXPECT_EQ(simplify(q), q);
    // Cancelling a possibly-faulting term would hide the fault.
    EXPECT_NE(simplify(SymExpr::binary(BinOp::Sub, q, q)).kind(), SymKind::Concrete);
}

TEST(Simplify, ModularCancellation) {
    const LType t = LType::uint(8);
    SymExpr a = SymExpr::var("a", t), b = SymExpr::var("b", t), v = SymExpr::var("v", t);
    SymExpr lhs = SymExpr::binary(BinOp::Add, SymExpr::binary(BinOp::Sub, a, v), SymExpr::binary(BinOp::Add, b, v));
    SymExpr rhs = SymExpr::binary(BinOp::Add, b, a);
    EXPECT_EQ(simplify(SymExpr::binary(BinOp::Eq, lhs, rhs)), c(Value::boolean(true)));
}

TEST(Simplify, ReadOverWrite) {
    const LType mt = LType::mapping(LType::uint(8), LType::uint(8));
    SymExpr m = SymExpr::var("m", mt);
    SymExpr k = SymExpr::var("k", LType::uint(8));
    SymExpr v = SymExpr::var("v", LType::uint(8));
    EXPECT_EQ(simplify(SymExpr::select(SymExpr::store(m, k, v), k)), v);
    SymExpr st = SymExpr::store(m, c(u8(1)), v);
    EXPECT_EQ(simplify(SymExpr::select(st, c(u8(2)))), SymExpr::select(m, c(u8(2))));
    EXPECT_EQ(simplify(SymExpr::store(m, k, SymExpr::select(m, k))), m);
}

TEST(EvalClosed, Examples) {
    const LType t = LType::uint(8);
    SymExpr x = SymExpr::var("x", t);
    EXPECT_EQ(eval_closed(x, {{"x", u8(7)}}), u8(7));
    // 200 + 200 = 400, and 400 mod 256 = 144.
    EXPECT_EQ(eval_closed(SymExpr::binary(BinOp::Add, x, x), {{"x", u8(200)}}), u8(400 % 256));
    SymExpr a = SymExpr::var("a", LType::address());
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(eval_closed(SymExpr::binary(BinOp::Eq, a, a), {{"a", Value::address(i * 977)}}),
                  Value::boolean(true));
    }
}

TEST(EvalClosed, MissingAssignment) {
    try {
        eval_closed(SymExpr::var("x", LType::uint(8)), {});
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.kind(), DomainErrorKind::MissingAssignment);
    }
}

TEST(EvalPartial, ShortCircuits) {
    struct Lookup : PartialLookup {
        Assignment a;
        const Value* lookup(const std::string& n) const override {
            auto it = a.find(n);
            return it == a.end() ? nullptr : &it->second;
        }
    } lk;
    lk.a["b"] = Value::boolean(false);
    SymExpr unknown = SymExpr::var("u", LType::boolean());
    SymExpr b = SymExpr::var("b", LType::boolean());
    auto r = eval_partial(SymExpr::binary(BinOp::And, unknown, b), lk);
    ASSERT_TRUE(std::holds_alternative<Value>(r));
    EXPECT_EQ(std::get<Value>(r), Value::boolean(false));
    auto r2 = eval_partial(SymExpr::binary(BinOp::Or, unknown, b), lk);
    ASSERT_TRUE(std::holds_alternative<Blocked>(r2));
    EXPECT_EQ(std::get<Blocked>(r2).first_unknown, "u");
}

namespace {

enum class Outcome { Ok, Fault };

std::pair<Outcome, Value> eval_or_fault(const SymExpr& e, const Assignment& a) {
    try {
        return {Outcome::Ok, eval_closed(e, a)};
    } catch (const DomainError& err) {
        EXPECT_EQ(err.kind(), DomainErrorKind::DivByZero);
        return {Outcome::Fault, Value()};
    }
}

}  // namespace

TEST(SimplifyProperty, SemanticsTypeAndSizePreserved) {
    testkit::SymExprGen gen(0x5eed);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        SymExpr e = gen.gen_any(1 + gen.pick(5));
        SymExpr s = simplify(e);
        ASSERT_EQ(s.type(), e.type()) << e.render();
        ASSERT_LE(s.node_count(), e.node_count()) << e.render() << "  ->  " << s.render();
        if (!e.has_vars()) {
            auto [kind, v] = eval_or_fault(e, {});
            if (kind == Outcome::Ok) {
                ASSERT_TRUE(s.is_concrete()) << e.render() << "  ->  " << s.render();
            }
        }
        Assignment a = gen.assignment();
        auto before = eval_or_fault(e, a);
        auto after = eval_or_fault(s, a);
        ASSERT_EQ(before.first, after.first) << e.render() << "  ->  " << s.render();
        if (before.first == Outcome::Ok) {
            ASSERT_EQ(before.second, after.second) << before.second.render() << " vs " << after.second.render() << "  " << e.render() << "  ->  " << s.render();
            ++checked;
        }
    }
    EXPECT_GT(checked, 5000);
}

TEST(SimplifyProperty, Idempotent) {
    testkit::SymExprGen gen(77);
    for (int i = 0; i < 10000; ++i) {
        SymExpr s = simplify(gen.gen_any(1 + gen.pick(5)));
        SymExpr again = simplify(testkit::deep_copy(s));
        ASSERT_EQ(again, s) << s.render() << "  ->  " << again.render();
    }
}
