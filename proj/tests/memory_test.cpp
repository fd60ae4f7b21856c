#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fspvm/memory.hpp"
#include "memory_axioms.hpp"

using namespace fspvm;

namespace {

const LType kUint64 = LType::uint(64);

template <class F>
MemoryErrorKind error_of(F&& f) {
    try {
        f();
    } catch (const MemoryError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no MemoryError raised";
    return MemoryErrorKind::InvalidSize;
}

}  // namespace

TEST(InitMemory, HundredFreshBlocks) {
    MemoryState m = init_memory(100);
    EXPECT_EQ(m.size(), 100u);
    EXPECT_EQ(m.alloc_cursor(), 0u);
    for (std::uint32_t i = 0; i < 100; ++i) {
        EXPECT_TRUE(m.block(MemAddress{i}).is_fresh());
    }
    EXPECT_EQ(render_block(MemAddress{0x5f}, m.block(MemAddress{0x5f})), "m_0x0000005f := initData;");
}

TEST(InitMemory, Degenerate) {
    EXPECT_EQ(init_memory(1).size(), 1u);
    EXPECT_EQ(error_of([] { init_memory(0); }), MemoryErrorKind::InvalidSize);
}

TEST(Allocate, BumpsCursor) {
    MemoryState m = init_memory(2);
    auto [a, m2] = allocate(m, "close", kUint64, Visibility::Public);
    EXPECT_EQ(a.index, 0u);
    EXPECT_EQ(m2.alloc_cursor(), 1u);
    EXPECT_EQ(m.alloc_cursor(), 0u);
    const MemBlock& b = m2.block(a);
    EXPECT_EQ(*b.name, "close");
    EXPECT_EQ(*b.decl_type, kUint64);
    EXPECT_EQ(*b.visibility, Visibility::Public);
    EXPECT_TRUE(b.content.is_init_data());
    EXPECT_EQ(render_block(a, b), "m_0x00000000 [close : uint64, public] := initData;");
}

TEST(Allocate, Exhaustion) {
    MemoryState m = allocate(init_memory(1), "a", kUint64).second;
    EXPECT_EQ(error_of([&] { allocate(m, "b", kUint64); }), MemoryErrorKind::MemoryFull);
}

TEST(Write, GuardedByDeclaredType) {
    auto [a, m] = allocate(init_memory(4), "open", kUint64);
    EXPECT_EQ(error_of([&, a = a, &m = m] { write(m, a, SymExpr::concrete(Value::boolean(true))); }),
              MemoryErrorKind::TypeMismatch);
    EXPECT_EQ(error_of([&m = m] { write(m, MemAddress{4}, SymExpr::concrete(Value::boolean(true))); }),
              MemoryErrorKind::OutOfRange);
    SymExpr x = SymExpr::var("x", kUint64);
    MemoryState m2 = write(m, a, x);
    EXPECT_EQ(read(m2, a, kUint64), x);
    EXPECT_EQ(read(m, a, kUint64), SymExpr::concrete(Value::uint(64, 0)));
}

TEST(Read, UndeclaredFreshBlock) {
    MemoryState m = init_memory(3);
    EXPECT_EQ(error_of([&] { read(m, MemAddress{1}, kUint64); }), MemoryErrorKind::UndeclaredRead);
    EXPECT_EQ(error_of([&] { read(m, MemAddress{3}, kUint64); }), MemoryErrorKind::OutOfRange);
}

TEST(MemEqual, ModuloSimplify) {
    auto [a, m] = allocate(init_memory(3), "n", kUint64);
    SymExpr x = SymExpr::var("x", kUint64);
    MemoryState m1 = write(m, a, SymExpr::binary(BinOp::Add, x, SymExpr::concrete(Value::uint(64, 0))));
    MemoryState m2 = write(m, a, x);
    EXPECT_TRUE(mem_equal(m, m));
    EXPECT_TRUE(mem_equal(m1, m2));
    EXPECT_FALSE(mem_equal(m, m2));
    EXPECT_TRUE(mem_diff(m, m).empty());
    auto d = mem_diff(m, m2);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].address.index, 0u);
}

TEST(MemDiff, SizeMismatch) {
    auto d = mem_diff(init_memory(2), init_memory(3));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_TRUE(d[0].size_mismatch);
    EXPECT_FALSE(mem_equal(init_memory(2), init_memory(3)));
}

TEST(ReleaseTo, RestoresFreshBlocks) {
    MemoryState m = init_memory(4);
    m = allocate(m, "a", kUint64).second;
    MemoryState base = m;
    m = allocate(m, "local", kUint64).second;
    m = write(m, MemAddress{1}, SymExpr::concrete(Value::uint(64, 9)));
    m = release_to(m, 1);
    EXPECT_EQ(m.alloc_cursor(), 1u);
    EXPECT_TRUE(mem_equal(m, base));
}

TEST(Dump, JsonMirrorsText) {
    auto [a, m] = allocate(init_memory(3), "close", kUint64, Visibility::Public);
    m = write(m, a, SymExpr::concrete(Value::uint(64, 5)));
    EXPECT_EQ(dump_memory(m),
              "m_0x00000000 [close : uint64, public] := uint64(5);\nm_0x00000001 := initData;\n"
              "m_0x00000002 := initData;\n");
    nlohmann::json j = memory_to_json(m);
    ASSERT_EQ(j["blocks"].size(), 1u);
    EXPECT_EQ(j["blocks"][0]["address"], "m_0x00000000");
    EXPECT_EQ(j["blocks"][0]["content"], "uint64(5)");
    EXPECT_EQ(j["blocks"][0]["visibility"], "public");
}

TEST(PersistentArray, LargeSizesAndSharing) {
    PersistentArray<int> p(5000, 7);
    PersistentArray<int> q = p.set(4999, 1).set(0, 2);
    EXPECT_EQ(p.get(4999), 7);
    EXPECT_EQ(q.get(4999), 1);
    EXPECT_EQ(q.get(0), 2);
    int visited = 0;
    p.diff(q, [&](std::size_t, int, int) { ++visited; });
    EXPECT_LE(visited, 32);
    EXPECT_THROW(p.get(5000), std::out_of_range);
}

TEST(MemoryAxioms, TenThousandRandomCases) {
    testkit::MemoryAxioms axioms(2024);
    testkit::AxiomReport r = axioms.run(10000);
    EXPECT_EQ(r.cases, 10000);
    EXPECT_EQ(r.failures, 0) << r.first_failure;
}
