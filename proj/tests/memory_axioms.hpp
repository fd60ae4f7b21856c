#pragma once

// Randomized GERM axiom checks against a plain vector reference model.
// Shared by the unit tests and the acceptance binary.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fspvm/memory.hpp"

namespace fspvm::testkit {

struct AxiomReport {
    int cases = 0;
    int failures = 0;
    std::string first_failure;

    void fail(const std::string& why) {
        if (failures++ == 0) {
            first_failure = why;
        }
    }
};

class MemoryAxioms {
public:
    explicit MemoryAxioms(std::uint64_t seed) : rng_(seed) {}

    AxiomReport run(int cases) {
        AxiomReport r;
        for (int i = 0; i < cases; ++i) {
            ++r.cases;
            switch (pick(6)) {
            case 0: read_after_write(r); break;
            case 1: frame(r); break;
            case 2: persistence(r); break;
            case 3: allocation(r); break;
            case 4: equivalence(r); break;
            default: model_trace(r); break;
            }
        }
        return r;
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    LType random_type() {
        switch (pick(4)) {
        case 0: return LType::boolean();
        case 1: return LType::uint(64);
        case 2: return LType::address();
        default: return LType::uint(8);
        }
    }

    SymExpr random_value(const LType& t) {
        if (pick(4) == 0) {
            SymExpr v = SymExpr::var("v" + std::to_string(pick(3)), t);
            if (t.is_int() && pick(2) == 0) {
                return SymExpr::binary(BinOp::Add, v, SymExpr::concrete(Value::uint(t.width(), 0)));
            }
            return v;
        }
        if (t.is_bool()) {
            return SymExpr::concrete(Value::boolean(pick(2) == 1));
        }
        if (t.kind() == TypeKind::Address) {
            return SymExpr::concrete(Value::address(pick(1000)));
        }
        return SymExpr::concrete(Value::uint(t.width(), pick(300)));
    }

    // A state with some declared blocks and random contents, plus the declared types.
    std::pair<MemoryState, std::vector<LType>> random_state() {
        std::size_t size = 1 + static_cast<std::size_t>(pick(300));
        MemoryState m = init_memory(size);
        std::vector<LType> types;
        int n = pick(static_cast<int>(size) + 1);
        for (int i = 0; i < n; ++i) {
            LType t = random_type();
            m = allocate(m, "x" + std::to_string(i), t, Visibility::Public).second;
            if (pick(2) == 0) {
                m = write(m, MemAddress{static_cast<std::uint32_t>(i)}, random_value(t));
            }
            types.push_back(t);
        }
        return {m, types};
    }

    void read_after_write(AxiomReport& r) {
        auto [m, types] = random_state();
        if (types.empty()) {
            return;
        }
        std::uint32_t a = static_cast<std::uint32_t>(pick(static_cast<int>(types.size())));
        SymExpr v = random_value(types[a]);
        MemoryState m2 = write(m, MemAddress{a}, v);
        if (!(read(m2, MemAddress{a}, types[a]) == v)) {
            r.fail("read-after-write at " + MemAddress{a}.str());
        }
    }

    void frame(AxiomReport& r) {
        auto [m, types] = random_state();
        if (types.size() < 2) {
            return;
        }
        auto a = static_cast<std::uint32_t>(pick(static_cast<int>(types.size())));
        auto b = static_cast<std::uint32_t>(pick(static_cast<int>(types.size())));
        if (a == b) {
            return;
        }
        MemoryState m2 = write(m, MemAddress{a}, random_value(types[a]));
        if (!(read(m2, MemAddress{b}, types[b]) == read(m, MemAddress{b}, types[b]))) {
            r.fail("frame axiom broken writing " + MemAddress{a}.str() + " reading " + MemAddress{b}.str());
        }
    }

    void persistence(AxiomReport& r) {
        auto [m, types] = random_state();
        if (types.empty()) {
            return;
        }
        auto a = static_cast<std::uint32_t>(pick(static_cast<int>(types.size())));
        SymExpr before = m.block(MemAddress{a}).content;
        MemoryState m2 = write(m, MemAddress{a}, random_value(types[a]));
        (void)m2;
        if (!(m.block(MemAddress{a}).content == before)) {
            r.fail("write mutated its input state at " + MemAddress{a}.str());
        }
    }

    void allocation(AxiomReport& r) {
        auto [m, types] = random_state();
        if (m.alloc_cursor() >= m.size()) {
            try {
                allocate(m, "extra", LType::boolean());
                r.fail("allocate on a full memory did not raise MemoryFull");
            } catch (const MemoryError& e) {
                if (e.kind() != MemoryErrorKind::MemoryFull) {
                    r.fail("allocate on a full memory raised the wrong error");
                }
            }
            return;
        }
        auto [addr, m2] = allocate(m, "extra", LType::boolean());
        if (addr.index != m.alloc_cursor() || m2.alloc_cursor() != m.alloc_cursor() + 1) {
            r.fail("allocate did not bump the cursor");
        }
        for (std::uint32_t i = 0; i < m.size(); ++i) {
            if (i != addr.index && !(m.block(MemAddress{i}) == m2.block(MemAddress{i}))) {
                r.fail("allocate disturbed block " + MemAddress{i}.str());
                return;
            }
        }
        if (!m2.block(addr).content.is_init_data()) {
            r.fail("allocated block is not initData");
        }
    }

    void equivalence(AxiomReport& r) {
        auto [m, types] = random_state();
        if (types.empty()) {
            if (!mem_equal(m, m)) {
                r.fail("mem_equal not reflexive");
            }
            return;
        }
        // Three states drawn from a small family so that equal pairs are common.
        auto variant = [&, &m = m, &types = types]() {
            MemoryState s = m;
            auto a = static_cast<std::uint32_t>(pick(2) % types.size());
            if (types[a].is_int()) {
                SymExpr v = SymExpr::var("w", types[a]);
                s = write(s, MemAddress{a}, pick(2) == 0 ? v : SymExpr::binary(BinOp::Add, v, SymExpr::concrete(Value::uint(types[a].width(), 0))));
            } else if (pick(2) == 0) {
                s = write(s, MemAddress{a}, SymExpr::var("w", types[a]));
            }
            return s;
        };
        MemoryState x = variant(), y = variant(), z = variant();
        bool xy = mem_equal(x, y), yx = mem_equal(y, x), yz = mem_equal(y, z), xz = mem_equal(x, z);
        if (!mem_equal(x, x)) {
            r.fail("mem_equal not reflexive");
        }
        if (xy != yx) {
            r.fail("mem_equal not symmetric");
        }
        if (xy && yz && !xz) {
            r.fail("mem_equal not transitive");
        }
        if (xy != mem_diff(x, y).empty()) {
            r.fail("mem_diff disagrees with mem_equal");
        }
    }

    // Random operation sequence checked step by step against a vector model.
    void model_trace(AxiomReport& r) {
        std::size_t size = 1 + static_cast<std::size_t>(pick(40));
        MemoryState m = init_memory(size);
        std::vector<MemBlock> model(size);
        std::uint32_t cursor = 0;
        for (int step = 0; step < 30; ++step) {
            int op = pick(4);
            if (op == 0) {
                LType t = random_type();
                if (cursor == size) {
                    continue;
                }
                auto [a, m2] = allocate(m, "v", t, Visibility::Private);
                m = m2;
                model[cursor].name = "v";
                model[cursor].decl_type = t;
                model[cursor].visibility = Visibility::Private;
                ++cursor;
            } else if (op == 1 && cursor > 0) {
                auto a = static_cast<std::uint32_t>(pick(static_cast<int>(cursor)));
                SymExpr v = random_value(*model[a].decl_type);
                m = write(m, MemAddress{a}, v);
                model[a].content = v;
            } else if (op == 2 && cursor > 0) {
                auto keep = static_cast<std::uint32_t>(pick(static_cast<int>(cursor) + 1));
                m = release_to(m, keep);
                for (std::uint32_t i = keep; i < cursor; ++i) {
                    model[i] = MemBlock{};
                }
                cursor = keep;
            } else if (cursor < size) {
                try {
                    read(m, MemAddress{cursor}, LType::boolean());
                    r.fail("read of a fresh undeclared block succeeded");
                } catch (const MemoryError& e) {
                    if (e.kind() != MemoryErrorKind::UndeclaredRead) {
                        r.fail("fresh undeclared read raised the wrong error");
                    }
                }
            }
            for (std::uint32_t i = 0; i < size; ++i) {
                if (!(m.block(MemAddress{i}) == model[i])) {
                    r.fail("state diverged from model at " + MemAddress{i}.str());
                    return;
                }
            }
            if (m.alloc_cursor() != cursor) {
                r.fail("cursor diverged from model");
                return;
            }
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace fspvm::testkit
