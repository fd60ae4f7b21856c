#include <gtest/gtest.h>

#include "fspvm/frontend.hpp"
#include "fspvm/generator.hpp"
#include "fspvm/verifier.hpp"
#include "support/oracle.hpp"

using namespace fspvm;

TEST(Generator, SameSeedSameSource) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        EXPECT_EQ(generate_source(s, 12), generate_source(s, 12));
    }
    EXPECT_NE(generate_source(1, 12), generate_source(2, 12));
}

TEST(Generator, SizeZeroIsMinimal) {
    Contract c = program_generator(7, 0);
    ASSERT_EQ(c.functions().size(), 1u);
    EXPECT_EQ(c.functions().front().name(), "f");
    EXPECT_TRUE(c.functions().front().body().empty());
}

TEST(Generator, OutputsTypecheck) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        for (int w : {8, 256}) {
            GenOptions o;
            o.uint_width = w;
            o.verification = s % 2 == 1;
            EXPECT_NO_THROW(program_generator(s, 1 + static_cast<int>(s % 24), o)) << "seed " << s << " width " << w;
        }
    }
}

TEST(Generator, VerificationInputsAreEnumerable) {
    GenOptions o;
    o.uint_width = 8;
    o.verification = true;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Contract c = program_generator(s, 16, o);
        BoundSpec b = bind_spec(c, parse_spec(generate_spec(s, c)).at(0));
        std::size_t bits = 0;
        for (const auto& v : c.state()) {
            bits += v->type().is_bool() ? 1 : v->type().width();
        }
        for (const auto& [name, t] : b.symbolic_args) {
            bits += t.is_bool() ? 1 : t.width();
        }
        EXPECT_LE(bits, 17u) << "seed " << s;
    }
}

TEST(Generator, VerifierAgreesWithOracle) {
    GenOptions o;
    o.uint_width = 8;
    o.verification = true;
    int proved = 0;
    int falsified = 0;
    for (std::uint64_t s = 500; s < 520; ++s) {
        Contract c = program_generator(s, 12, o);
        PropertySpec p = parse_spec(generate_spec(s, c)).at(0);
        VerifyOptions vo;
        vo.gas_limit = 20000;
        Verdict v = verify(c, p, vo);
        ASSERT_NE(v.kind, VerdictKind::Unknown) << "seed " << s;
        auto orc = oracle::exhaustive(c, bind_spec(c, p), vo.gas_limit);
        if (v.kind == VerdictKind::Proved) {
            ++proved;
            EXPECT_FALSE(orc.violated || orc.out_of_gas || orc.fault) << "seed " << s;
        } else {
            ++falsified;
            EXPECT_TRUE(orc.violated) << "seed " << s;
        }
    }
    EXPECT_GT(proved, 0);
    EXPECT_GT(falsified, 0);
}
