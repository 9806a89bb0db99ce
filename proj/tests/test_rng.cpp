#include "sldp/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace sldp;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::apply(C{0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, AddressableAndReproducible) {
    const CounterRng a(7), b(7), c(8);
    EXPECT_EQ(a.normal2(3, 11, 0), b.normal2(3, 11, 0));
    EXPECT_NE(a.normal2(3, 11, 0), c.normal2(3, 11, 0));
    EXPECT_NE(a.normal2(3, 11, 0), a.normal2(4, 11, 0));
    EXPECT_NE(a.normal2(3, 11, 0), a.normal2(3, 12, 0));

    std::vector<double> full(10), part(4);
    a.normals(5, 2, full);
    a.normals(5, 2, part);
    for (std::size_t i = 0; i < part.size(); ++i) EXPECT_EQ(full[i], part[i]);
}

TEST(CounterRng, NormalMoments) {
    const CounterRng rng(20261017);
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n / 2; ++i) {
        for (double z : rng.normal2(1, static_cast<std::uint32_t>(i), 0)) {
            s1 += z;
            s2 += z * z;
            s4 += z * z * z * z;
        }
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(CounterRng, UniformsInOpenUnitInterval) {
    const CounterRng rng(1);
    std::vector<double> u(100000);
    rng.uniforms(0, 0, u);
    double mean = 0;
    for (double v : u) {
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
        mean += v;
    }
    EXPECT_NEAR(mean / u.size(), 0.5, 4.0 * std::sqrt(1.0 / 12 / u.size()));
}

TEST(MixSeed, DistinctStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}
