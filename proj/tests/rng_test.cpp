#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "eswp/rng.hpp"

using eswp::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, DerivedStreamsDiffer) {
    Rng a = Rng::derive(7, 0);
    Rng b = Rng::derive(7, 1);
    Rng c = Rng::derive(8, 0);
    EXPECT_NE(a.next(), b.next());
    Rng a2 = Rng::derive(7, 0);
    EXPECT_NE(a2.next(), c.next());
}

TEST(Rng, U01InHalfOpenUnitInterval) {
    Rng r(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.u01();
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
    }
}

TEST(Rng, U01MeanNearHalf) {
    Rng r(3);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += r.u01();
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, BelowStaysInRange) {
    Rng r(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t v = r.below(7);
        EXPECT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);  // all residues hit
}

TEST(Rng, NormalMoments) {
    Rng r(11);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sum2 += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.02);
    EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(Rng, SerializeRoundTripContinuesIdentically) {
    Rng a(99);
    for (int i = 0; i < 37; ++i) a.u01();
    a.normal();  // leaves a spare value buffered
    const std::string text = a.serialize();
    Rng b = Rng::deserialize(text);
    EXPECT_TRUE(a == b);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.normal(), b.normal());
        EXPECT_EQ(a.next(), b.next());
    }
}

TEST(Rng, KnownGolden) {
    // mt19937_64's algorithm is fully specified, so the first draw from a
    // known seed is a portable constant.
    std::mt19937_64 ref(12345);
    Rng r(12345);
    EXPECT_EQ(r.next(), ref());
}
