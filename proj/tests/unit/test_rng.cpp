#include "driftwatch/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace driftwatch;

TEST(Philox, KnownAnswers) {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    EXPECT_EQ(philox4x32(C{0, 0, 0, 0}, K{0, 0}),
              (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         K{0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(ReplicationSeeds, NoCollisionsInMillionIndices) {
    for (std::uint64_t master : {0ull, 42ull, 7ull}) {
        std::vector<std::uint64_t> seeds(1000000);
        for (std::uint64_t r = 0; r < seeds.size(); ++r) seeds[r] = derive_replication_seed(master, r);
        std::sort(seeds.begin(), seeds.end());
        EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
    }
}

TEST(ReplicationSeeds, DependOnMaster) {
    EXPECT_NE(derive_replication_seed(1, 0), derive_replication_seed(2, 0));
    EXPECT_EQ(derive_replication_seed(1, 5), derive_replication_seed(1, 5));
}

TEST(NormalStream, RandomAccessMatchesSequential) {
    NormalStream a(99);
    std::vector<double> seq;
    for (int i = 0; i < 11; ++i) seq.push_back(a.next());
    for (std::uint64_t start : {0u, 1u, 4u, 7u}) {
        NormalStream b(99, start);
        for (std::size_t i = start; i < seq.size(); ++i) EXPECT_EQ(b.next(), seq[i]);
    }
    EXPECT_EQ(a.position(), 11u);
}

TEST(NormalStream, Moments) {
    NormalStream s(2024);
    const int m = 400000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int i = 0; i < m; ++i) {
        const double z = s.next();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
    EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
    EXPECT_NEAR(s3 / m, 0.0, 5.0 * std::sqrt(15.0 / m));
    EXPECT_NEAR(s4 / m, 3.0, 5.0 * std::sqrt(96.0 / m));
}

TEST(NormalStream, UniformsInOpenInterval) {
    NormalStream s(3);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}
