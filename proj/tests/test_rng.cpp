#include "fbmclt/rng.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

using fbmclt::RngStream;
using fbmclt::substream;

TEST_CASE("philox4x32-10 known answers") {
    // the (0,0,0) block is the published reference vector for the all-zero
    // counter/key; the other two pin our (seed, stream, block) word layout
    const std::array<std::uint32_t, 4> zero = {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                               0x9b00dbd8u};
    CHECK(RngStream(0, 0).block(0) == zero);

    const std::array<std::uint32_t, 4> kat2 = {0x93c624dfu, 0xd53b6eb5u, 0x52ca6d94u,
                                               0xd26e21edu};
    CHECK(RngStream(0x123456789ABCDEF0ULL, 42).block(7) == kat2);

    const std::array<std::uint32_t, 4> kat3 = {0x3a98cac5u, 0xf6fb0993u, 0xc647b937u,
                                               0x5940fb82u};
    CHECK(RngStream(2026, (3ULL << 48) | 11).block(1) == kat3);
}

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(99, 5), b(99, 5), c(99, 6), d(100, 5);
    bool all_equal = true, differs_stream = false, differs_seed = false;
    for (int i = 0; i < 256; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal &= va == b.next_u64();
        differs_stream |= va != c.next_u64();
        differs_seed |= va != d.next_u64();
    }
    CHECK(all_equal);
    CHECK(differs_stream);
    CHECK(differs_seed);
}

TEST_CASE("substream packs stage and index") {
    CHECK(substream(0, 0) == 0);
    CHECK(substream(1, 0) == (1ULL << 48));
    CHECK(substream(0, 123) == 123);
    CHECK(substream(7, 0xFFFFFFFFFFFFULL) == ((7ULL << 48) | 0xFFFFFFFFFFFFULL));
    // index is masked to 48 bits so stages can never collide
    CHECK(substream(1, 1ULL << 48) == (1ULL << 48));
}

TEST_CASE("uniform draws live in (0,1]") {
    RngStream s(7, 0);
    double lo = 2.0, hi = -1.0;
    for (int i = 0; i < 200000; ++i) {
        const double u = s.next_uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    CHECK(lo < 1e-4); // the low end is actually exercised
    CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("gaussian moments") {
    RngStream s(2024, 1);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.next_gaussian();
        sum += z;
        sum2 += z * z;
        sum3 += z * z * z;
        sum4 += z * z * z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    // 5 sigma bands for the n-sample moment estimates
    CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::fabs(sum3 / n) < 5.0 * std::sqrt(15.0 / n));
    CHECK(std::fabs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("box-muller pair is two independent normals") {
    RngStream s(11, 3);
    const int n = 100000;
    double sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        double z0, z1;
        s.next_gaussian_pair(z0, z1);
        sxy += z0 * z1;
    }
    CHECK(std::fabs(sxy / n) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("disjoint substreams decorrelate") {
    RngStream a(1234, substream(2, 0));
    RngStream b(1234, substream(2, 1));
    const int n = 100000;
    double sxy = 0.0;
    for (int i = 0; i < n; ++i) sxy += a.next_gaussian() * b.next_gaussian();
    CHECK(std::fabs(sxy / n) < 5.0 / std::sqrt(static_cast<double>(n)));
}
