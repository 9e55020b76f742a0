#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gcdtc/core/blocks.hpp"
#include "gcdtc/core/field.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;

namespace {

TensorField random_field(int t, int h, int w, uint64_t seed) {
    Rng rng(seed);
    TensorField f = make_field(0, t, h, w);
    for (double& v : f.values) v = rng.uniform(-5.0, 5.0);
    f.compute_value_range();
    return f;
}

}  // namespace

TEST(Partition, ExactTilingSingleBlock) {
    auto f = random_field(16, 64, 64, 1);
    auto [blocks, grid] = partition(f, 16, 64, 64);
    EXPECT_EQ(blocks.size(), 1u);
    EXPECT_EQ(grid.pad_t, 0);
    EXPECT_EQ(grid.pad_y, 0);
    EXPECT_EQ(grid.pad_x, 0);
    EXPECT_EQ(blocks[0].values, f.values);
}

TEST(Partition, PaddedAlongWidth) {
    auto f = random_field(16, 64, 65, 2);
    auto [blocks, grid] = partition(f, 16, 64, 64);
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(grid.pad_x, 63);
    // Second block's padding replicates the last field column.
    const Block3D& b = blocks[1];
    EXPECT_EQ(b.origin.x0, 64);
    for (int t = 0; t < 16; ++t)
        for (int y = 0; y < 64; ++y)
            for (int x = 1; x < 64; ++x) EXPECT_EQ(b.at(t, y, x), f.at(t, y, 64));
}

TEST(Partition, EightBlocks) {
    auto f = random_field(32, 128, 128, 3);
    auto [blocks, grid] = partition(f, 16, 64, 64);
    EXPECT_EQ(blocks.size(), 8u);
    EXPECT_EQ(grid.block_count(), 8);
}

TEST(Partition, ZeroSizedFieldFails) {
    TensorField f;
    EXPECT_THROW(partition(f, 4, 4, 4), std::invalid_argument);
}

TEST(Reassemble, RoundTripExact) {
    auto f = random_field(16, 64, 64, 4);
    auto [blocks, grid] = partition(f, 16, 64, 64);
    auto back = reassemble(blocks, grid);
    EXPECT_EQ(back.values, f.values);
}

TEST(Reassemble, RoundTripWithPadding) {
    auto f = random_field(17, 65, 65, 0);
    auto [blocks, grid] = partition(f, 16, 64, 64);
    auto back = reassemble(blocks, grid);
    EXPECT_EQ(back.values, f.values);
}

TEST(Reassemble, OrderInsensitiveByOrigin) {
    auto f = random_field(17, 65, 65, 5);
    auto [blocks, grid] = partition(f, 8, 32, 32);
    std::mt19937 g(7);
    std::shuffle(blocks.begin(), blocks.end(), g);
    auto back = reassemble(blocks, grid);
    EXPECT_EQ(back.values, f.values);
}

TEST(Reassemble, MissingBlockNamesOffender) {
    auto f = random_field(8, 8, 8, 6);
    auto [blocks, grid] = partition(f, 4, 4, 4);
    blocks.pop_back();
    blocks.push_back(blocks[0]);  // duplicate origin
    try {
        reassemble(blocks, grid);
        FAIL() << "expected throw";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("(0,0,0,0)"), std::string::npos);
    }
}

// Property: partition/reassemble is an exact inverse pair over randomized
// shapes of 1..3 blocks per axis.
TEST(Reassemble, InversePairProperty) {
    Rng rng(0);
    for (int trial = 0; trial < 30; ++trial) {
        int bd = static_cast<int>(rng.uniform_int(1, 5));
        int bh = static_cast<int>(rng.uniform_int(1, 5));
        int bw = static_cast<int>(rng.uniform_int(1, 5));
        int t = static_cast<int>(rng.uniform_int(1, 3 * bd));
        int h = static_cast<int>(rng.uniform_int(1, 3 * bh));
        int w = static_cast<int>(rng.uniform_int(1, 3 * bw));
        auto f = random_field(t, h, w, 100 + trial);
        auto [blocks, grid] = partition(f, bd, bh, bw);
        auto back = reassemble(blocks, grid);
        ASSERT_EQ(back.values, f.values) << "shape " << t << "x" << h << "x" << w;
    }
}

TEST(Normalize, AffineEndpointsAndMidpoint) {
    TensorField f = make_field(0, 1, 1, 3);
    f.values = {2.0, 5.0, 8.0};
    f.compute_value_range();
    NormStats stats = norm_stats_of(f);
    auto n = normalize(f, stats);
    EXPECT_DOUBLE_EQ(n.values[0], -1.0);
    EXPECT_DOUBLE_EQ(n.values[1], 0.0);
    EXPECT_DOUBLE_EQ(n.values[2], 1.0);
}

TEST(Normalize, RoundTripWithinTolerance) {
    auto f = random_field(6, 9, 11, 9);
    NormStats stats = norm_stats_of(f);
    auto back = denormalize(normalize(f, stats), stats);
    double span = stats.max - stats.min;
    for (size_t i = 0; i < f.values.size(); ++i)
        EXPECT_NEAR(back.values[i], f.values[i], 1e-6 * span);
}

TEST(Normalize, PreservesArgExtrema) {
    auto f = random_field(4, 6, 6, 11);
    auto n = normalize(f, norm_stats_of(f));
    auto fmax = std::max_element(f.values.begin(), f.values.end()) - f.values.begin();
    auto nmax = std::max_element(n.values.begin(), n.values.end()) - n.values.begin();
    EXPECT_EQ(fmax, nmax);
    auto fmin = std::min_element(f.values.begin(), f.values.end()) - f.values.begin();
    auto nmin = std::min_element(n.values.begin(), n.values.end()) - n.values.begin();
    EXPECT_EQ(fmin, nmin);
}

TEST(Normalize, DegenerateRangeFails) {
    TensorField f = make_field(0, 1, 1, 2);
    f.values = {3.0, 3.0};
    f.compute_value_range();
    EXPECT_THROW(normalize(f, norm_stats_of(f)), std::invalid_argument);
}
