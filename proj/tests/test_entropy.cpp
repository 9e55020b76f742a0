#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "gcdtc/entropy/huffman.hpp"
#include "gcdtc/entropy/quantize.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::entropy;

TEST(UniformQuantizer, SpecValues) {
    QuantConfig cfg;  // b=1000, a=16
    EXPECT_EQ(quantize_uniform(0.0, cfg), 0);
    EXPECT_DOUBLE_EQ(dequantize_uniform(0, cfg), 0.008);

    EXPECT_EQ(quantize_uniform(0.1, cfg), 6);
    EXPECT_DOUBLE_EQ(dequantize_uniform(6, cfg), 0.104);
    EXPECT_LE(std::abs(0.1 - dequantize_uniform(6, cfg)), 0.008);

    EXPECT_EQ(quantize_uniform(-0.1, cfg), -7);
    EXPECT_DOUBLE_EQ(dequantize_uniform(-7, cfg), -0.104);
}

TEST(UniformQuantizer, ErrorBoundProperty) {
    QuantConfig cfg;
    const double bound = cfg.step() / 2.0;
    Rng rng(0);
    for (int i = 0; i < 1000000; ++i) {
        double x = rng.uniform(-1e4, 1e4);
        double back = dequantize_uniform(quantize_uniform(x, cfg), cfg);
        ASSERT_LE(std::abs(x - back), bound) << "x=" << x;
    }
}

TEST(UniformQuantizer, ConfigValidation) {
    QuantConfig ok{100, 3};
    EXPECT_NO_THROW(ok.validate());
    QuantConfig bad_b{999, 16};
    EXPECT_THROW(bad_b.validate(), std::invalid_argument);
    QuantConfig bad_a{1000, 0};
    EXPECT_THROW(bad_a.validate(), std::invalid_argument);
}

TEST(LogQuantizer, SpecValues) {
    QuantConfig cfg;
    auto zero = quantize_log(0.0, cfg);
    EXPECT_EQ(zero.sign, 0);
    EXPECT_EQ(dequantize_log(zero, cfg), 0.0);

    auto one = quantize_log(1.0, cfg);
    EXPECT_EQ(one.sign, 1);
    EXPECT_EQ(one.mag, 43);
    EXPECT_NEAR(dequantize_log(one, cfg), 1.0057, 5e-4);
}

TEST(LogQuantizer, OddSymmetry) {
    QuantConfig cfg;
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        double c = rng.uniform(-1e3, 1e3);
        auto pos = quantize_log(c, cfg);
        auto neg = quantize_log(-c, cfg);
        EXPECT_EQ(pos.mag, neg.mag);
        EXPECT_EQ(pos.sign, -neg.sign);
        EXPECT_DOUBLE_EQ(dequantize_log(pos, cfg), -dequantize_log(neg, cfg));
    }
}

TEST(LogQuantizer, MonotoneAndRelativeBound) {
    QuantConfig cfg;
    // Midpoint dequantization on the ln(1+|c|) scale guarantees
    // |ln((1+chat)/(1+c))| <= a/(2b), i.e. the shifted value 1+|c| is
    // reconstructed within a relative factor of e^(a/(2b)) - 1. On c itself
    // that bound picks up a (1+|c|)/|c| factor, <= 2 for |c| >= 1.
    const double shifted_bound = std::expm1(cfg.step() / 2.0);
    Rng rng(2);
    double prev_mag = -1.0;
    // Monotone in |c| over an increasing sweep.
    for (double c = 0.01; c < 1e6; c *= 1.37) {
        auto code = quantize_log(c, cfg);
        EXPECT_GE(static_cast<double>(code.mag), prev_mag);
        prev_mag = static_cast<double>(code.mag);
    }
    for (int i = 0; i < 100000; ++i) {
        double c = std::exp(rng.uniform(0.0, std::log(1e6)));
        double back = dequantize_log(quantize_log(c, cfg), cfg);
        ASSERT_LE(std::abs((1.0 + back) - (1.0 + c)) / (1.0 + c), shifted_bound) << "c=" << c;
        ASSERT_LE(std::abs(c - back) / c, shifted_bound * (1.0 + c) / c) << "c=" << c;
    }
}

TEST(Huffman, SingleSymbolAlphabet) {
    std::map<int64_t, uint64_t> counts{{7, 5}};
    auto table = HuffmanTable::from_counts(counts);
    EXPECT_EQ(table.length_of(7), 1);
    auto enc = huffman_encode_stream(std::vector<int64_t>(5, 7));
    // n symbols -> n bits -> 1 byte of payload.
    auto back = huffman_decode_stream(enc.bytes);
    EXPECT_EQ(back, std::vector<int64_t>(5, 7));
}

TEST(Huffman, ThreeSymbolLengths) {
    // counts {A:2, B:1, C:1} -> lengths {1, 2, 2}; 2*1 + 1*2 + 1*2 = 6 bits.
    std::map<int64_t, uint64_t> counts{{0, 2}, {1, 1}, {2, 1}};
    auto table = HuffmanTable::from_counts(counts);
    EXPECT_EQ(table.length_of(0), 1);
    EXPECT_EQ(table.length_of(1), 2);
    EXPECT_EQ(table.length_of(2), 2);
    BitWriter bw;
    std::vector<int64_t> seq{0, 0, 1, 2};
    for (auto s : seq) table.encode_symbol(s, bw);
    EXPECT_EQ(bw.bit_count(), 6u);
}

TEST(Huffman, RoundTripRandomStreams) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int n = static_cast<int>(rng.uniform_int(1, 300));
        int spread = static_cast<int>(rng.uniform_int(1, 40));
        std::vector<int64_t> symbols(n);
        for (auto& s : symbols) s = rng.uniform_int(-spread, spread);
        auto enc = huffman_encode_stream(symbols);
        EXPECT_EQ(huffman_decode_stream(enc.bytes), symbols);
    }
}

TEST(Huffman, DeterministicSerialization) {
    std::map<int64_t, uint64_t> counts{{-3, 4}, {0, 4}, {5, 2}, {6, 2}};
    ByteWriter w1, w2;
    HuffmanTable::from_counts(counts).serialize(w1);
    HuffmanTable::from_counts(counts).serialize(w2);
    EXPECT_EQ(w1.data(), w2.data());
}

TEST(Huffman, TruncatedStreamFails) {
    std::vector<int64_t> symbols(64, 1);
    for (int i = 0; i < 64; i += 2) symbols[i] = 2;
    auto enc = huffman_encode_stream(symbols);
    enc.bytes.resize(enc.bytes.size() - 4);
    EXPECT_THROW(huffman_decode_stream(enc.bytes), std::runtime_error);
}

TEST(Huffman, EncodingUnknownSymbolFails) {
    std::map<int64_t, uint64_t> counts{{1, 1}, {2, 1}};
    auto table = HuffmanTable::from_counts(counts);
    BitWriter bw;
    EXPECT_THROW(table.encode_symbol(3, bw), std::runtime_error);
}

namespace {

// Brute-force optimal prefix-code cost: minimize sum(count * len) over all
// Kraft-feasible length assignments (shorter codes to heavier symbols).
uint64_t optimal_prefix_cost(const std::vector<uint64_t>& counts) {
    std::vector<uint64_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    size_t k = sorted.size();
    if (k == 1) return sorted[0];  // length-1 convention
    std::vector<int> lens(k, 1);
    uint64_t best = UINT64_MAX;
    // Enumerate non-decreasing length vectors with entries in [1, k-1].
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == k) {
            double kraft = 0.0;
            for (int l : lens) kraft += std::pow(2.0, -l);
            if (kraft <= 1.0 + 1e-12) {
                uint64_t cost = 0;
                for (size_t j = 0; j < k; ++j) cost += sorted[j] * lens[j];
                best = std::min(best, cost);
            }
            return;
        }
        int lo = i == 0 ? 1 : lens[i - 1];
        for (int l = lo; l <= static_cast<int>(k) - 1; ++l) {
            lens[i] = l;
            rec(i + 1);
        }
    };
    rec(0);
    return best;
}

}  // namespace

TEST(Huffman, OptimalOnSmallAlphabets) {
    // All count multisets of size <= 4 with counts <= 6 here; the acceptance
    // suite covers the full size <= 6, counts <= 8 sweep.
    for (int k = 1; k <= 4; ++k) {
        std::vector<uint64_t> counts(k, 1);
        std::function<void(int, uint64_t)> rec = [&](int i, uint64_t lo) {
            if (i == k) {
                std::map<int64_t, uint64_t> cm;
                for (int j = 0; j < k; ++j) cm[j] = counts[j];
                auto table = HuffmanTable::from_counts(cm);
                uint64_t cost = 0;
                for (int j = 0; j < k; ++j) cost += counts[j] * table.length_of(j);
                EXPECT_EQ(cost, optimal_prefix_cost(counts));
                return;
            }
            for (uint64_t c = lo; c <= 6; ++c) {
                counts[i] = c;
                rec(i + 1, c);
            }
        };
        rec(0, 1);
    }
}
