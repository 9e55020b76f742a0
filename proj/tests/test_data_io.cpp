#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "gcdtc/io/raw.hpp"
#include "gcdtc/io/synthetic.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::io;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

TensorField random_field(int member, int t, int h, int w, uint64_t seed) {
    Rng rng(seed);
    TensorField f = make_field(member, t, h, w);
    for (double& v : f.values) v = rng.uniform(-100.0, 100.0);
    f.compute_value_range();
    return f;
}

}  // namespace

TEST(RawIo, RoundTripF64) {
    auto path = tmp_path("gcdtc_roundtrip.gsd");
    std::vector<TensorField> fields = {random_field(0, 4, 5, 6, 1), random_field(1, 2, 3, 4, 2)};
    write_raw(fields, path, RawDtype::f64);
    auto back = read_raw(path);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].values, fields[0].values);
    EXPECT_EQ(back[1].values, fields[1].values);
    EXPECT_EQ(back[1].t_len, 2);
    EXPECT_EQ(back[1].height, 3);
    EXPECT_EQ(back[1].width, 4);
    std::remove(path.c_str());
}

TEST(RawIo, F32SourceReadAsF64) {
    auto path = tmp_path("gcdtc_f32.gsd");
    auto f = random_field(0, 3, 4, 5, 3);
    write_raw({f}, path, RawDtype::f32);
    auto back = read_raw(path);
    ASSERT_EQ(back.size(), 1u);
    for (size_t i = 0; i < f.values.size(); ++i)
        EXPECT_EQ(back[0].values[i], static_cast<double>(static_cast<float>(f.values[i])));
    std::remove(path.c_str());
}

TEST(RawIo, PayloadByteCount) {
    auto path = tmp_path("gcdtc_count.gsd");
    auto f = random_field(0, 16, 64, 64, 4);
    size_t n = write_raw({f}, path, RawDtype::f64);
    // 16*64*64*8 payload plus 4+1+4+12 header.
    EXPECT_EQ(n, 524288u + 21u);
    std::remove(path.c_str());
}

TEST(RawIo, EmptyMemberList) {
    auto path = tmp_path("gcdtc_empty.gsd");
    write_raw({}, path);
    auto back = read_raw(path);
    EXPECT_TRUE(back.empty());
    std::remove(path.c_str());
}

TEST(RawIo, TruncatedPayloadFails) {
    auto path = tmp_path("gcdtc_trunc.gsd");
    auto f = random_field(0, 4, 4, 4, 5);
    write_raw({f}, path);
    auto bytes = read_file_bytes(path);
    bytes.resize(bytes.size() - 16);
    write_file_bytes(path, bytes);
    try {
        read_raw(path);
        FAIL() << "expected throw";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("truncated payload"), std::string::npos);
    }
    std::remove(path.c_str());
}

TEST(RawIo, BadMagicFails) {
    auto path = tmp_path("gcdtc_magic.gsd");
    write_file_bytes(path, {'X', 'X', 'X', 'X', 0, 0, 0, 0, 0});
    EXPECT_THROW(read_raw(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST(Synthetic, EmptyConfigIsZeroField) {
    SynthConfig cfg;
    cfg.bump_count = 0;
    cfg.noise_amp = 0.0;
    auto f = generate_synthetic(cfg);
    for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Synthetic, DeterministicUnderSeed) {
    SynthConfig cfg;
    cfg.seed = 42;
    auto a = generate_synthetic(cfg);
    auto b = generate_synthetic(cfg);
    EXPECT_EQ(a.values, b.values);
}

TEST(Synthetic, ZeroDriftKeepsArgmaxFixed) {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.bump_count = 1;
    cfg.drift_min = cfg.drift_max = 0.0;
    cfg.noise_amp = 0.0;
    auto f = generate_synthetic(cfg);
    size_t plane = static_cast<size_t>(f.height) * f.width;
    size_t ref = 0;
    for (int t = 0; t < f.t_len; ++t) {
        auto begin = f.values.begin() + t * plane;
        size_t arg = static_cast<size_t>(std::max_element(begin, begin + plane) - begin);
        if (t == 0)
            ref = arg;
        else
            EXPECT_EQ(arg, ref) << "frame " << t;
    }
}

// Lag-1 temporal autocorrelation across random sites; the generator must
// produce strongly correlated frames for the 3D-block premise to hold.
TEST(Synthetic, TemporalAutocorrelation) {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.t_len = 24;
    auto f = generate_synthetic(cfg);
    Rng rng(99);
    // Per-site-centered Pearson correlation of consecutive samples, pooled
    // over random sites.
    double num = 0.0, den_a = 0.0, den_b = 0.0;
    for (int site = 0; site < 200; ++site) {
        int y = static_cast<int>(rng.uniform_int(0, f.height - 1));
        int x = static_cast<int>(rng.uniform_int(0, f.width - 1));
        double mean = 0.0;
        for (int t = 0; t < f.t_len; ++t) mean += f.at(t, y, x);
        mean /= f.t_len;
        for (int t = 0; t + 1 < f.t_len; ++t) {
            double a = f.at(t, y, x) - mean;
            double b = f.at(t + 1, y, x) - mean;
            num += a * b;
            den_a += a * a;
            den_b += b * b;
        }
    }
    EXPECT_GE(num / std::sqrt(den_a * den_b), 0.9);
}
