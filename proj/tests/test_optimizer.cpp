#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "gcdtc/nn/adam.hpp"
#include "gcdtc/nn/checkpoint.hpp"
#include "gcdtc/nn/graph.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::nn;

namespace {
std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    ParamTensor p("w", {4});
    for (int i = 0; i < 4; ++i) p.value[i] = i + 1.0;
    auto params = std::vector<ParamTensor*>{&p};
    auto state = AdamState::init(params);
    adam_step(params, state);
    EXPECT_EQ(state.step, 1);
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p.value[i], i + 1.0);
}

TEST(Adam, FirstStepMagnitudeIsLr) {
    // With constant gradient g, bias-corrected mhat/sqrt(vhat) = sign(g), so
    // the first update moves by ~lr.
    ParamTensor p("w", {1});
    p.value[0] = 0.0;
    p.grad[0] = 3.7;
    auto params = std::vector<ParamTensor*>{&p};
    auto state = AdamState::init(params, 1e-3);
    adam_step(params, state);
    EXPECT_NEAR(p.value[0], -1e-3, 1e-8);
    EXPECT_EQ(p.grad[0], 0.0);  // gradients zeroed after the step
}

TEST(Adam, DescendsQuadraticBowl) {
    ParamTensor p("w", {1});
    p.value[0] = 1.0;
    auto params = std::vector<ParamTensor*>{&p};
    auto state = AdamState::init(params, 1e-2);
    for (int i = 0; i < 200; ++i) {
        p.grad[0] = 2.0 * p.value[0];  // d/dw of w^2
        adam_step(params, state);
    }
    EXPECT_LT(std::abs(p.value[0]), 0.1);
}

TEST(Adam, NanGradientNamesParameter) {
    ParamTensor p("enc.w1", {1});
    p.grad[0] = std::nan("");
    auto params = std::vector<ParamTensor*>{&p};
    auto state = AdamState::init(params);
    try {
        adam_step(params, state);
        FAIL() << "expected throw";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("enc.w1"), std::string::npos);
    }
}

TEST(Checkpoint, BitExactRoundTrip) {
    Rng rng(5);
    ParamTensor a("alpha", {2, 3});
    ParamTensor b("beta", {4});
    for (size_t i = 0; i < a.value.size(); ++i) a.value[i] = rng.gaussian();
    for (size_t i = 0; i < b.value.size(); ++i) b.value[i] = rng.gaussian();

    auto path = tmp_path("gcdtc_ckpt.gckp");
    save_checkpoint({&a, &b}, path);

    ParamTensor a2("alpha", {2, 3});
    ParamTensor b2("beta", {4});
    load_checkpoint(path, {&a2, &b2});
    EXPECT_EQ(a2.value.values(), a.value.values());
    EXPECT_EQ(b2.value.values(), b.value.values());
    std::remove(path.c_str());
}

TEST(Checkpoint, TamperedByteFailsCrc) {
    ParamTensor a("w", {8});
    auto path = tmp_path("gcdtc_tamper.gckp");
    save_checkpoint({&a}, path);
    auto bytes = io::read_file_bytes(path);
    bytes[bytes.size() / 2] ^= 0x01;
    io::write_file_bytes(path, bytes);
    ParamTensor a2("w", {8});
    EXPECT_THROW(load_checkpoint(path, {&a2}), std::runtime_error);
    std::remove(path.c_str());
}

TEST(Checkpoint, ByteSizeMatchesLayout) {
    // 1000 f64 values: 4 magic + 2 version + 4 count + (2 + 4 name) + 1 rank
    // + 4 dim + 8000 payload + 4 crc.
    ParamTensor a("wide", {1000});
    auto bytes = serialize_checkpoint({&a});
    EXPECT_EQ(bytes.size(), 4u + 2u + 4u + (2u + 4u) + 1u + 4u + 8000u + 4u);
}

TEST(Checkpoint, DeterministicByteLayoutSortedByName) {
    ParamTensor a("a", {2});
    ParamTensor b("b", {2});
    auto bytes1 = serialize_checkpoint({&a, &b});
    auto bytes2 = serialize_checkpoint({&b, &a});
    EXPECT_EQ(bytes1, bytes2);
}
