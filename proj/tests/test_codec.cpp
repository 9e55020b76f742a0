#include <gtest/gtest.h>

#include <numeric>

#include "gcdtc/codec/decode.hpp"
#include "gcdtc/codec/model.hpp"
#include "gcdtc/codec/train.hpp"
#include "gcdtc/io/synthetic.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::codec;

namespace {

// Small configuration keeping unit tests fast; the acceptance suite runs the
// desk preset.
CodecConfig tiny_config(int steps = 20) {
    CodecConfig c = CodecConfig::desk_preset();
    c.steps = steps;
    c.latent_channels = 4;
    c.embed_channels = 8;
    c.enc_w1 = 8;
    c.enc_w2 = 8;
    c.embed_hidden = 8;
    c.unet_base = 8;
    return c;
}

std::vector<Tensor> synthetic_blocks(const CodecConfig& cfg, int count, uint64_t seed) {
    io::SynthConfig sc;
    sc.seed = seed;
    sc.t_len = cfg.block_d * std::max(1, count / 4);
    sc.height = cfg.block_h * 2;
    sc.width = cfg.block_w * 2;
    sc.bump_count = 6;
    auto field = io::generate_synthetic(sc);
    auto norm = normalize(field, norm_stats_of(field));
    auto [blocks, grid] = partition(norm, cfg.block_d, cfg.block_h, cfg.block_w);
    std::vector<Tensor> out;
    for (int i = 0; i < count && i < static_cast<int>(blocks.size()); ++i)
        out.push_back(block_to_tensor(blocks[i]));
    return out;
}

double mse_of(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

}  // namespace

TEST(Encoder, LatentShapeDefaults) {
    // 16x64x64 block with default widths: z has 8 * 4 * 8 * 8 = 2048 values.
    CodecConfig cfg;  // paper-scale defaults
    cfg.steps = 10;   // schedule size irrelevant here
    auto model = GcdModel::make(cfg, 0);
    Tensor block({1, 16, 64, 64});
    auto z = model.encode(block);
    EXPECT_EQ(z.shape(), (std::vector<int>{8, 4, 8, 8}));
    EXPECT_EQ(z.size(), 2048u);
    EXPECT_EQ(cfg.latent_size(), 2048u);

    auto ze = model.embed(z);
    EXPECT_EQ(ze.dim(0), 16);  // first dimension equals D
    EXPECT_EQ(ze.shape(), (std::vector<int>{16, 32, 16, 16}));
}

TEST(Encoder, DeterministicOnIdenticalBlocks) {
    auto cfg = tiny_config();
    auto model = GcdModel::make(cfg, 3);
    auto blocks = synthetic_blocks(cfg, 1, 5);
    auto z1 = model.encode(blocks[0]);
    auto z2 = model.encode(blocks[0]);
    EXPECT_EQ(z1.values(), z2.values());
}

TEST(Decode, ZeroPredictorFixedPointIsZero) {
    auto sched = build_schedule(50, 1e-5, 5e-3);
    ZeroNoiseModel zero{8, 16, 16, 8};
    Tensor z({4, 2, 2, 2});
    auto out = decode_block_latent(z, sched, zero, 8, 16, 16);
    for (size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], 0.0);
}

TEST(Decode, BitIdenticalAcrossRuns) {
    auto cfg = tiny_config(10);
    auto model = GcdModel::make(cfg, 7);
    auto blocks = synthetic_blocks(cfg, 1, 9);
    auto z = model.encode(blocks[0]);
    auto a = decode_block(model, z);
    auto b = decode_block(model, z);
    EXPECT_EQ(a.values(), b.values());
}

TEST(Train, DeterministicLossWithFrozenLearning) {
    auto cfg = tiny_config(10);
    cfg.lr = 0.0;
    auto blocks = synthetic_blocks(cfg, 4, 11);

    auto run = [&](uint64_t seed) {
        auto model = GcdModel::make(cfg, seed);
        auto params = model.parameters();
        auto adam = nn::AdamState::init(params, cfg.lr);
        Rng rng(99);
        std::vector<double> losses;
        for (int i = 0; i < 3; ++i) losses.push_back(gcd_train_step(model, blocks, adam, rng));
        return losses;
    };
    EXPECT_EQ(run(7), run(7));
}

TEST(Train, UntrainedZeroModelLossNearUnit) {
    // With eps_hat == 0 the loss is E||eps||^2 / count ~ 1 for unit normals.
    auto cfg = tiny_config(10);
    auto model = GcdModel::make(cfg, 1);
    // Zero the U-Net output head so the predictor is exactly zero.
    model.unet.out_conv.w->value.fill(0.0);
    model.unet.out_conv.b->value.fill(0.0);
    auto blocks = synthetic_blocks(cfg, 2, 13);
    Rng rng(5);
    double loss = gcd_loss_and_grads(model, blocks, rng);
    EXPECT_NEAR(loss, 1.0, 0.15);
}

TEST(Train, EndToEndGradientFlow) {
    auto cfg = tiny_config(10);
    auto model = GcdModel::make(cfg, 21);
    auto blocks = synthetic_blocks(cfg, 2, 17);
    Rng rng(3);
    gcd_loss_and_grads(model, blocks, rng);
    auto grad_norm = [](const ParamTensor& p) {
        double acc = 0.0;
        for (size_t i = 0; i < p.grad.size(); ++i) acc += p.grad[i] * p.grad[i];
        return acc;
    };
    EXPECT_GT(grad_norm(*model.enc.c1.w), 0.0);
    EXPECT_GT(grad_norm(*model.emb.eu1.w), 0.0);
    EXPECT_GT(grad_norm(*model.unet.stem.w), 0.0);
    EXPECT_GT(grad_norm(*model.unet.out_conv.w), 0.0);
}

TEST(Train, LossDecreasesOnTinySet) {
    auto cfg = tiny_config(40);
    auto model = GcdModel::make(cfg, 0);
    auto blocks = synthetic_blocks(cfg, 8, 19);
    auto params = model.parameters();
    auto adam = nn::AdamState::init(params, cfg.lr);
    Rng rng(0);
    std::vector<double> losses;
    for (int i = 0; i < 80; ++i) losses.push_back(gcd_train_step(model, blocks, adam, rng));
    double head = std::accumulate(losses.begin(), losses.begin() + 20, 0.0) / 20.0;
    double tail = std::accumulate(losses.end() - 20, losses.end(), 0.0) / 20.0;
    EXPECT_LT(tail, head);
}

TEST(Gcae, LatentMatchesDiffusionCodec) {
    auto cfg = tiny_config();
    auto gcd = GcdModel::make(cfg, 1);
    auto gcae = GcaeModel::make(cfg, 1);
    auto blocks = synthetic_blocks(cfg, 1, 23);
    auto za = gcd.encode(blocks[0]);
    auto zb = gcae.encode(blocks[0]);
    EXPECT_EQ(za.shape(), zb.shape());
}

TEST(Gcae, DeterministicReconstruction) {
    auto cfg = tiny_config();
    auto model = GcaeModel::make(cfg, 2);
    auto blocks = synthetic_blocks(cfg, 1, 29);
    auto z = model.encode(blocks[0]);
    auto r1 = model.reconstruct(z);
    EXPECT_EQ(r1.shape(), blocks[0].shape());
    auto r2 = model.reconstruct(z);
    EXPECT_EQ(r1.values(), r2.values());
}

TEST(Gcae, LearnsConstantBlocks) {
    auto cfg = tiny_config();
    cfg.train_batch = 1;
    auto model = GcaeModel::make(cfg, 4);
    Tensor constant({1, cfg.block_d, cfg.block_h, cfg.block_w});
    constant.fill(0.3);
    std::vector<Tensor> blocks{constant};
    auto params = model.parameters();
    auto adam = nn::AdamState::init(params, 1e-2);
    Rng rng(1);
    double first = gcae_train_step(model, blocks, adam, rng);
    double last = 0.0;
    for (int i = 0; i < 499; ++i) last = gcae_train_step(model, blocks, adam, rng);
    EXPECT_LT(last, first);
    EXPECT_LT(last, 1e-3);
}
