#ifndef GCDTC_CODEC_MODEL_HPP
#define GCDTC_CODEC_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "gcdtc/codec/config.hpp"
#include "gcdtc/codec/schedule.hpp"
#include "gcdtc/core/blocks.hpp"
#include "gcdtc/nn/graph.hpp"
#include "gcdtc/nn/init.hpp"
#include "gcdtc/nn/time_embedding.hpp"
#include "gcdtc/util/rng.hpp"

namespace gcdtc::codec {

using nn::Graph;
using nn::ParamTensor;
using nn::Tensor;

// Owns a model's parameters with stable creation order and unique names.
class ParamStore {
  public:
    ParamTensor& create(const std::string& name, std::vector<int> shape) {
        params_.push_back(std::make_unique<ParamTensor>(name, std::move(shape)));
        return *params_.back();
    }

    std::vector<ParamTensor*> all() {
        std::vector<ParamTensor*> v;
        v.reserve(params_.size());
        for (auto& p : params_) v.push_back(p.get());
        return v;
    }

    std::vector<const ParamTensor*> all_const() const {
        std::vector<const ParamTensor*> v;
        v.reserve(params_.size());
        for (auto& p : params_) v.push_back(p.get());
        return v;
    }

    size_t value_count() const {
        size_t n = 0;
        for (auto& p : params_) n += p->value.size();
        return n;
    }

  private:
    std::vector<std::unique_ptr<ParamTensor>> params_;
};

namespace layers {

struct Conv {
    ParamTensor* w = nullptr;
    ParamTensor* b = nullptr;

    // 2-D conv weight (cout, cin, k, k); transposed uses (cin, cout, k, k).
    static Conv conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int k,
                       Rng& rng) {
        Conv c;
        c.w = &ps.create(name + ".w", {cout, cin, k, k});
        c.b = &ps.create(name + ".b", {cout});
        nn::init_fan_in(*c.w, static_cast<size_t>(cin) * k * k, rng);
        return c;
    }

    static Conv tconv2d(ParamStore& ps, const std::string& name, int cin, int cout, int k,
                        Rng& rng) {
        Conv c;
        c.w = &ps.create(name + ".w", {cin, cout, k, k});
        c.b = &ps.create(name + ".b", {cout});
        nn::init_fan_in(*c.w, static_cast<size_t>(cin) * k * k, rng);
        return c;
    }

    static Conv conv3d(ParamStore& ps, const std::string& name, int cin, int cout, int kd, int kh,
                       int kw, Rng& rng) {
        Conv c;
        c.w = &ps.create(name + ".w", {cout, cin, kd, kh, kw});
        c.b = &ps.create(name + ".b", {cout});
        nn::init_fan_in(*c.w, static_cast<size_t>(cin) * kd * kh * kw, rng);
        return c;
    }

    static Conv tconv3d(ParamStore& ps, const std::string& name, int cin, int cout, int kd, int kh,
                        int kw, Rng& rng) {
        Conv c;
        c.w = &ps.create(name + ".w", {cin, cout, kd, kh, kw});
        c.b = &ps.create(name + ".b", {cout});
        nn::init_fan_in(*c.w, static_cast<size_t>(cin) * kd * kh * kw, rng);
        return c;
    }
};

struct Dense {
    ParamTensor* w = nullptr;
    ParamTensor* b = nullptr;

    static Dense make(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
        Dense d;
        d.w = &ps.create(name + ".w", {out, in});
        d.b = &ps.create(name + ".b", {out});
        nn::init_fan_in(*d.w, static_cast<size_t>(in), rng);
        return d;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId x) const {
        return g.dense(x, g.param(*w), g.param(*b));
    }
};

struct GroupNorm {
    ParamTensor* gamma = nullptr;
    ParamTensor* beta = nullptr;
    int groups = 8;

    static GroupNorm make(ParamStore& ps, const std::string& name, int channels, int groups) {
        GroupNorm n;
        n.gamma = &ps.create(name + ".gamma", {channels});
        n.beta = &ps.create(name + ".beta", {channels});
        n.gamma->value.fill(1.0);
        n.groups = groups;
        return n;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId x) const {
        return g.group_norm(x, g.param(*gamma), g.param(*beta), groups);
    }
};

// DDPM-style residual block: GN -> SiLU -> conv, additive time embedding via a
// per-block dense projection, GN -> SiLU -> conv, identity (or 1x1) skip.
struct ResBlock {
    int cin = 0, cout = 0;
    GroupNorm gn1, gn2;
    Conv conv1, conv2, skip;
    Dense emb_proj;

    static ResBlock make(ParamStore& ps, const std::string& name, int cin, int cout, int time_dim,
                         int groups, Rng& rng) {
        ResBlock r;
        r.cin = cin;
        r.cout = cout;
        r.gn1 = GroupNorm::make(ps, name + ".gn1", cin, groups);
        r.conv1 = Conv::conv2d(ps, name + ".conv1", cin, cout, 3, rng);
        r.emb_proj = Dense::make(ps, name + ".emb", time_dim, cout, rng);
        r.gn2 = GroupNorm::make(ps, name + ".gn2", cout, groups);
        r.conv2 = Conv::conv2d(ps, name + ".conv2", cout, cout, 3, rng);
        if (cin != cout) r.skip = Conv::conv2d(ps, name + ".skip", cin, cout, 1, rng);
        return r;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId x, Graph::NodeId emb) const {
        auto h = g.conv2d(g.silu(gn1.forward(g, x)), g.param(*conv1.w), g.param(*conv1.b), 1, 1);
        h = g.bias_rows(h, emb_proj.forward(g, emb));
        h = g.conv2d(g.silu(gn2.forward(g, h)), g.param(*conv2.w), g.param(*conv2.b), 1, 1);
        auto sk = cin == cout ? x : g.conv2d(x, g.param(*skip.w), g.param(*skip.b), 1, 0);
        return g.add(h, sk);
    }
};

}  // namespace layers

// 3D block encoder: three conv3d stages with strides (1,2,2), (2,2,2),
// (2,2,2), mapping a normalized (1, D, H, W) block to z of shape
// (C_z, D/4, H/8, W/8).
struct Encoder3D {
    layers::Conv c1, c2, c3;

    static Encoder3D make(ParamStore& ps, const CodecConfig& cfg, Rng& rng) {
        Encoder3D e;
        e.c1 = layers::Conv::conv3d(ps, "enc.c1", 1, cfg.enc_w1, 3, 4, 4, rng);
        e.c2 = layers::Conv::conv3d(ps, "enc.c2", cfg.enc_w1, cfg.enc_w2, 4, 4, 4, rng);
        e.c3 = layers::Conv::conv3d(ps, "enc.c3", cfg.enc_w2, cfg.latent_channels, 4, 4, 4, rng);
        return e;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId x) const {
        auto h = g.silu(g.conv3d(x, g.param(*c1.w), g.param(*c1.b), {1, 2, 2}, {1, 1, 1}));
        h = g.silu(g.conv3d(h, g.param(*c2.w), g.param(*c2.b), {2, 2, 2}, {1, 1, 1}));
        return g.conv3d(h, g.param(*c3.w), g.param(*c3.b), {2, 2, 2}, {1, 1, 1});
    }
};

// Latent embedder: EU1 (a transposed conv over the temporal axis restoring
// the first dimension to D) followed by per-slice 2-D processing. Output z^e
// has shape (D, C_e, H/4, W/4), so slice i conditions denoising slice i.
struct Embedder {
    layers::Conv eu1, t2d, c2d;

    static Embedder make(ParamStore& ps, const CodecConfig& cfg, Rng& rng) {
        Embedder e;
        e.eu1 = layers::Conv::tconv3d(ps, "emb.eu1", cfg.latent_channels, cfg.embed_hidden, 4, 3, 3,
                                      rng);
        e.t2d = layers::Conv::tconv2d(ps, "emb.up2d", cfg.embed_hidden, cfg.embed_channels, 4, rng);
        e.c2d = layers::Conv::conv2d(ps, "emb.conv2d", cfg.embed_channels, cfg.embed_channels, 3,
                                     rng);
        return e;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId z) const {
        auto h = g.silu(g.tconv3d(z, g.param(*eu1.w), g.param(*eu1.b), {4, 1, 1}, {0, 1, 1}));
        h = g.swap01(h);  // (C, D, h, w) -> (D, C, h, w): temporal axis becomes the batch
        h = g.silu(g.tconv2d(h, g.param(*t2d.w), g.param(*t2d.b), 2, 1));
        return g.conv2d(h, g.param(*c2d.w), g.param(*c2d.b), 1, 1);
    }
};

// Conditional 2-D denoising U-Net. Input is the noisy slice batch (D, 1, H, W)
// concatenated with the nearest-upsampled conditioning slices; two down/up
// levels with residual blocks; the stage embedding enters each residual block
// additively.
struct DenoiseUNet {
    int base = 32;
    layers::Conv stem, down1, down2, up2, up1, out_conv;
    layers::ResBlock rb1, rb2, mid, rbu2, rbu1;
    layers::GroupNorm out_gn;

    static DenoiseUNet make(ParamStore& ps, const CodecConfig& cfg, Rng& rng) {
        DenoiseUNet u;
        const int w0 = cfg.unet_base, w1 = 2 * cfg.unet_base, w2 = 4 * cfg.unet_base;
        const int g0 = cfg.gn_groups;
        u.base = w0;
        u.stem = layers::Conv::conv2d(ps, "unet.stem", 1 + cfg.embed_channels, w0, 3, rng);
        u.rb1 = layers::ResBlock::make(ps, "unet.rb1", w0, w0, cfg.time_dim, g0, rng);
        u.down1 = layers::Conv::conv2d(ps, "unet.down1", w0, w1, 3, rng);
        u.rb2 = layers::ResBlock::make(ps, "unet.rb2", w1, w1, cfg.time_dim, g0, rng);
        u.down2 = layers::Conv::conv2d(ps, "unet.down2", w1, w2, 3, rng);
        u.mid = layers::ResBlock::make(ps, "unet.mid", w2, w2, cfg.time_dim, g0, rng);
        u.up2 = layers::Conv::tconv2d(ps, "unet.up2", w2, w1, 4, rng);
        u.rbu2 = layers::ResBlock::make(ps, "unet.rbu2", 2 * w1, w1, cfg.time_dim, g0, rng);
        u.up1 = layers::Conv::tconv2d(ps, "unet.up1", w1, w0, 4, rng);
        u.rbu1 = layers::ResBlock::make(ps, "unet.rbu1", 2 * w0, w0, cfg.time_dim, g0, rng);
        u.out_gn = layers::GroupNorm::make(ps, "unet.out_gn", w0, g0);
        u.out_conv = layers::Conv::conv2d(ps, "unet.out", w0, 1, 3, rng);
        return u;
    }

    Graph::NodeId forward(Graph& g, Graph::NodeId x_slices, Graph::NodeId cond,
                          Graph::NodeId emb) const {
        auto cu = g.upsample2x_nearest(g.upsample2x_nearest(cond));
        auto in = g.concat_channels(x_slices, cu);
        auto h0 = g.conv2d(in, g.param(*stem.w), g.param(*stem.b), 1, 1);
        auto r1 = rb1.forward(g, h0, emb);
        auto d1 = g.conv2d(r1, g.param(*down1.w), g.param(*down1.b), 2, 1);
        auto r2 = rb2.forward(g, d1, emb);
        auto d2 = g.conv2d(r2, g.param(*down2.w), g.param(*down2.b), 2, 1);
        auto m = mid.forward(g, d2, emb);
        auto u2 = g.tconv2d(m, g.param(*up2.w), g.param(*up2.b), 2, 1);
        auto x2 = rbu2.forward(g, g.concat_channels(u2, r2), emb);
        auto u1 = g.tconv2d(x2, g.param(*up1.w), g.param(*up1.b), 2, 1);
        auto x1 = rbu1.forward(g, g.concat_channels(u1, r1), emb);
        return g.conv2d(g.silu(out_gn.forward(g, x1)), g.param(*out_conv.w), g.param(*out_conv.b),
                        1, 1);
    }
};

// Converts a partitioned block to the encoder input layout (1, D, H, W).
inline Tensor block_to_tensor(const Block3D& blk) {
    Tensor t({1, blk.d, blk.h, blk.w});
    std::copy(blk.values.begin(), blk.values.end(), t.data());
    return t;
}

inline void tensor_to_block(const Tensor& t, Block3D& blk) {
    std::copy(t.data(), t.data() + t.size(), blk.values.begin());
}

// The conditional diffusion codec: encoder + embedder + denoising U-Net and
// the noise schedule, trained end to end.
struct GcdModel {
    CodecConfig cfg;
    ParamStore store;
    Encoder3D enc;
    Embedder emb;
    DenoiseUNet unet;
    NoiseSchedule schedule;

    static GcdModel make(const CodecConfig& cfg, uint64_t seed) {
        cfg.validate();
        GcdModel m;
        m.cfg = cfg;
        Rng rng(seed);
        m.enc = Encoder3D::make(m.store, cfg, rng);
        m.emb = Embedder::make(m.store, cfg, rng);
        m.unet = DenoiseUNet::make(m.store, cfg, rng);
        m.schedule = build_schedule(cfg.steps, cfg.beta_min, cfg.beta_max);
        return m;
    }

    std::vector<ParamTensor*> parameters() { return store.all(); }

    // Deterministic inference helpers (forward-only graphs).
    Tensor encode(const Tensor& block) const {
        Graph g;
        auto z = enc.forward(g, g.input(block));
        return g.value(z);
    }

    Tensor embed(const Tensor& z) const {
        Graph g;
        auto ze = emb.forward(g, g.input(z));
        return g.value(ze);
    }

    Tensor predict_noise(const Tensor& x_slices, const Tensor& z_e,
                         const std::vector<int>& ts) const {
        Graph g;
        auto out = unet.forward(g, g.input(x_slices), g.input(z_e),
                                g.input(nn::time_embedding_batch(ts, cfg.time_dim)));
        return g.value(out);
    }

  private:
    GcdModel() = default;
};

// Convolutional autoencoder baseline: the same encoder, a feedforward decoder
// of transposed 3-D convolutions, trained with plain MSE.
struct GcaeModel {
    CodecConfig cfg;
    ParamStore store;
    Encoder3D enc;
    layers::Conv d1, d2, d3;

    static GcaeModel make(const CodecConfig& cfg, uint64_t seed) {
        cfg.validate();
        GcaeModel m;
        m.cfg = cfg;
        Rng rng(seed);
        m.enc = Encoder3D::make(m.store, cfg, rng);
        m.d1 = layers::Conv::tconv3d(m.store, "dec.d1", cfg.latent_channels, cfg.enc_w2, 4, 4, 4,
                                     rng);
        m.d2 = layers::Conv::tconv3d(m.store, "dec.d2", cfg.enc_w2, cfg.enc_w1, 4, 4, 4, rng);
        m.d3 = layers::Conv::tconv3d(m.store, "dec.d3", cfg.enc_w1, 1, 3, 4, 4, rng);
        return m;
    }

    std::vector<ParamTensor*> parameters() { return store.all(); }

    Graph::NodeId decode_graph(Graph& g, Graph::NodeId z) const {
        auto h = g.silu(g.tconv3d(z, g.param(*d1.w), g.param(*d1.b), {2, 2, 2}, {1, 1, 1}));
        h = g.silu(g.tconv3d(h, g.param(*d2.w), g.param(*d2.b), {2, 2, 2}, {1, 1, 1}));
        return g.tconv3d(h, g.param(*d3.w), g.param(*d3.b), {1, 2, 2}, {1, 1, 1});
    }

    Tensor encode(const Tensor& block) const {
        Graph g;
        auto z = enc.forward(g, g.input(block));
        return g.value(z);
    }

    Tensor reconstruct(const Tensor& z) const {
        Graph g;
        auto out = decode_graph(g, g.input(z));
        return g.value(out);
    }

  private:
    GcaeModel() = default;
};

}  // namespace gcdtc::codec

#endif
