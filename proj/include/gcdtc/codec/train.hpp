#ifndef GCDTC_CODEC_TRAIN_HPP
#define GCDTC_CODEC_TRAIN_HPP

#include <stdexcept>
#include <vector>

#include "gcdtc/codec/model.hpp"
#include "gcdtc/codec/schedule.hpp"
#include "gcdtc/nn/adam.hpp"
#include "gcdtc/nn/time_embedding.hpp"
#include "gcdtc/util/rng.hpp"

namespace gcdtc::codec {

// One end-to-end training step of the conditional diffusion model on a
// minibatch of normalized blocks. Per block: encode -> embed; per 2-D slice
// draw a uniform stage t and unit-normal noise; the loss is the mean squared
// noise-prediction error over all slices of the batch. A single backward pass
// updates encoder, embedder, and U-Net jointly.
inline double gcd_loss_and_grads(GcdModel& model, const std::vector<Tensor>& blocks, Rng& rng) {
    if (blocks.empty()) throw std::invalid_argument("empty training set");
    const CodecConfig& cfg = model.cfg;
    const NoiseSchedule& sched = model.schedule;
    const int batch = std::min<int>(cfg.train_batch, static_cast<int>(blocks.size()));

    Graph g;
    Graph::NodeId total = -1;
    for (int bi = 0; bi < batch; ++bi) {
        const Tensor& x0 = blocks[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(blocks.size()) - 1))];
        const int D = x0.dim(1), H = x0.dim(2), W = x0.dim(3);

        auto z = model.enc.forward(g, g.input(x0));
        auto ze = model.emb.forward(g, z);

        // Per-slice draws: stage index first, then the noise samples.
        std::vector<int> ts(D);
        Tensor eps({D, 1, H, W});
        Tensor xt({D, 1, H, W});
        for (int d = 0; d < D; ++d) {
            ts[d] = static_cast<int>(rng.uniform_int(1, sched.steps));
            const double ab = sched.alpha_bar(ts[d]);
            const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
            const double* x0s = x0.data() + static_cast<size_t>(d) * H * W;
            double* es = eps.data() + static_cast<size_t>(d) * H * W;
            double* xs = xt.data() + static_cast<size_t>(d) * H * W;
            for (int i = 0; i < H * W; ++i) {
                es[i] = rng.gaussian();
                xs[i] = cs * x0s[i] + cn * es[i];
            }
        }

        auto emb_t = g.input(nn::time_embedding_batch(ts, cfg.time_dim));
        auto eps_hat = model.unet.forward(g, g.input(std::move(xt)), ze, emb_t);
        auto loss_b = g.mse(eps_hat, g.input(std::move(eps)));
        total = bi == 0 ? loss_b : g.add(total, loss_b);
    }
    auto loss = batch > 1 ? g.scale(total, 1.0 / batch) : total;
    const double loss_value = g.value(loss)[0];
    if (!std::isfinite(loss_value)) throw std::runtime_error("training loss is not finite");
    g.backward(loss);
    return loss_value;
}

inline double gcd_train_step(GcdModel& model, const std::vector<Tensor>& blocks,
                             nn::AdamState& adam, Rng& rng) {
    double loss = gcd_loss_and_grads(model, blocks, rng);
    auto params = model.parameters();
    nn::adam_step(params, adam);
    return loss;
}

// Autoencoder baseline step: reconstruct the block from its latent, MSE loss.
inline double gcae_train_step(GcaeModel& model, const std::vector<Tensor>& blocks,
                              nn::AdamState& adam, Rng& rng) {
    if (blocks.empty()) throw std::invalid_argument("empty training set");
    const int batch = std::min<int>(model.cfg.train_batch, static_cast<int>(blocks.size()));

    Graph g;
    Graph::NodeId total = -1;
    for (int bi = 0; bi < batch; ++bi) {
        const Tensor& x0 = blocks[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(blocks.size()) - 1))];
        auto xin = g.input(x0);
        auto z = model.enc.forward(g, xin);
        auto recon = model.decode_graph(g, z);
        auto loss_b = g.mse(recon, xin);
        total = bi == 0 ? loss_b : g.add(total, loss_b);
    }
    auto loss = batch > 1 ? g.scale(total, 1.0 / batch) : total;
    const double loss_value = g.value(loss)[0];
    if (!std::isfinite(loss_value)) throw std::runtime_error("training loss is not finite");
    g.backward(loss);
    auto params = model.parameters();
    nn::adam_step(params, adam);
    return loss_value;
}

}  // namespace gcdtc::codec

#endif
