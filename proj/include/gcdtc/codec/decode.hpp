#ifndef GCDTC_CODEC_DECODE_HPP
#define GCDTC_CODEC_DECODE_HPP

#include <cmath>
#include <vector>

#include "gcdtc/codec/model.hpp"
#include "gcdtc/codec/schedule.hpp"

namespace gcdtc::codec {

// Deterministic ancestral decoding: every slice starts from x_T = 0 and
// iterates x_{t-1} = (x_t - ((1-a_t)/sqrt(1-abar_t)) eps_hat) / sqrt(a_t)
// for t = T..1 with no stochastic term. The model type must provide
// embed(z) and predict_noise(x_slices, z_e, ts); identical z yields
// bit-identical output.
template <class NoiseModel>
Tensor decode_block_latent(const Tensor& z, const NoiseSchedule& sched, const NoiseModel& model,
                           int block_d, int block_h, int block_w) {
    Tensor z_e = model.embed(z);
    if (z_e.dim(0) != block_d)
        throw std::invalid_argument("embedding first dimension must equal the block depth");
    Tensor x({block_d, 1, block_h, block_w});
    std::vector<int> ts(block_d);
    for (int t = sched.steps; t >= 1; --t) {
        std::fill(ts.begin(), ts.end(), t);
        Tensor eps = model.predict_noise(x, z_e, ts);
        const double a = sched.alpha(t);
        const double ab = sched.alpha_bar(t);
        const double c1 = 1.0 / std::sqrt(a);
        const double c2 = (1.0 - a) / std::sqrt(1.0 - ab);
        for (size_t i = 0; i < x.size(); ++i) x[i] = c1 * (x[i] - c2 * eps[i]);
    }
    // (D, 1, H, W) slices -> (1, D, H, W) block layout.
    Tensor out({1, block_d, block_h, block_w});
    std::copy(x.data(), x.data() + x.size(), out.data());
    return out;
}

inline Tensor decode_block(const GcdModel& model, const Tensor& z) {
    return decode_block_latent(z, model.schedule, model, model.cfg.block_d, model.cfg.block_h,
                               model.cfg.block_w);
}

// Test stub: a model that always predicts zero noise, for which decoding is
// the fixed point x = 0.
struct ZeroNoiseModel {
    int d, h, w, ce;

    Tensor embed(const Tensor&) const { return Tensor({d, ce, h / 4, w / 4}); }
    Tensor predict_noise(const Tensor& x, const Tensor&, const std::vector<int>&) const {
        return Tensor(x.shape());
    }
};

}  // namespace gcdtc::codec

#endif
