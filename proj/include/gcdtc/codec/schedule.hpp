#ifndef GCDTC_CODEC_SCHEDULE_HPP
#define GCDTC_CODEC_SCHEDULE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcdtc/nn/tensor.hpp"

namespace gcdtc::codec {

// Linear noise schedule: beta_t interpolates [beta_min, beta_max] over
// t = 1..T, alpha_t = 1 - beta_t, alpha_bar_t is their running product.
struct NoiseSchedule {
    int steps = 0;
    std::vector<double> betas;       // index 0 <-> t = 1
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    double beta(int t) const { return betas[check(t)]; }
    double alpha(int t) const { return alphas[check(t)]; }
    double alpha_bar(int t) const { return alpha_bars[check(t)]; }

  private:
    size_t check(int t) const {
        if (t < 1 || t > steps) throw std::out_of_range("diffusion step out of range");
        return static_cast<size_t>(t - 1);
    }
};

inline NoiseSchedule build_schedule(int steps = 1000, double beta_min = 1e-5,
                                    double beta_max = 5e-3) {
    if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
    if (!(0.0 < beta_min && beta_min < beta_max && beta_max < 1.0))
        throw std::invalid_argument("schedule requires 0 < beta_min < beta_max < 1");
    NoiseSchedule s;
    s.steps = steps;
    s.betas.resize(steps);
    s.alphas.resize(steps);
    s.alpha_bars.resize(steps);
    double prod = 1.0;
    for (int t = 1; t <= steps; ++t) {
        double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        double beta = beta_min + frac * (beta_max - beta_min);
        s.betas[t - 1] = beta;
        s.alphas[t - 1] = 1.0 - beta;
        prod *= 1.0 - beta;
        s.alpha_bars[t - 1] = prod;
    }
    return s;
}

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) epsilon
inline nn::Tensor forward_sample(const nn::Tensor& x0, int t, const nn::Tensor& epsilon,
                                 const NoiseSchedule& schedule) {
    if (!x0.same_shape(epsilon))
        throw std::invalid_argument("noise shape must match the sample shape");
    double ab = schedule.alpha_bar(t);
    double cs = std::sqrt(ab);
    double cn = std::sqrt(1.0 - ab);
    nn::Tensor out = x0;
    for (size_t i = 0; i < out.size(); ++i) out[i] = cs * x0[i] + cn * epsilon[i];
    return out;
}

}  // namespace gcdtc::codec

#endif
