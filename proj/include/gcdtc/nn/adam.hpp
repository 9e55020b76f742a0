#ifndef GCDTC_NN_ADAM_HPP
#define GCDTC_NN_ADAM_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcdtc/nn/tensor.hpp"

namespace gcdtc::nn {

// Adam with bias correction. beta1/beta2/eps are the optimizer's canonical
// defaults; only the learning rate is configurable from the outside.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step = 0;
    std::vector<Tensor> m;  // first moments, parallel to the param list
    std::vector<Tensor> v;  // second moments

    static AdamState init(const std::vector<ParamTensor*>& params, double lr = 1e-3) {
        AdamState s;
        s.lr = lr;
        s.m.reserve(params.size());
        s.v.reserve(params.size());
        for (const ParamTensor* p : params) {
            s.m.emplace_back(p->value.shape());
            s.v.emplace_back(p->value.shape());
        }
        return s;
    }
};

// One update over the full parameter list; gradients are zeroed afterwards.
inline void adam_step(const std::vector<ParamTensor*>& params, AdamState& state) {
    if (params.size() != state.m.size())
        throw std::invalid_argument("adam state does not match parameter list");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        ParamTensor& p = *params[i];
        if (!p.grad.all_finite())
            throw std::runtime_error("non-finite gradient in parameter '" + p.name + "'");
        if (!p.trainable) {
            p.zero_grad();
            continue;
        }
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p.value[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        p.zero_grad();
    }
}

}  // namespace gcdtc::nn

#endif
