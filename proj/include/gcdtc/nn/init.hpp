#ifndef GCDTC_NN_INIT_HPP
#define GCDTC_NN_INIT_HPP

#include <cmath>
#include <numeric>

#include "gcdtc/nn/tensor.hpp"
#include "gcdtc/util/rng.hpp"

namespace gcdtc::nn {

// Truncated-normal draws (redraw outside 2 sigma), std = 1/sqrt(fan_in).
inline void init_truncated_normal(Tensor& t, double stddev, Rng& rng) {
    for (size_t i = 0; i < t.size(); ++i) {
        double z;
        do {
            z = rng.gaussian();
        } while (std::abs(z) > 2.0);
        t[i] = stddev * z;
    }
}

inline void init_fan_in(ParamTensor& p, size_t fan_in, Rng& rng) {
    init_truncated_normal(p.value, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace gcdtc::nn

#endif
