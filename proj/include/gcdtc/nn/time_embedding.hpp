#ifndef GCDTC_NN_TIME_EMBEDDING_HPP
#define GCDTC_NN_TIME_EMBEDDING_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcdtc/nn/tensor.hpp"

namespace gcdtc::nn {

// Sinusoidal embedding of a diffusion stage index:
// entry 2k = sin(t / 10000^(2k/dim)), entry 2k+1 = cos(same).
inline std::vector<double> sinusoidal_time_embedding(int t, int dim) {
    if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("embedding dim must a positive even number");
    std::vector<double> e(dim);
    for (int k = 0; k < dim / 2; ++k) {
        double freq = std::pow(10000.0, -2.0 * k / static_cast<double>(dim));
        e[2 * k] = std::sin(t * freq);
        e[2 * k + 1] = std::cos(t * freq);
    }
    return e;
}

// Embeddings for a batch of stage indices, as a (N, dim) tensor.
inline Tensor time_embedding_batch(const std::vector<int>& ts, int dim) {
    Tensor out({static_cast<int>(ts.size()), dim});
    for (size_t n = 0; n < ts.size(); ++n) {
        auto e = sinusoidal_time_embedding(ts[n], dim);
        std::copy(e.begin(), e.end(), out.data() + n * static_cast<size_t>(dim));
    }
    return out;
}

}  // namespace gcdtc::nn

#endif
