#ifndef GCDTC_PIPELINE_METRICS_HPP
#define GCDTC_PIPELINE_METRICS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcdtc/core/blocks.hpp"
#include "gcdtc/core/field.hpp"

namespace gcdtc::pipeline {

// RMSE divided by the original field's data range.
inline double nrmse(const TensorField& original, const TensorField& reconstructed) {
    if (original.t_len != reconstructed.t_len || original.height != reconstructed.height ||
        original.width != reconstructed.width)
        throw std::invalid_argument("field shape mismatch");
    double range = original.vmax - original.vmin;
    if (!(range > 0.0)) throw std::invalid_argument("degenerate data range");
    double acc = 0.0;
    for (size_t i = 0; i < original.values.size(); ++i) {
        double d = original.values[i] - reconstructed.values[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(original.values.size())) / range;
}

// Dataset-level NRMSE: pooled RMSE over all members divided by the pooled
// original range.
inline double nrmse(const std::vector<TensorField>& original,
                    const std::vector<TensorField>& reconstructed) {
    if (original.size() != reconstructed.size() || original.empty())
        throw std::invalid_argument("field list mismatch");
    double lo = original[0].vmin, hi = original[0].vmax;
    double acc = 0.0;
    size_t count = 0;
    for (size_t m = 0; m < original.size(); ++m) {
        lo = std::min(lo, original[m].vmin);
        hi = std::max(hi, original[m].vmax);
        if (original[m].values.size() != reconstructed[m].values.size())
            throw std::invalid_argument("field shape mismatch");
        for (size_t i = 0; i < original[m].values.size(); ++i) {
            double d = original[m].values[i] - reconstructed[m].values[i];
            acc += d * d;
        }
        count += original[m].values.size();
    }
    if (!(hi > lo)) throw std::invalid_argument("degenerate data range");
    return std::sqrt(acc / static_cast<double>(count)) / (hi - lo);
}

// Max l2 error over guarantee blocks, measured on real (in-field) samples so
// boundary tiles are clipped rather than padded.
inline double max_block_error(const TensorField& original, const TensorField& reconstructed,
                              int gd, int gh, int gw) {
    if (original.t_len != reconstructed.t_len || original.height != reconstructed.height ||
        original.width != reconstructed.width)
        throw std::invalid_argument("field shape mismatch");
    double worst = 0.0;
    for (int t0 = 0; t0 < original.t_len; t0 += gd) {
        for (int y0 = 0; y0 < original.height; y0 += gh) {
            for (int x0 = 0; x0 < original.width; x0 += gw) {
                double acc = 0.0;
                for (int t = t0; t < std::min(t0 + gd, original.t_len); ++t)
                    for (int y = y0; y < std::min(y0 + gh, original.height); ++y)
                        for (int x = x0; x < std::min(x0 + gw, original.width); ++x) {
                            double d = original.at(t, y, x) - reconstructed.at(t, y, x);
                            acc += d * d;
                        }
                worst = std::max(worst, std::sqrt(acc));
            }
        }
    }
    return worst;
}

inline size_t raw_field_bytes(const std::vector<TensorField>& fields, size_t sample_width = 8) {
    size_t n = 0;
    for (const auto& f : fields) n += f.values.size() * sample_width;
    return n;
}

inline double compression_ratio(size_t original_bytes, size_t compressed_bytes) {
    if (compressed_bytes == 0) throw std::invalid_argument("empty archive");
    return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

}  // namespace gcdtc::pipeline

#endif
