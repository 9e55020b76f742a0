#ifndef GCDTC_IO_SYNTHETIC_HPP
#define GCDTC_IO_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gcdtc/core/field.hpp"
#include "gcdtc/util/rng.hpp"

namespace gcdtc::io {

// Spatiotemporally-correlated synthetic data: a sum of Gaussian bumps whose
// centers drift linearly over time, plus low-pass-filtered noise. Serves as a
// stand-in for structured simulation output.
struct SynthConfig {
    uint64_t seed = 0;
    int t_len = 16, height = 32, width = 32;
    int bump_count = 4;
    double amp_min = 20.0, amp_max = 60.0;
    double width_min = 3.0, width_max = 7.0;
    double drift_min = -0.3, drift_max = 0.3;  // samples per frame
    double noise_amp = 0.5;
    double noise_sigma = 2.0;  // Gaussian low-pass stddev, in samples

    void validate() const {
        if (t_len <= 0 || height <= 0 || width <= 0)
            throw std::invalid_argument("synthetic shape must be positive");
        if (bump_count < 0) throw std::invalid_argument("bump count must be >= 0");
        if (amp_max < amp_min || width_max < width_min || drift_max < drift_min)
            throw std::invalid_argument("synthetic parameter range is empty");
        if (width_min <= 0.0) throw std::invalid_argument("bump width must be positive");
        if (noise_amp < 0.0 || noise_sigma <= 0.0)
            throw std::invalid_argument("noise parameters out of range");
    }
};

namespace detail {

// Separable Gaussian smoothing along one axis with edge-clamped sampling.
inline void smooth_axis(std::vector<double>& v, int n0, int n1, int n2, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    // v is indexed (a, b, c) row-major with the smoothing axis at position 1.
    std::vector<double> line(n1);
    for (int a = 0; a < n0; ++a) {
        for (int c = 0; c < n2; ++c) {
            for (int b = 0; b < n1; ++b)
                line[b] = v[(static_cast<size_t>(a) * n1 + b) * n2 + c];
            for (int b = 0; b < n1; ++b) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    int src = std::clamp(b + i, 0, n1 - 1);
                    acc += kernel[i + radius] * line[src];
                }
                v[(static_cast<size_t>(a) * n1 + b) * n2 + c] = acc;
            }
        }
    }
}

}  // namespace detail

inline TensorField generate_synthetic(const SynthConfig& cfg, int member_id = 0) {
    cfg.validate();
    Rng rng(cfg.seed);

    struct Bump {
        double amp, sigma, cy, cx, vy, vx;
    };
    std::vector<Bump> bumps(cfg.bump_count);
    for (auto& b : bumps) {
        b.amp = rng.uniform(cfg.amp_min, cfg.amp_max);
        b.sigma = rng.uniform(cfg.width_min, cfg.width_max);
        b.cy = rng.uniform(0.0, static_cast<double>(cfg.height));
        b.cx = rng.uniform(0.0, static_cast<double>(cfg.width));
        b.vy = rng.uniform(cfg.drift_min, cfg.drift_max);
        b.vx = rng.uniform(cfg.drift_min, cfg.drift_max);
    }

    TensorField f = make_field(member_id, cfg.t_len, cfg.height, cfg.width);
    for (int t = 0; t < cfg.t_len; ++t) {
        for (const Bump& b : bumps) {
            double cy = b.cy + b.vy * t;
            double cx = b.cx + b.vx * t;
            double inv2s2 = 1.0 / (2.0 * b.sigma * b.sigma);
            for (int y = 0; y < cfg.height; ++y) {
                double dy2 = (y - cy) * (y - cy);
                for (int x = 0; x < cfg.width; ++x) {
                    double dx2 = (x - cx) * (x - cx);
                    f.at(t, y, x) += b.amp * std::exp(-(dy2 + dx2) * inv2s2);
                }
            }
        }
    }

    if (cfg.noise_amp > 0.0) {
        std::vector<double> noise(f.size());
        for (double& v : noise) v = rng.gaussian();
        // Low-pass along t, y, x so the noise shares the field's smoothness.
        detail::smooth_axis(noise, 1, cfg.t_len, cfg.height * cfg.width, cfg.noise_sigma);
        detail::smooth_axis(noise, cfg.t_len, cfg.height, cfg.width, cfg.noise_sigma);
        std::vector<double> tmp = noise;  // x-axis pass needs (t*y, x, 1) layout
        detail::smooth_axis(tmp, cfg.t_len * cfg.height, cfg.width, 1, cfg.noise_sigma);
        for (size_t i = 0; i < noise.size(); ++i) f.values[i] += cfg.noise_amp * tmp[i];
    }

    f.compute_value_range();
    return f;
}

}  // namespace gcdtc::io

#endif
