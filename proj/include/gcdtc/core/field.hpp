#ifndef GCDTC_CORE_FIELD_HPP
#define GCDTC_CORE_FIELD_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcdtc {

// A member's full spatiotemporal volume: samples in row-major (t, y, x) order.
struct TensorField {
    int member_id = 0;
    int t_len = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;
    double vmin = 0.0;  // value_range
    double vmax = 0.0;

    size_t size() const {
        return static_cast<size_t>(t_len) * static_cast<size_t>(height) * static_cast<size_t>(width);
    }

    double& at(int t, int y, int x) {
        return values[(static_cast<size_t>(t) * height + y) * width + x];
    }
    double at(int t, int y, int x) const {
        return values[(static_cast<size_t>(t) * height + y) * width + x];
    }

    void compute_value_range() {
        if (values.empty()) {
            vmin = vmax = 0.0;
            return;
        }
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        vmin = *lo;
        vmax = *hi;
    }

    void validate() const {
        if (t_len <= 0 || height <= 0 || width <= 0)
            throw std::invalid_argument("zero-sized field");
        if (values.size() != size())
            throw std::invalid_argument("field sample count does not match shape");
    }
};

inline TensorField make_field(int member_id, int t_len, int height, int width) {
    TensorField f;
    f.member_id = member_id;
    f.t_len = t_len;
    f.height = height;
    f.width = width;
    f.values.assign(f.size(), 0.0);
    return f;
}

// Per-member affine normalization [min,max] <-> [-1,1].
struct NormStats {
    double min = 0.0;
    double max = 0.0;

    void validate() const {
        if (!(max > min)) throw std::invalid_argument("degenerate value range: max <= min");
    }
};

inline NormStats norm_stats_of(const TensorField& f) { return NormStats{f.vmin, f.vmax}; }

inline TensorField normalize(const TensorField& f, const NormStats& stats) {
    stats.validate();
    TensorField out = f;
    const double scale = 2.0 / (stats.max - stats.min);
    for (double& v : out.values) v = (v - stats.min) * scale - 1.0;
    out.vmin = (f.vmin - stats.min) * scale - 1.0;
    out.vmax = (f.vmax - stats.min) * scale - 1.0;
    return out;
}

inline TensorField denormalize(const TensorField& f, const NormStats& stats) {
    stats.validate();
    TensorField out = f;
    const double scale = (stats.max - stats.min) / 2.0;
    for (double& v : out.values) v = (v + 1.0) * scale + stats.min;
    out.vmin = (f.vmin + 1.0) * scale + stats.min;
    out.vmax = (f.vmax + 1.0) * scale + stats.min;
    return out;
}

}  // namespace gcdtc

#endif
