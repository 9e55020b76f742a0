#ifndef GCDTC_ENTROPY_QUANTIZE_HPP
#define GCDTC_ENTROPY_QUANTIZE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gcdtc::entropy {

// Scalar quantization config: quantization factor b (a power of ten) and bin
// size a. The uniform bin width is a/b.
struct QuantConfig {
    uint32_t b = 1000;
    uint32_t a = 16;

    void validate() const {
        if (a < 1) throw std::invalid_argument("quantization bin size a must be >= 1");
        uint32_t p = b;
        if (p == 0) throw std::invalid_argument("quantization factor b must be a power of 10");
        while (p % 10 == 0) p /= 10;
        if (p != 1) throw std::invalid_argument("quantization factor b must be a power of 10");
    }

    double step() const { return static_cast<double>(a) / static_cast<double>(b); }
    double inv_step() const { return static_cast<double>(b) / static_cast<double>(a); }
};

// q = floor((b/a) x), floor toward -inf. Reconstruction error <= a/(2b).
inline int64_t quantize_uniform(double x, const QuantConfig& cfg) {
    if (!std::isfinite(x)) throw std::invalid_argument("cannot quantize non-finite value");
    double scaled = std::floor(cfg.inv_step() * x);
    if (scaled >= 9.2e18 || scaled <= -9.2e18)
        throw std::overflow_error("quantized value exceeds 64-bit range");
    return static_cast<int64_t>(scaled);
}

// Bin midpoint.
inline double dequantize_uniform(int64_t q, const QuantConfig& cfg) {
    return (static_cast<double>(q) + 0.5) * cfg.step();
}

// Log-based scalar quantization for correction coefficients: sign plus a
// magnitude code on the ln(1+|c|) scale. Zero short-circuits to an exact zero.
struct LogCode {
    int8_t sign = 0;  // -1, 0, +1
    int64_t mag = 0;

    bool operator==(const LogCode& o) const { return sign == o.sign && mag == o.mag; }
};

inline LogCode quantize_log(double c, const QuantConfig& cfg) {
    if (!std::isfinite(c)) throw std::invalid_argument("cannot quantize non-finite value");
    if (c == 0.0) return LogCode{0, 0};
    LogCode code;
    code.sign = c > 0.0 ? 1 : -1;
    double m = std::floor(cfg.inv_step() * std::log1p(std::abs(c)));
    if (m >= 9.2e18) throw std::overflow_error("log-quantized value exceeds 64-bit range");
    code.mag = static_cast<int64_t>(m);
    return code;
}

inline double dequantize_log(const LogCode& code, const QuantConfig& cfg) {
    if (code.sign == 0) return 0.0;
    return static_cast<double>(code.sign) *
           std::expm1((static_cast<double>(code.mag) + 0.5) * cfg.step());
}

// Single-symbol encoding of a log code, suitable for entropy coding:
// 0 for zero, otherwise sign * (mag + 1).
inline int64_t log_code_to_symbol(const LogCode& code) {
    if (code.sign == 0) return 0;
    return static_cast<int64_t>(code.sign) * (code.mag + 1);
}

inline LogCode log_code_from_symbol(int64_t s) {
    if (s == 0) return LogCode{0, 0};
    return s > 0 ? LogCode{1, s - 1} : LogCode{-1, -s - 1};
}

}  // namespace gcdtc::entropy

#endif
