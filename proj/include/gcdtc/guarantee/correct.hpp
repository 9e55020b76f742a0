#ifndef GCDTC_GUARANTEE_CORRECT_HPP
#define GCDTC_GUARANTEE_CORRECT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gcdtc/entropy/huffman.hpp"
#include "gcdtc/entropy/quantize.hpp"
#include "gcdtc/guarantee/basis.hpp"

namespace gcdtc::guard {

struct GuaranteeConfig {
    int gd = 4, gh = 4, gw = 4;  // guarantee block shape
    double tau = 0.0;            // l2 bound per block, original data units
    entropy::QuantConfig quant;  // shared by coefficient (log) and raw (uniform) coding

    int block_elems() const { return gd * gh * gw; }

    // Raw escape mode has worst-case error sqrt(n) * a/(2b); tau at or below
    // that cannot be guaranteed.
    double feasibility_floor() const {
        return std::sqrt(static_cast<double>(block_elems())) * quant.step() / 2.0;
    }

    void validate() const {
        quant.validate();
        if (gd < 1 || gh < 1 || gw < 1)
            throw std::invalid_argument("guarantee block shape must be positive");
        if (!(tau > 0.0)) throw std::invalid_argument("error bound tau must be positive");
        if (tau <= feasibility_floor())
            throw std::invalid_argument("tau <= sqrt(n)*a/(2b): bound infeasible under raw-mode "
                                        "quantization");
    }
};

enum class CorrectionMode : uint8_t { none = 0, pca = 1, raw = 2 };

struct CorrectionRecord {
    CorrectionMode mode = CorrectionMode::none;
    std::vector<uint32_t> indices;   // pca: selected basis columns, ascending
    std::vector<int64_t> coeffs;     // pca: log-code symbols, parallel to indices
    std::vector<int64_t> raw;        // raw: uniform residual codes, length n
};

namespace detail {

inline double l2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace detail

// Applies a record to a reconstructed block. This is the single code path the
// encoder verifies with and the decoder replays, so both sides agree
// bit-exactly: summation runs over ascending basis indices.
inline std::vector<double> apply_record(const std::vector<double>& bhat,
                                        const CorrectionRecord& rec, const ResidualBasis& basis) {
    const int n = basis.n;
    std::vector<double> out = bhat;
    switch (rec.mode) {
        case CorrectionMode::none:
            break;
        case CorrectionMode::pca: {
            for (int i = 0; i < n; ++i) out[i] += basis.mu[i];
            for (size_t k = 0; k < rec.indices.size(); ++k) {
                const int j = static_cast<int>(rec.indices[k]);
                const double c =
                    entropy::dequantize_log(entropy::log_code_from_symbol(rec.coeffs[k]),
                                            basis.coeff_quant);
                for (int i = 0; i < n; ++i) out[i] += c * basis.col(i, j);
            }
            break;
        }
        case CorrectionMode::raw: {
            for (int i = 0; i < n; ++i)
                out[i] += entropy::dequantize_uniform(rec.raw[i], basis.coeff_quant);
            break;
        }
    }
    return out;
}

// Corrects one guarantee block: no-op when the bound already holds; otherwise
// greedily selects quantized PCA coefficients by descending dequantized
// magnitude until the achieved error meets tau, falling back to the raw
// quantized residual when even the full basis cannot.
inline std::pair<std::vector<double>, CorrectionRecord> correct_block(
    const std::vector<double>& b, const std::vector<double>& bhat, const ResidualBasis& basis,
    const GuaranteeConfig& cfg) {
    const int n = basis.n;
    if (static_cast<int>(b.size()) != n || static_cast<int>(bhat.size()) != n)
        throw std::invalid_argument("block size does not match basis");

    CorrectionRecord rec;
    std::vector<double> residual(n);
    for (int i = 0; i < n; ++i) residual[i] = b[i] - bhat[i];
    if (detail::l2(residual) <= cfg.tau) return {bhat, rec};

    auto c = project_residual(b, bhat, basis);
    std::vector<int64_t> symbols(n);
    std::vector<double> chat(n);
    for (int j = 0; j < n; ++j) {
        auto code = entropy::quantize_log(c[j], basis.coeff_quant);
        symbols[j] = entropy::log_code_to_symbol(code);
        chat[j] = entropy::dequantize_log(code, basis.coeff_quant);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(chat[x]) > std::abs(chat[y]);
    });

    rec.mode = CorrectionMode::pca;
    std::vector<int> selected;
    for (int k = 0; k < n; ++k) {
        selected.push_back(order[k]);
        std::sort(selected.begin(), selected.end());
        rec.indices.assign(selected.begin(), selected.end());
        rec.coeffs.resize(selected.size());
        for (size_t s = 0; s < selected.size(); ++s) rec.coeffs[s] = symbols[selected[s]];
        auto btilde = apply_record(bhat, rec, basis);
        std::vector<double> err(n);
        for (int i = 0; i < n; ++i) err[i] = b[i] - btilde[i];
        if (detail::l2(err) <= cfg.tau) return {std::move(btilde), std::move(rec)};
    }

    // Raw escape: quantize the residual itself; error <= sqrt(n) * a/(2b) < tau.
    rec.mode = CorrectionMode::raw;
    rec.indices.clear();
    rec.coeffs.clear();
    rec.raw.resize(n);
    for (int i = 0; i < n; ++i) rec.raw[i] = entropy::quantize_uniform(residual[i], basis.coeff_quant);
    auto btilde = apply_record(bhat, rec, basis);
    return {std::move(btilde), std::move(rec)};
}

// Correction payload: a Huffman stream of mode flags, then (present only when
// some record uses them) per-pca-record coefficient counts, index deltas,
// coefficient symbols, and raw residual codes.
inline std::vector<uint8_t> serialize_corrections(const std::vector<CorrectionRecord>& records,
                                                  size_t* table_bytes = nullptr) {
    std::vector<int64_t> modes, counts, indices, coeffs, raws;
    for (const auto& r : records) {
        modes.push_back(static_cast<int64_t>(r.mode));
        if (r.mode == CorrectionMode::pca) {
            counts.push_back(static_cast<int64_t>(r.indices.size()));
            for (size_t k = 0; k < r.indices.size(); ++k) {
                indices.push_back(k == 0 ? static_cast<int64_t>(r.indices[0])
                                         : static_cast<int64_t>(r.indices[k]) -
                                               static_cast<int64_t>(r.indices[k - 1]) - 1);
                coeffs.push_back(r.coeffs[k]);
            }
        } else if (r.mode == CorrectionMode::raw) {
            raws.insert(raws.end(), r.raw.begin(), r.raw.end());
        }
    }
    ByteWriter w;
    size_t tables = 0;
    auto append = [&](const std::vector<int64_t>& syms) {
        auto enc = entropy::huffman_encode_stream(syms);
        tables += enc.table_bytes;
        w.bytes(enc.bytes);
    };
    append(modes);
    if (!counts.empty()) {
        append(counts);
        append(indices);
        append(coeffs);
    }
    if (!raws.empty()) append(raws);
    if (table_bytes) *table_bytes = tables;
    return w.take();
}

inline std::vector<CorrectionRecord> deserialize_corrections(ByteReader& r, int block_elems) {
    auto modes = entropy::huffman_decode_stream(r);
    bool any_pca = false, any_raw = false;
    for (int64_t m : modes) {
        if (m == static_cast<int64_t>(CorrectionMode::pca)) any_pca = true;
        else if (m == static_cast<int64_t>(CorrectionMode::raw)) any_raw = true;
        else if (m != 0) throw std::runtime_error("corrupt correction stream: bad mode");
    }
    std::vector<int64_t> counts, indices, coeffs, raws;
    if (any_pca) {
        counts = entropy::huffman_decode_stream(r);
        indices = entropy::huffman_decode_stream(r);
        coeffs = entropy::huffman_decode_stream(r);
    }
    if (any_raw) raws = entropy::huffman_decode_stream(r);

    std::vector<CorrectionRecord> records(modes.size());
    size_t ci = 0, ii = 0, ri = 0;
    for (size_t k = 0; k < modes.size(); ++k) {
        auto& rec = records[k];
        rec.mode = static_cast<CorrectionMode>(modes[k]);
        if (rec.mode == CorrectionMode::pca) {
            if (ci >= counts.size()) throw std::runtime_error("corrupt correction stream");
            int64_t cnt = counts[ci++];
            if (cnt < 1 || cnt > block_elems) throw std::runtime_error("corrupt correction stream");
            int64_t prev = -1;
            for (int64_t j = 0; j < cnt; ++j) {
                if (ii >= indices.size()) throw std::runtime_error("corrupt correction stream");
                int64_t idx = j == 0 ? indices[ii] : prev + indices[ii] + 1;
                if (idx < 0 || idx >= block_elems)
                    throw std::runtime_error("corrupt correction stream: index out of range");
                rec.indices.push_back(static_cast<uint32_t>(idx));
                rec.coeffs.push_back(coeffs[ii]);
                prev = idx;
                ++ii;
            }
        } else if (rec.mode == CorrectionMode::raw) {
            if (ri + block_elems > raws.size())
                throw std::runtime_error("corrupt correction stream");
            rec.raw.assign(raws.begin() + ri, raws.begin() + ri + block_elems);
            ri += block_elems;
        }
    }
    return records;
}

// Applies records to every guarantee block of the reconstructed field.
inline TensorField apply_corrections(const TensorField& reconstructed,
                                     const std::vector<CorrectionRecord>& records,
                                     const ResidualBasis& basis, const GuaranteeConfig& cfg) {
    auto [blocks, grid] = partition(reconstructed, cfg.gd, cfg.gh, cfg.gw);
    if (records.size() != blocks.size())
        throw std::invalid_argument("correction record count does not match block partition");
    for (size_t k = 0; k < blocks.size(); ++k) {
        auto corrected = apply_record(blocks[k].values, records[k], basis);
        blocks[k].values = std::move(corrected);
    }
    return reassemble(blocks, grid);
}

}  // namespace gcdtc::guard

#endif
