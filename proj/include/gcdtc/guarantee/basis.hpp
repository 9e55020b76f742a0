#ifndef GCDTC_GUARANTEE_BASIS_HPP
#define GCDTC_GUARANTEE_BASIS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gcdtc/core/blocks.hpp"
#include "gcdtc/core/field.hpp"
#include "gcdtc/entropy/quantize.hpp"
#include "gcdtc/util/bytes.hpp"

namespace gcdtc::guard {

namespace detail {

// Deterministic cyclic Jacobi eigendecomposition of a symmetric matrix.
// a is n x n row-major and is destroyed; v receives the eigenvectors as
// columns (v[i*n + j] = component i of eigenvector j).
inline void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, int n) {
    v.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) s += a[static_cast<size_t>(p) * n + q] *
                                                a[static_cast<size_t>(p) * n + q];
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[static_cast<size_t>(i) * n + j]));
    if (scale == 0.0) return;  // already diagonal (zero matrix)
    const double tol = 1e-14 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_norm() <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[static_cast<size_t>(p) * n + q];
                if (std::abs(apq) <= tol * 1e-2) continue;
                double app = a[static_cast<size_t>(p) * n + p];
                double aqq = a[static_cast<size_t>(q) * n + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (int k = 0; k < n; ++k) {
                    double akp = a[static_cast<size_t>(k) * n + p];
                    double akq = a[static_cast<size_t>(k) * n + q];
                    a[static_cast<size_t>(k) * n + p] = c * akp - s * akq;
                    a[static_cast<size_t>(k) * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[static_cast<size_t>(p) * n + k];
                    double aqk = a[static_cast<size_t>(q) * n + k];
                    a[static_cast<size_t>(p) * n + k] = c * apk - s * aqk;
                    a[static_cast<size_t>(q) * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[static_cast<size_t>(k) * n + p];
                    double vkq = v[static_cast<size_t>(k) * n + q];
                    v[static_cast<size_t>(k) * n + p] = c * vkp - s * vkq;
                    v[static_cast<size_t>(k) * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
}

}  // namespace detail

// PCA mean and orthonormal basis over guarantee-block residuals. Columns of
// U are principal directions in descending eigenvalue order; rank-deficient
// directions are completed by Gram-Schmidt against canonical axes, and every
// column's largest-magnitude entry is made positive (ties: first index).
struct ResidualBasis {
    int n = 0;                    // block element count
    std::vector<double> mu;       // length n
    std::vector<double> basis;    // n x n, basis[i*n + j] = component i of column j
    std::vector<double> eigenvalues;  // descending, length n
    entropy::QuantConfig coeff_quant; // log quantization config for coefficients

    double col(int i, int j) const { return basis[static_cast<size_t>(i) * n + j]; }

    size_t serialized_bytes() const {
        return 4 + 8 + static_cast<size_t>(n) * 8 + static_cast<size_t>(n) * n * 8;
    }

    void serialize(ByteWriter& w) const {
        w.u32(static_cast<uint32_t>(n));
        w.u32(coeff_quant.b);
        w.u32(coeff_quant.a);
        for (double m : mu) w.f64(m);
        for (double u : basis) w.f64(u);
    }

    static ResidualBasis deserialize(ByteReader& r) {
        ResidualBasis b;
        b.n = static_cast<int>(r.u32());
        if (b.n < 1 || b.n > 1 << 20) throw std::runtime_error("corrupt basis block size");
        b.coeff_quant.b = r.u32();
        b.coeff_quant.a = r.u32();
        b.coeff_quant.validate();
        b.mu.resize(b.n);
        for (double& m : b.mu) m = r.f64();
        b.basis.resize(static_cast<size_t>(b.n) * b.n);
        for (double& u : b.basis) u = r.f64();
        b.eigenvalues.assign(b.n, 0.0);
        return b;
    }
};

namespace detail {

inline void fix_column_signs(std::vector<double>& basis, int n) {
    for (int j = 0; j < n; ++j) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            double m = std::abs(basis[static_cast<size_t>(i) * n + j]);
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (basis[static_cast<size_t>(arg) * n + j] < 0.0)
            for (int i = 0; i < n; ++i) basis[static_cast<size_t>(i) * n + j] *= -1.0;
    }
}

}  // namespace detail

// Fits the PCA basis from mean-centered residual blocks (as rows).
inline ResidualBasis fit_basis_from_residuals(const std::vector<std::vector<double>>& residuals,
                                              const entropy::QuantConfig& coeff_quant) {
    if (residuals.size() < 2)
        throw std::invalid_argument("need at least 2 residual blocks to fit a basis");
    const int n = static_cast<int>(residuals[0].size());
    const double count = static_cast<double>(residuals.size());

    ResidualBasis out;
    out.n = n;
    out.coeff_quant = coeff_quant;
    out.mu.assign(n, 0.0);
    for (const auto& r : residuals)
        for (int i = 0; i < n; ++i) out.mu[i] += r[i];
    for (double& m : out.mu) m /= count;

    // Unbiased sample covariance of the residual set.
    std::vector<double> cov(static_cast<size_t>(n) * n, 0.0);
    for (const auto& r : residuals) {
        for (int i = 0; i < n; ++i) {
            const double di = r[i] - out.mu[i];
            for (int j = i; j < n; ++j)
                cov[static_cast<size_t>(i) * n + j] += di * (r[j] - out.mu[j]);
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            cov[static_cast<size_t>(i) * n + j] /= (count - 1.0);
            cov[static_cast<size_t>(j) * n + i] = cov[static_cast<size_t>(i) * n + j];
        }

    std::vector<double> v;
    std::vector<double> a = cov;
    detail::jacobi_eigen(a, v, n);
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a[static_cast<size_t>(i) * n + i];

    // Stable descending order.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return eig[x] > eig[y]; });

    out.basis.assign(static_cast<size_t>(n) * n, 0.0);
    out.eigenvalues.resize(n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = eig[order[j]];
        for (int i = 0; i < n; ++i)
            out.basis[static_cast<size_t>(i) * n + j] = v[static_cast<size_t>(i) * n + order[j]];
    }

    // Complete near-null directions against canonical axes (deterministic
    // Gram-Schmidt) so the basis stays orthonormal even for rank-deficient
    // residual sets.
    const double null_tol = std::max(out.eigenvalues[0], 0.0) * 1e-12;
    int first_null = n;
    for (int j = 0; j < n; ++j) {
        if (out.eigenvalues[j] <= null_tol) {
            first_null = j;
            break;
        }
    }
    if (first_null < n) {
        std::vector<bool> used(n, false);
        auto orthogonalized_axis = [&](int axis, int cols, std::vector<double>& cand) {
            cand.assign(n, 0.0);
            cand[axis] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (int k = 0; k < cols; ++k) {
                    double dot = 0.0;
                    for (int i = 0; i < n; ++i)
                        dot += cand[i] * out.basis[static_cast<size_t>(i) * n + k];
                    for (int i = 0; i < n; ++i)
                        cand[i] -= dot * out.basis[static_cast<size_t>(i) * n + k];
                }
            }
            return std::sqrt(std::inner_product(cand.begin(), cand.end(), cand.begin(), 0.0));
        };
        std::vector<double> cand, best_cand;
        for (int j = first_null; j < n; ++j) {
            // Best unused canonical axis: the unused set always carries the
            // whole remaining subspace, so the max norm is bounded away from
            // zero while j < n.
            int best_axis = -1;
            double best_norm = 0.0;
            for (int axis = 0; axis < n; ++axis) {
                if (used[axis]) continue;
                double norm = orthogonalized_axis(axis, j, cand);
                if (norm > best_norm + 1e-12) {
                    best_norm = norm;
                    best_axis = axis;
                    best_cand = cand;
                }
            }
            if (best_axis < 0 || best_norm < 1e-6)
                throw std::runtime_error("basis completion failed");
            used[best_axis] = true;
            for (int i = 0; i < n; ++i)
                out.basis[static_cast<size_t>(i) * n + j] = best_cand[i] / best_norm;
            out.eigenvalues[j] = 0.0;
        }
    }
    detail::fix_column_signs(out.basis, n);
    return out;
}

// Residual extraction for a field pair partitioned into guarantee blocks.
inline std::vector<std::vector<double>> residual_blocks(const TensorField& original,
                                                        const TensorField& reconstructed, int gd,
                                                        int gh, int gw) {
    if (original.t_len != reconstructed.t_len || original.height != reconstructed.height ||
        original.width != reconstructed.width)
        throw std::invalid_argument("field pair shape mismatch");
    auto [ob, grid] = partition(original, gd, gh, gw);
    auto [rb, grid2] = partition(reconstructed, gd, gh, gw);
    std::vector<std::vector<double>> res(ob.size());
    for (size_t k = 0; k < ob.size(); ++k) {
        res[k].resize(ob[k].values.size());
        for (size_t i = 0; i < res[k].size(); ++i) res[k][i] = ob[k].values[i] - rb[k].values[i];
    }
    return res;
}

inline ResidualBasis fit_basis(const TensorField& original, const TensorField& reconstructed,
                               int gd, int gh, int gw, const entropy::QuantConfig& coeff_quant) {
    return fit_basis_from_residuals(residual_blocks(original, reconstructed, gd, gh, gw),
                                    coeff_quant);
}

// c = U^T (b - bhat - mu)
inline std::vector<double> project_residual(const std::vector<double>& b,
                                            const std::vector<double>& bhat,
                                            const ResidualBasis& basis) {
    const int n = basis.n;
    if (static_cast<int>(b.size()) != n || static_cast<int>(bhat.size()) != n)
        throw std::invalid_argument("block size does not match basis");
    std::vector<double> centered(n);
    for (int i = 0; i < n; ++i) centered[i] = b[i] - bhat[i] - basis.mu[i];
    std::vector<double> c(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += basis.col(i, j) * centered[i];
        c[j] = acc;
    }
    return c;
}

}  // namespace gcdtc::guard

#endif
