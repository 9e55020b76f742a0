#ifndef GCDTC_NN_GRAPH_HPP
#define GCDTC_NN_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gcdtc/nn/tensor.hpp"

namespace gcdtc::nn {

namespace detail {

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// The three convolution primitives below cover forward and backward of both
// conv and transposed conv, in 2-D and 3-D. Weights are indexed w[a][b][k...]:
// gather maps B-channel data to A-channel data, scatter maps A to B.

// Fast path: 3x3 kernel, stride 1, pad 1. One pass per output element with
// all nine taps accumulated from L1-resident rows.
inline void conv_gather_2d_3x3(const Tensor& x, const Tensor& w, Tensor& y) {
    const int N = x.dim(0), B = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int A = w.dim(0);
    for (int n = 0; n < N; ++n) {
        const double* xbase = x.data() + static_cast<size_t>(n) * B * H * W;
        for (int a = 0; a < A; ++a) {
            double* yplane = y.data() + (static_cast<size_t>(n) * A + a) * H * W;
            for (int b = 0; b < B; ++b) {
                const double* xplane = xbase + static_cast<size_t>(b) * H * W;
                const double* wk = w.data() + (static_cast<size_t>(a) * B + b) * 9;
                const double w00 = wk[0], w01 = wk[1], w02 = wk[2];
                const double w10 = wk[3], w11 = wk[4], w12 = wk[5];
                const double w20 = wk[6], w21 = wk[7], w22 = wk[8];
                for (int oh = 0; oh < H; ++oh) {
                    const double* xm = oh > 0 ? xplane + static_cast<size_t>(oh - 1) * W : nullptr;
                    const double* x0 = xplane + static_cast<size_t>(oh) * W;
                    const double* xp =
                        oh + 1 < H ? xplane + static_cast<size_t>(oh + 1) * W : nullptr;
                    double* yrow = yplane + static_cast<size_t>(oh) * W;
                    for (int ow = 0; ow < W; ++ow) {
                        const int l = ow - 1, r = ow + 1;
                        double acc = w11 * x0[ow];
                        if (l >= 0) acc += w10 * x0[l];
                        if (r < W) acc += w12 * x0[r];
                        if (xm) {
                            acc += w01 * xm[ow];
                            if (l >= 0) acc += w00 * xm[l];
                            if (r < W) acc += w02 * xm[r];
                        }
                        if (xp) {
                            acc += w21 * xp[ow];
                            if (l >= 0) acc += w20 * xp[l];
                            if (r < W) acc += w22 * xp[r];
                        }
                        yrow[ow] += acc;
                    }
                }
            }
        }
    }
}

// Fast path: 1x1 kernel, stride 1, no padding: a channel mix over whole planes.
inline void conv_gather_2d_1x1(const Tensor& x, const Tensor& w, Tensor& y) {
    const int N = x.dim(0), B = x.dim(1);
    const int A = w.dim(0);
    const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
    for (int n = 0; n < N; ++n) {
        for (int a = 0; a < A; ++a) {
            double* yp = y.data() + (static_cast<size_t>(n) * A + a) * plane;
            for (int b = 0; b < B; ++b) {
                const double wv = w[static_cast<size_t>(a) * B + b];
                const double* xp = x.data() + (static_cast<size_t>(n) * B + b) * plane;
                for (size_t i = 0; i < plane; ++i) yp[i] += wv * xp[i];
            }
        }
    }
}

// Fast path: 3x3 kernel, stride 2, pad 1 (the U-Net downsamplers).
inline void conv_gather_2d_3x3s2(const Tensor& x, const Tensor& w, Tensor& y) {
    const int N = x.dim(0), B = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int A = w.dim(0), OH = y.dim(2), OW = y.dim(3);
    for (int n = 0; n < N; ++n) {
        const double* xbase = x.data() + static_cast<size_t>(n) * B * IH * IW;
        for (int a = 0; a < A; ++a) {
            double* yplane = y.data() + (static_cast<size_t>(n) * A + a) * OH * OW;
            for (int b = 0; b < B; ++b) {
                const double* xplane = xbase + static_cast<size_t>(b) * IH * IW;
                const double* wk = w.data() + (static_cast<size_t>(a) * B + b) * 9;
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih0 = 2 * oh - 1;
                    const double* xm = ih0 >= 0 ? xplane + static_cast<size_t>(ih0) * IW : nullptr;
                    const double* x0 =
                        ih0 + 1 < IH ? xplane + static_cast<size_t>(ih0 + 1) * IW : nullptr;
                    const double* xp =
                        ih0 + 2 < IH ? xplane + static_cast<size_t>(ih0 + 2) * IW : nullptr;
                    double* yrow = yplane + static_cast<size_t>(oh) * OW;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int iw0 = 2 * ow - 1;
                        const bool l = iw0 >= 0, m = iw0 + 1 < IW, r = iw0 + 2 < IW;
                        double acc = 0.0;
                        if (xm) {
                            if (l) acc += wk[0] * xm[iw0];
                            if (m) acc += wk[1] * xm[iw0 + 1];
                            if (r) acc += wk[2] * xm[iw0 + 2];
                        }
                        if (x0) {
                            if (l) acc += wk[3] * x0[iw0];
                            if (m) acc += wk[4] * x0[iw0 + 1];
                            if (r) acc += wk[5] * x0[iw0 + 2];
                        }
                        if (xp) {
                            if (l) acc += wk[6] * xp[iw0];
                            if (m) acc += wk[7] * xp[iw0 + 1];
                            if (r) acc += wk[8] * xp[iw0 + 2];
                        }
                        yrow[ow] += acc;
                    }
                }
            }
        }
    }
}

// y[n,a,o...] += sum_{b,k} w[a,b,k] * x[n,b, o*s - p + k]
inline void conv_gather_2d(const Tensor& x, const Tensor& w, Tensor& y, int sh, int sw, int ph,
                           int pw) {
    const int N = x.dim(0), B = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int A = w.dim(0), KH = w.dim(2), KW = w.dim(3);
    const int OH = y.dim(2), OW = y.dim(3);
    if (KH == 3 && KW == 3 && sh == 1 && sw == 1 && ph == 1 && pw == 1 && OH == IH && OW == IW) {
        conv_gather_2d_3x3(x, w, y);
        return;
    }
    if (KH == 3 && KW == 3 && sh == 2 && sw == 2 && ph == 1 && pw == 1) {
        conv_gather_2d_3x3s2(x, w, y);
        return;
    }
    if (KH == 1 && KW == 1 && sh == 1 && sw == 1 && ph == 0 && pw == 0) {
        conv_gather_2d_1x1(x, w, y);
        return;
    }
    for (int n = 0; n < N; ++n) {
        for (int a = 0; a < A; ++a) {
            double* yplane = y.data() + (static_cast<size_t>(n) * A + a) * OH * OW;
            for (int b = 0; b < B; ++b) {
                const double* xplane = x.data() + (static_cast<size_t>(n) * B + b) * IH * IW;
                const double* wk = w.data() + (static_cast<size_t>(a) * B + b) * KH * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    const int oh_lo = std::max(0, ceil_div(ph - kh, sh));
                    const int oh_hi = std::min(OH - 1, floor_div(IH - 1 - kh + ph, sh));
                    for (int kw = 0; kw < KW; ++kw) {
                        const double wv = wk[kh * KW + kw];
                        if (wv == 0.0) continue;
                        const int ow_lo = std::max(0, ceil_div(pw - kw, sw));
                        const int ow_hi = std::min(OW - 1, floor_div(IW - 1 - kw + pw, sw));
                        for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                            const double* xrow =
                                xplane + static_cast<size_t>(oh * sh - ph + kh) * IW - pw + kw;
                            double* yrow = yplane + static_cast<size_t>(oh) * OW;
                            if (sw == 1) {
                                for (int ow = ow_lo; ow <= ow_hi; ++ow)
                                    yrow[ow] += wv * xrow[ow];
                            } else {
                                for (int ow = ow_lo; ow <= ow_hi; ++ow)
                                    yrow[ow] += wv * xrow[ow * sw];
                            }
                        }
                    }
                }
            }
        }
    }
}

// Fast path for the k=4, stride-2, pad-1 upsampling transposed conv: every
// output element receives exactly the taps whose (o + 1 - k) is even, i.e.
// two kernel rows and two kernel columns, table-driven per coordinate.
inline void conv_scatter_2d_4x4s2(const Tensor& x, const Tensor& w, Tensor& y) {
    const int N = x.dim(0), A = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int B = w.dim(1), OH = y.dim(2), OW = y.dim(3);

    // Per output coordinate: up to two (k, i) pairs with i = (o + 1 - k)/2.
    auto build = [](int O, int I, std::vector<std::array<int, 4>>& tab) {
        tab.resize(O);
        for (int o = 0; o < O; ++o) {
            int cnt = 0;
            std::array<int, 4> e{0, -1, 0, -1};  // k0, i0, k1, i1
            for (int k = (o + 1) & 1; k < 4; k += 2) {
                int i = (o + 1 - k) / 2;
                if (i < 0 || i >= I) continue;
                e[2 * cnt] = k;
                e[2 * cnt + 1] = i;
                ++cnt;
            }
            tab[o] = e;
        }
    };
    std::vector<std::array<int, 4>> htab, wtab;
    build(OH, IH, htab);
    build(OW, IW, wtab);

    std::vector<double> acc(OW);
    for (int n = 0; n < N; ++n) {
        const double* xbase = x.data() + static_cast<size_t>(n) * A * IH * IW;
        for (int b = 0; b < B; ++b) {
            double* yplane = y.data() + (static_cast<size_t>(n) * B + b) * OH * OW;
            for (int oh = 0; oh < OH; ++oh) {
                const auto& hrow = htab[oh];
                double* yrow = yplane + static_cast<size_t>(oh) * OW;
                std::copy_n(yrow, OW, acc.data());
                for (int a = 0; a < A; ++a) {
                    const double* xplane = xbase + static_cast<size_t>(a) * IH * IW;
                    const double* wk = w.data() + (static_cast<size_t>(a) * B + b) * 16;
                    for (int hp = 0; hp < 2; ++hp) {
                        const int kh = hrow[2 * hp], ih = hrow[2 * hp + 1];
                        if (ih < 0) continue;
                        const double* xrow = xplane + static_cast<size_t>(ih) * IW;
                        const double* wr = wk + kh * 4;
                        for (int ow = 0; ow < OW; ++ow) {
                            const auto& wcol = wtab[ow];
                            double v = 0.0;
                            if (wcol[1] >= 0) v += wr[wcol[0]] * xrow[wcol[1]];
                            if (wcol[3] >= 0) v += wr[wcol[2]] * xrow[wcol[3]];
                            acc[ow] += v;
                        }
                    }
                }
                std::copy_n(acc.data(), OW, yrow);
            }
        }
    }
}

// y[n,b, i*s - p + k] += sum_{a} w[a,b,k] * x[n,a,i...]
// Iterated by destination row: contributions exist where (o + p - k) is a
// multiple of the stride.
inline void conv_scatter_2d(const Tensor& x, const Tensor& w, Tensor& y, int sh, int sw, int ph,
                            int pw) {
    const int N = x.dim(0), A = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int B = w.dim(1), KH = w.dim(2), KW = w.dim(3);
    const int OH = y.dim(2), OW = y.dim(3);
    if (KH == 4 && KW == 4 && sh == 2 && sw == 2 && ph == 1 && pw == 1) {
        conv_scatter_2d_4x4s2(x, w, y);
        return;
    }
    std::vector<double> acc(OW);
    for (int n = 0; n < N; ++n) {
        const double* xbase = x.data() + static_cast<size_t>(n) * A * IH * IW;
        for (int b = 0; b < B; ++b) {
            double* yplane = y.data() + (static_cast<size_t>(n) * B + b) * OH * OW;
            for (int oh = 0; oh < OH; ++oh) {
                double* yrow = yplane + static_cast<size_t>(oh) * OW;
                std::copy_n(yrow, OW, acc.data());
                for (int a = 0; a < A; ++a) {
                    const double* xplane = xbase + static_cast<size_t>(a) * IH * IW;
                    const double* wk =
                        w.data() + (static_cast<size_t>(a) * B + b) * KH * KW;
                    for (int kh = 0; kh < KH; ++kh) {
                        const int t = oh + ph - kh;
                        if (t < 0 || t % sh != 0) continue;
                        const int ih = t / sh;
                        if (ih >= IH) continue;
                        const double* xrow = xplane + static_cast<size_t>(ih) * IW;
                        for (int kw = 0; kw < KW; ++kw) {
                            const double wv = wk[kh * KW + kw];
                            const int iw_lo = std::max(0, ceil_div(pw - kw, sw));
                            const int iw_hi = std::min(IW - 1, floor_div(OW - 1 - kw + pw, sw));
                            double* ys = acc.data() - pw + kw;
                            if (sw == 1) {
                                for (int iw = iw_lo; iw <= iw_hi; ++iw) ys[iw] += wv * xrow[iw];
                            } else {
                                for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                    ys[iw * sw] += wv * xrow[iw];
                            }
                        }
                    }
                }
                std::copy_n(acc.data(), OW, yrow);
            }
        }
    }
}

// dw[a,b,k] += sum_{n,i} p[n,a,i] * q[n,b, i*s - p + k]
inline void conv_weight_grad_2d(const Tensor& p, const Tensor& q, Tensor& dw, int sh, int sw,
                                int ph, int pw) {
    const int N = p.dim(0), A = p.dim(1), IH = p.dim(2), IW = p.dim(3);
    const int B = q.dim(1), QH = q.dim(2), QW = q.dim(3);
    const int KH = dw.dim(2), KW = dw.dim(3);
    for (int n = 0; n < N; ++n) {
        for (int a = 0; a < A; ++a) {
            const double* pplane = p.data() + (static_cast<size_t>(n) * A + a) * IH * IW;
            for (int b = 0; b < B; ++b) {
                const double* qplane = q.data() + (static_cast<size_t>(n) * B + b) * QH * QW;
                double* wk = dw.data() + (static_cast<size_t>(a) * B + b) * KH * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    const int ih_lo = std::max(0, ceil_div(ph - kh, sh));
                    const int ih_hi = std::min(IH - 1, floor_div(QH - 1 - kh + ph, sh));
                    for (int kw = 0; kw < KW; ++kw) {
                        const int iw_lo = std::max(0, ceil_div(pw - kw, sw));
                        const int iw_hi = std::min(IW - 1, floor_div(QW - 1 - kw + pw, sw));
                        double acc = 0.0;
                        for (int ih = ih_lo; ih <= ih_hi; ++ih) {
                            const double* prow = pplane + ih * IW;
                            const double* qrow = qplane + (ih * sh - ph + kh) * QW - pw + kw;
                            if (sw == 1) {
                                for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                    acc += prow[iw] * qrow[iw];
                            } else {
                                for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                    acc += prow[iw] * qrow[iw * sw];
                            }
                        }
                        wk[kh * KW + kw] += acc;
                    }
                }
            }
        }
    }
}

// 3-D variants operate on (C, D, H, W) data (no batch axis; blocks are
// processed one at a time) and (A, B, KD, KH, KW) weights.

inline void conv_gather_3d(const Tensor& x, const Tensor& w, Tensor& y,
                           const std::array<int, 3>& s, const std::array<int, 3>& p) {
    const int B = x.dim(0), ID = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int A = w.dim(0), KD = w.dim(2), KH = w.dim(3), KW = w.dim(4);
    const int OD = y.dim(1), OH = y.dim(2), OW = y.dim(3);
    std::vector<double> acc(OW);
    for (int a = 0; a < A; ++a) {
        double* yvol = y.data() + static_cast<size_t>(a) * OD * OH * OW;
        const double* wa = w.data() + static_cast<size_t>(a) * B * KD * KH * KW;
        for (int od = 0; od < OD; ++od) {
            for (int oh = 0; oh < OH; ++oh) {
                double* yrow = yvol + (static_cast<size_t>(od) * OH + oh) * OW;
                std::copy_n(yrow, OW, acc.data());
                for (int b = 0; b < B; ++b) {
                    const double* xvol = x.data() + static_cast<size_t>(b) * ID * IH * IW;
                    const double* wk = wa + static_cast<size_t>(b) * KD * KH * KW;
                    for (int kd = 0; kd < KD; ++kd) {
                        const int id = od * s[0] - p[0] + kd;
                        if (id < 0 || id >= ID) continue;
                        for (int kh = 0; kh < KH; ++kh) {
                            const int ih = oh * s[1] - p[1] + kh;
                            if (ih < 0 || ih >= IH) continue;
                            const double* xrow =
                                xvol + (static_cast<size_t>(id) * IH + ih) * IW;
                            for (int kw = 0; kw < KW; ++kw) {
                                const double wv = wk[(kd * KH + kh) * KW + kw];
                                const int ow_lo = std::max(0, ceil_div(p[2] - kw, s[2]));
                                const int ow_hi =
                                    std::min(OW - 1, floor_div(IW - 1 - kw + p[2], s[2]));
                                const double* xs = xrow - p[2] + kw;
                                if (s[2] == 1) {
                                    for (int ow = ow_lo; ow <= ow_hi; ++ow)
                                        acc[ow] += wv * xs[ow];
                                } else {
                                    for (int ow = ow_lo; ow <= ow_hi; ++ow)
                                        acc[ow] += wv * xs[ow * s[2]];
                                }
                            }
                        }
                    }
                }
                std::copy_n(acc.data(), OW, yrow);
            }
        }
    }
}

inline void conv_scatter_3d(const Tensor& x, const Tensor& w, Tensor& y,
                            const std::array<int, 3>& s, const std::array<int, 3>& p) {
    const int A = x.dim(0), ID = x.dim(1), IH = x.dim(2), IW = x.dim(3);
    const int B = w.dim(1), KD = w.dim(2), KH = w.dim(3), KW = w.dim(4);
    const int OD = y.dim(1), OH = y.dim(2), OW = y.dim(3);
    std::vector<double> acc(OW);
    for (int b = 0; b < B; ++b) {
        double* yvol = y.data() + static_cast<size_t>(b) * OD * OH * OW;
        for (int od = 0; od < OD; ++od) {
            for (int oh = 0; oh < OH; ++oh) {
                double* yrow = yvol + (static_cast<size_t>(od) * OH + oh) * OW;
                std::copy_n(yrow, OW, acc.data());
                for (int a = 0; a < A; ++a) {
                    const double* xvol = x.data() + static_cast<size_t>(a) * ID * IH * IW;
                    const double* wk =
                        w.data() + (static_cast<size_t>(a) * B + b) * KD * KH * KW;
                    for (int kd = 0; kd < KD; ++kd) {
                        const int td = od + p[0] - kd;
                        if (td < 0 || td % s[0] != 0) continue;
                        const int id = td / s[0];
                        if (id >= ID) continue;
                        for (int kh = 0; kh < KH; ++kh) {
                            const int th = oh + p[1] - kh;
                            if (th < 0 || th % s[1] != 0) continue;
                            const int ih = th / s[1];
                            if (ih >= IH) continue;
                            const double* xrow =
                                xvol + (static_cast<size_t>(id) * IH + ih) * IW;
                            for (int kw = 0; kw < KW; ++kw) {
                                const double wv = wk[(kd * KH + kh) * KW + kw];
                                const int iw_lo = std::max(0, ceil_div(p[2] - kw, s[2]));
                                const int iw_hi =
                                    std::min(IW - 1, floor_div(OW - 1 - kw + p[2], s[2]));
                                double* ys = acc.data() - p[2] + kw;
                                if (s[2] == 1) {
                                    for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                        ys[iw] += wv * xrow[iw];
                                } else {
                                    for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                        ys[iw * s[2]] += wv * xrow[iw];
                                }
                            }
                        }
                    }
                }
                std::copy_n(acc.data(), OW, yrow);
            }
        }
    }
}

inline void conv_weight_grad_3d(const Tensor& pt, const Tensor& q, Tensor& dw,
                                const std::array<int, 3>& s, const std::array<int, 3>& p) {
    const int A = pt.dim(0), ID = pt.dim(1), IH = pt.dim(2), IW = pt.dim(3);
    const int B = q.dim(0), QD = q.dim(1), QH = q.dim(2), QW = q.dim(3);
    const int KD = dw.dim(2), KH = dw.dim(3), KW = dw.dim(4);
    for (int a = 0; a < A; ++a) {
        const double* pvol = pt.data() + static_cast<size_t>(a) * ID * IH * IW;
        for (int b = 0; b < B; ++b) {
            const double* qvol = q.data() + static_cast<size_t>(b) * QD * QH * QW;
            double* wk = dw.data() + (static_cast<size_t>(a) * B + b) * KD * KH * KW;
            for (int kd = 0; kd < KD; ++kd) {
                const int id_lo = std::max(0, ceil_div(p[0] - kd, s[0]));
                const int id_hi = std::min(ID - 1, floor_div(QD - 1 - kd + p[0], s[0]));
                for (int kh = 0; kh < KH; ++kh) {
                    const int ih_lo = std::max(0, ceil_div(p[1] - kh, s[1]));
                    const int ih_hi = std::min(IH - 1, floor_div(QH - 1 - kh + p[1], s[1]));
                    for (int kw = 0; kw < KW; ++kw) {
                        const int iw_lo = std::max(0, ceil_div(p[2] - kw, s[2]));
                        const int iw_hi = std::min(IW - 1, floor_div(QW - 1 - kw + p[2], s[2]));
                        double acc = 0.0;
                        for (int id = id_lo; id <= id_hi; ++id) {
                            const double* ppl = pvol + id * IH * IW;
                            const double* qpl = qvol + (id * s[0] - p[0] + kd) * QH * QW;
                            for (int ih = ih_lo; ih <= ih_hi; ++ih) {
                                const double* prow = ppl + ih * IW;
                                const double* qrow =
                                    qpl + (ih * s[1] - p[1] + kh) * QW - p[2] + kw;
                                for (int iw = iw_lo; iw <= iw_hi; ++iw)
                                    acc += prow[iw] * qrow[iw * s[2]];
                            }
                        }
                        wk[(kd * KH + kh) * KW + kw] += acc;
                    }
                }
            }
        }
    }
}

}  // namespace detail

// Dynamic compute tape. Forward values are computed eagerly as nodes are
// added; construction order is a topological order, so backward() replays the
// tape in reverse. Parameter leaves accumulate into ParamTensor.grad; forward
// never mutates parameters (leaves take a copy of the value).
class Graph {
  public:
    using NodeId = int;

    NodeId input(Tensor t) { return add_leaf("input", std::move(t), nullptr); }

    NodeId param(ParamTensor& p) { return add_leaf("param", p.value, &p); }

    NodeId conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
        const Tensor& xv = val(x, "conv2d", 4);
        const Tensor& wv = val(w, "conv2d", 4);
        const Tensor& bv = val(b, "conv2d", 1);
        if (wv.dim(1) != xv.dim(1))
            fail("conv2d", "weight in-channels " + wv.shape_str() + " vs input " + xv.shape_str());
        if (bv.dim(0) != wv.dim(0)) fail("conv2d", "bias size mismatch");
        int oh = (xv.dim(2) + 2 * pad - wv.dim(2)) / stride + 1;
        int ow = (xv.dim(3) + 2 * pad - wv.dim(3)) / stride + 1;
        if (oh <= 0 || ow <= 0) fail("conv2d", "non-positive output size");
        Tensor y({xv.dim(0), wv.dim(0), oh, ow});
        for (int n = 0; n < y.dim(0); ++n)
            for (int c = 0; c < y.dim(1); ++c) {
                double* plane = y.data() + (static_cast<size_t>(n) * y.dim(1) + c) * oh * ow;
                std::fill(plane, plane + static_cast<size_t>(oh) * ow, bv[c]);
            }
        detail::conv_gather_2d(xv, wv, y, stride, stride, pad, pad);
        return add_node("conv2d", {x, w, b}, std::move(y),
                        [x, w, b, stride, pad](Graph& g, NodeId self) {
                            const Tensor& dy = g.nodes_[self].grad;
                            detail::conv_scatter_2d(dy, g.nodes_[w].value, g.nodes_[x].grad,
                                                    stride, stride, pad, pad);
                            detail::conv_weight_grad_2d(dy, g.nodes_[x].value, g.nodes_[w].grad,
                                                        stride, stride, pad, pad);
                            g.reduce_bias(dy, g.nodes_[b].grad, 1);
                        });
    }

    NodeId conv3d(NodeId x, NodeId w, NodeId b, std::array<int, 3> stride, std::array<int, 3> pad) {
        const Tensor& xv = val(x, "conv3d", 4);
        const Tensor& wv = val(w, "conv3d", 5);
        const Tensor& bv = val(b, "conv3d", 1);
        if (wv.dim(1) != xv.dim(0))
            fail("conv3d", "weight in-channels " + wv.shape_str() + " vs input " + xv.shape_str());
        if (bv.dim(0) != wv.dim(0)) fail("conv3d", "bias size mismatch");
        int od = (xv.dim(1) + 2 * pad[0] - wv.dim(2)) / stride[0] + 1;
        int oh = (xv.dim(2) + 2 * pad[1] - wv.dim(3)) / stride[1] + 1;
        int ow = (xv.dim(3) + 2 * pad[2] - wv.dim(4)) / stride[2] + 1;
        if (od <= 0 || oh <= 0 || ow <= 0) fail("conv3d", "non-positive output size");
        Tensor y({wv.dim(0), od, oh, ow});
        for (int c = 0; c < y.dim(0); ++c) {
            double* vol = y.data() + static_cast<size_t>(c) * od * oh * ow;
            std::fill(vol, vol + static_cast<size_t>(od) * oh * ow, bv[c]);
        }
        detail::conv_gather_3d(xv, wv, y, stride, pad);
        return add_node("conv3d", {x, w, b}, std::move(y),
                        [x, w, b, stride, pad](Graph& g, NodeId self) {
                            const Tensor& dy = g.nodes_[self].grad;
                            detail::conv_scatter_3d(dy, g.nodes_[w].value, g.nodes_[x].grad,
                                                    stride, pad);
                            detail::conv_weight_grad_3d(dy, g.nodes_[x].value, g.nodes_[w].grad,
                                                        stride, pad);
                            g.reduce_bias(dy, g.nodes_[b].grad, 0);
                        });
    }

    // Transposed convolutions; weight layout (C_in, C_out, k...).
    NodeId tconv2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
        const Tensor& xv = val(x, "tconv2d", 4);
        const Tensor& wv = val(w, "tconv2d", 4);
        const Tensor& bv = val(b, "tconv2d", 1);
        if (wv.dim(0) != xv.dim(1))
            fail("tconv2d", "weight in-channels " + wv.shape_str() + " vs input " + xv.shape_str());
        if (bv.dim(0) != wv.dim(1)) fail("tconv2d", "bias size mismatch");
        int oh = (xv.dim(2) - 1) * stride - 2 * pad + wv.dim(2);
        int ow = (xv.dim(3) - 1) * stride - 2 * pad + wv.dim(3);
        if (oh <= 0 || ow <= 0) fail("tconv2d", "non-positive output size");
        Tensor y({xv.dim(0), wv.dim(1), oh, ow});
        for (int n = 0; n < y.dim(0); ++n)
            for (int c = 0; c < y.dim(1); ++c) {
                double* plane = y.data() + (static_cast<size_t>(n) * y.dim(1) + c) * oh * ow;
                std::fill(plane, plane + static_cast<size_t>(oh) * ow, bv[c]);
            }
        detail::conv_scatter_2d(xv, wv, y, stride, stride, pad, pad);
        return add_node("tconv2d", {x, w, b}, std::move(y),
                        [x, w, b, stride, pad](Graph& g, NodeId self) {
                            const Tensor& dy = g.nodes_[self].grad;
                            detail::conv_gather_2d(dy, g.nodes_[w].value, g.nodes_[x].grad, stride,
                                                   stride, pad, pad);
                            detail::conv_weight_grad_2d(g.nodes_[x].value, dy, g.nodes_[w].grad,
                                                        stride, stride, pad, pad);
                            g.reduce_bias(dy, g.nodes_[b].grad, 1);
                        });
    }

    NodeId tconv3d(NodeId x, NodeId w, NodeId b, std::array<int, 3> stride,
                   std::array<int, 3> pad) {
        const Tensor& xv = val(x, "tconv3d", 4);
        const Tensor& wv = val(w, "tconv3d", 5);
        const Tensor& bv = val(b, "tconv3d", 1);
        if (wv.dim(0) != xv.dim(0))
            fail("tconv3d", "weight in-channels " + wv.shape_str() + " vs input " + xv.shape_str());
        if (bv.dim(0) != wv.dim(1)) fail("tconv3d", "bias size mismatch");
        int od = (xv.dim(1) - 1) * stride[0] - 2 * pad[0] + wv.dim(2);
        int oh = (xv.dim(2) - 1) * stride[1] - 2 * pad[1] + wv.dim(3);
        int ow = (xv.dim(3) - 1) * stride[2] - 2 * pad[2] + wv.dim(4);
        if (od <= 0 || oh <= 0 || ow <= 0) fail("tconv3d", "non-positive output size");
        Tensor y({wv.dim(1), od, oh, ow});
        for (int c = 0; c < y.dim(0); ++c) {
            double* vol = y.data() + static_cast<size_t>(c) * od * oh * ow;
            std::fill(vol, vol + static_cast<size_t>(od) * oh * ow, bv[c]);
        }
        detail::conv_scatter_3d(xv, wv, y, stride, pad);
        return add_node("tconv3d", {x, w, b}, std::move(y),
                        [x, w, b, stride, pad](Graph& g, NodeId self) {
                            const Tensor& dy = g.nodes_[self].grad;
                            detail::conv_gather_3d(dy, g.nodes_[w].value, g.nodes_[x].grad, stride,
                                                   pad);
                            detail::conv_weight_grad_3d(g.nodes_[x].value, dy, g.nodes_[w].grad,
                                                        stride, pad);
                            g.reduce_bias(dy, g.nodes_[b].grad, 0);
                        });
    }

    // x (B, N) * w (M, N)^T + b (M) -> (B, M)
    NodeId dense(NodeId x, NodeId w, NodeId b) {
        const Tensor& xv = val(x, "dense", 2);
        const Tensor& wv = val(w, "dense", 2);
        const Tensor& bv = val(b, "dense", 1);
        if (wv.dim(1) != xv.dim(1)) fail("dense", "weight/input size mismatch");
        if (bv.dim(0) != wv.dim(0)) fail("dense", "bias size mismatch");
        const int B = xv.dim(0), N = xv.dim(1), M = wv.dim(0);
        Tensor y({B, M});
        for (int i = 0; i < B; ++i) {
            const double* xr = xv.data() + static_cast<size_t>(i) * N;
            double* yr = y.data() + static_cast<size_t>(i) * M;
            for (int m = 0; m < M; ++m) {
                const double* wr = wv.data() + static_cast<size_t>(m) * N;
                double acc = bv[m];
                for (int k = 0; k < N; ++k) acc += wr[k] * xr[k];
                yr[m] = acc;
            }
        }
        return add_node("dense", {x, w, b}, std::move(y), [x, w, b](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            const Tensor& xv = g.nodes_[x].value;
            const Tensor& wv = g.nodes_[w].value;
            Tensor& dx = g.nodes_[x].grad;
            Tensor& dwt = g.nodes_[w].grad;
            Tensor& db = g.nodes_[b].grad;
            const int B = xv.dim(0), N = xv.dim(1), M = wv.dim(0);
            for (int i = 0; i < B; ++i) {
                const double* dyr = dy.data() + static_cast<size_t>(i) * M;
                const double* xr = xv.data() + static_cast<size_t>(i) * N;
                double* dxr = dx.data() + static_cast<size_t>(i) * N;
                for (int m = 0; m < M; ++m) {
                    const double g0 = dyr[m];
                    if (g0 == 0.0) continue;
                    const double* wr = wv.data() + static_cast<size_t>(m) * N;
                    double* dwr = dwt.data() + static_cast<size_t>(m) * N;
                    for (int k = 0; k < N; ++k) {
                        dxr[k] += g0 * wr[k];
                        dwr[k] += g0 * xr[k];
                    }
                    db[m] += g0;
                }
            }
        });
    }

    NodeId silu(NodeId x) {
        const Tensor& xv = node(x).value;
        Tensor y = xv;
        for (size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * detail::sigmoid(xv[i]);
        return add_node("silu", {x}, std::move(y), [x](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            const Tensor& xv = g.nodes_[x].value;
            Tensor& dx = g.nodes_[x].grad;
            for (size_t i = 0; i < dy.size(); ++i) {
                double s = detail::sigmoid(xv[i]);
                dx[i] += dy[i] * s * (1.0 + xv[i] * (1.0 - s));
            }
        });
    }

    NodeId add(NodeId a, NodeId b) {
        const Tensor& av = node(a).value;
        const Tensor& bv = node(b).value;
        if (!av.same_shape(bv))
            fail("add", "shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        Tensor y = av;
        for (size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
        return add_node("add", {a, b}, std::move(y), [a, b](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& da = g.nodes_[a].grad;
            Tensor& db = g.nodes_[b].grad;
            for (size_t i = 0; i < dy.size(); ++i) {
                da[i] += dy[i];
                db[i] += dy[i];
            }
        });
    }

    // Concatenate along the channel axis (axis 1 of NCHW).
    NodeId concat_channels(NodeId a, NodeId b) {
        const Tensor& av = val(a, "concat", 4);
        const Tensor& bv = val(b, "concat", 4);
        if (av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3))
            fail("concat", "shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        const int N = av.dim(0), Ca = av.dim(1), Cb = bv.dim(1), H = av.dim(2), W = av.dim(3);
        Tensor y({N, Ca + Cb, H, W});
        const size_t plane = static_cast<size_t>(H) * W;
        for (int n = 0; n < N; ++n) {
            std::copy_n(av.data() + static_cast<size_t>(n) * Ca * plane, Ca * plane,
                        y.data() + static_cast<size_t>(n) * (Ca + Cb) * plane);
            std::copy_n(bv.data() + static_cast<size_t>(n) * Cb * plane, Cb * plane,
                        y.data() + (static_cast<size_t>(n) * (Ca + Cb) + Ca) * plane);
        }
        return add_node("concat", {a, b}, std::move(y), [a, b](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& da = g.nodes_[a].grad;
            Tensor& db = g.nodes_[b].grad;
            const int N = da.dim(0), Ca = da.dim(1), Cb = db.dim(1);
            const size_t plane = static_cast<size_t>(da.dim(2)) * da.dim(3);
            for (int n = 0; n < N; ++n) {
                const double* src = dy.data() + static_cast<size_t>(n) * (Ca + Cb) * plane;
                double* pa = da.data() + static_cast<size_t>(n) * Ca * plane;
                double* pb = db.data() + static_cast<size_t>(n) * Cb * plane;
                for (size_t i = 0; i < Ca * plane; ++i) pa[i] += src[i];
                for (size_t i = 0; i < Cb * plane; ++i) pb[i] += src[Ca * plane + i];
            }
        });
    }

    NodeId upsample2x_nearest(NodeId x) {
        const Tensor& xv = val(x, "upsample2x", 4);
        const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        Tensor y({N, C, 2 * H, 2 * W});
        for (int nc = 0; nc < N * C; ++nc) {
            const double* xp = xv.data() + static_cast<size_t>(nc) * H * W;
            double* yp = y.data() + static_cast<size_t>(nc) * 4 * H * W;
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    double v = xp[h * W + w];
                    double* o = yp + (2 * h) * 2 * W + 2 * w;
                    o[0] = v;
                    o[1] = v;
                    o[2 * W] = v;
                    o[2 * W + 1] = v;
                }
        }
        return add_node("upsample2x", {x}, std::move(y), [x](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& dx = g.nodes_[x].grad;
            const int N = dx.dim(0), C = dx.dim(1), H = dx.dim(2), W = dx.dim(3);
            for (int nc = 0; nc < N * C; ++nc) {
                const double* gp = dy.data() + static_cast<size_t>(nc) * 4 * H * W;
                double* dp = dx.data() + static_cast<size_t>(nc) * H * W;
                for (int h = 0; h < H; ++h)
                    for (int w = 0; w < W; ++w) {
                        const double* o = gp + (2 * h) * 2 * W + 2 * w;
                        dp[h * W + w] += o[0] + o[1] + o[2 * W] + o[2 * W + 1];
                    }
            }
        });
    }

    // Group normalization over (N, C, H, W) with affine per-channel parameters.
    NodeId group_norm(NodeId x, NodeId gamma, NodeId beta, int groups, double eps = 1e-5) {
        const Tensor& xv = val(x, "group_norm", 4);
        const Tensor& gv = val(gamma, "group_norm", 1);
        const Tensor& bv = val(beta, "group_norm", 1);
        const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        if (gv.dim(0) != C || bv.dim(0) != C) fail("group_norm", "affine parameter size mismatch");
        if (groups < 1 || C % groups != 0)
            fail("group_norm", "group count " + std::to_string(groups) + " must divide channels " +
                                   std::to_string(C));
        const int cpg = C / groups;
        const size_t gsz = static_cast<size_t>(cpg) * H * W;
        Tensor y({N, C, H, W});
        std::vector<double> means(static_cast<size_t>(N) * groups);
        std::vector<double> invs(static_cast<size_t>(N) * groups);
        for (int n = 0; n < N; ++n) {
            for (int g0 = 0; g0 < groups; ++g0) {
                const double* xp =
                    xv.data() + (static_cast<size_t>(n) * C + static_cast<size_t>(g0) * cpg) * H * W;
                double mean = 0.0;
                for (size_t i = 0; i < gsz; ++i) mean += xp[i];
                mean /= static_cast<double>(gsz);
                double var = 0.0;
                for (size_t i = 0; i < gsz; ++i) {
                    double d = xp[i] - mean;
                    var += d * d;
                }
                var /= static_cast<double>(gsz);
                double inv = 1.0 / std::sqrt(var + eps);
                means[static_cast<size_t>(n) * groups + g0] = mean;
                invs[static_cast<size_t>(n) * groups + g0] = inv;
                double* yp =
                    y.data() + (static_cast<size_t>(n) * C + static_cast<size_t>(g0) * cpg) * H * W;
                for (int c = 0; c < cpg; ++c) {
                    const double ga = gv[g0 * cpg + c];
                    const double be = bv[g0 * cpg + c];
                    const double* xc = xp + static_cast<size_t>(c) * H * W;
                    double* yc = yp + static_cast<size_t>(c) * H * W;
                    for (int i = 0; i < H * W; ++i) yc[i] = ga * (xc[i] - mean) * inv + be;
                }
            }
        }
        return add_node(
            "group_norm", {x, gamma, beta}, std::move(y),
            [x, gamma, beta, groups, eps, means, invs](Graph& g, NodeId self) {
                const Tensor& dy = g.nodes_[self].grad;
                const Tensor& xv = g.nodes_[x].value;
                const Tensor& gv = g.nodes_[gamma].value;
                Tensor& dx = g.nodes_[x].grad;
                Tensor& dgamma = g.nodes_[gamma].grad;
                Tensor& dbeta = g.nodes_[beta].grad;
                const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
                const int cpg = C / groups;
                const size_t gsz = static_cast<size_t>(cpg) * H * W;
                for (int n = 0; n < N; ++n) {
                    for (int g0 = 0; g0 < groups; ++g0) {
                        const size_t base =
                            (static_cast<size_t>(n) * C + static_cast<size_t>(g0) * cpg) *
                            static_cast<size_t>(H) * W;
                        const double mean = means[static_cast<size_t>(n) * groups + g0];
                        const double inv = invs[static_cast<size_t>(n) * groups + g0];
                        const double* xp = xv.data() + base;
                        const double* dyp = dy.data() + base;
                        double* dxp = dx.data() + base;
                        // t = gamma * dy; dx = inv*(t - mean(t) - xhat*mean(t*xhat))
                        double sum_t = 0.0, sum_tx = 0.0;
                        for (int c = 0; c < cpg; ++c) {
                            const double ga = gv[g0 * cpg + c];
                            const double* xc = xp + static_cast<size_t>(c) * H * W;
                            const double* dyc = dyp + static_cast<size_t>(c) * H * W;
                            for (int i = 0; i < H * W; ++i) {
                                const double xhat = (xc[i] - mean) * inv;
                                const double t = ga * dyc[i];
                                sum_t += t;
                                sum_tx += t * xhat;
                                dgamma[g0 * cpg + c] += dyc[i] * xhat;
                                dbeta[g0 * cpg + c] += dyc[i];
                            }
                        }
                        const double mt = sum_t / static_cast<double>(gsz);
                        const double mtx = sum_tx / static_cast<double>(gsz);
                        for (int c = 0; c < cpg; ++c) {
                            const double ga = gv[g0 * cpg + c];
                            const double* xc = xp + static_cast<size_t>(c) * H * W;
                            const double* dyc = dyp + static_cast<size_t>(c) * H * W;
                            double* dxc = dxp + static_cast<size_t>(c) * H * W;
                            for (int i = 0; i < H * W; ++i) {
                                const double xhat = (xc[i] - mean) * inv;
                                dxc[i] += inv * (ga * dyc[i] - mt - xhat * mtx);
                            }
                        }
                    }
                }
            });
    }

    // x (N, C, H, W) + e (N, C) broadcast over the spatial axes.
    NodeId bias_rows(NodeId x, NodeId e) {
        const Tensor& xv = val(x, "bias_rows", 4);
        const Tensor& ev = val(e, "bias_rows", 2);
        if (ev.dim(0) != xv.dim(0) || ev.dim(1) != xv.dim(1))
            fail("bias_rows", "bias " + ev.shape_str() + " vs input " + xv.shape_str());
        const int N = xv.dim(0), C = xv.dim(1);
        const size_t plane = static_cast<size_t>(xv.dim(2)) * xv.dim(3);
        Tensor y = xv;
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                double* yp = y.data() + (static_cast<size_t>(n) * C + c) * plane;
                const double b0 = ev[static_cast<size_t>(n) * C + c];
                for (size_t i = 0; i < plane; ++i) yp[i] += b0;
            }
        return add_node("bias_rows", {x, e}, std::move(y), [x, e](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& dx = g.nodes_[x].grad;
            Tensor& de = g.nodes_[e].grad;
            const int N = dx.dim(0), C = dx.dim(1);
            const size_t plane = static_cast<size_t>(dx.dim(2)) * dx.dim(3);
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const double* gp = dy.data() + (static_cast<size_t>(n) * C + c) * plane;
                    double* dp = dx.data() + (static_cast<size_t>(n) * C + c) * plane;
                    double acc = 0.0;
                    for (size_t i = 0; i < plane; ++i) {
                        dp[i] += gp[i];
                        acc += gp[i];
                    }
                    de[static_cast<size_t>(n) * C + c] += acc;
                }
        });
    }

    // Swap the first two axes of a 4-axis tensor.
    NodeId swap01(NodeId x) {
        const Tensor& xv = val(x, "swap01", 4);
        const int A = xv.dim(0), B = xv.dim(1);
        const size_t plane = static_cast<size_t>(xv.dim(2)) * xv.dim(3);
        Tensor y({B, A, xv.dim(2), xv.dim(3)});
        for (int a = 0; a < A; ++a)
            for (int b = 0; b < B; ++b)
                std::copy_n(xv.data() + (static_cast<size_t>(a) * B + b) * plane, plane,
                            y.data() + (static_cast<size_t>(b) * A + a) * plane);
        return add_node("swap01", {x}, std::move(y), [x](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& dx = g.nodes_[x].grad;
            const int A = dx.dim(0), B = dx.dim(1);
            const size_t plane = static_cast<size_t>(dx.dim(2)) * dx.dim(3);
            for (int a = 0; a < A; ++a)
                for (int b = 0; b < B; ++b) {
                    const double* src = dy.data() + (static_cast<size_t>(b) * A + a) * plane;
                    double* dst = dx.data() + (static_cast<size_t>(a) * B + b) * plane;
                    for (size_t i = 0; i < plane; ++i) dst[i] += src[i];
                }
        });
    }

    NodeId sum(NodeId x) {
        const Tensor& xv = node(x).value;
        double acc = 0.0;
        for (size_t i = 0; i < xv.size(); ++i) acc += xv[i];
        return add_node("sum", {x}, Tensor::scalar(acc), [x](Graph& g, NodeId self) {
            const double g0 = g.nodes_[self].grad[0];
            Tensor& dx = g.nodes_[x].grad;
            for (size_t i = 0; i < dx.size(); ++i) dx[i] += g0;
        });
    }

    // Mean squared error between two same-shape tensors.
    NodeId mse(NodeId a, NodeId b) {
        const Tensor& av = node(a).value;
        const Tensor& bv = node(b).value;
        if (!av.same_shape(bv))
            fail("mse", "shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        double acc = 0.0;
        for (size_t i = 0; i < av.size(); ++i) {
            double d = av[i] - bv[i];
            acc += d * d;
        }
        acc /= static_cast<double>(av.size());
        return add_node("mse", {a, b}, Tensor::scalar(acc), [a, b](Graph& g, NodeId self) {
            const double g0 = g.nodes_[self].grad[0];
            const Tensor& av = g.nodes_[a].value;
            const Tensor& bv = g.nodes_[b].value;
            Tensor& da = g.nodes_[a].grad;
            Tensor& db = g.nodes_[b].grad;
            const double scale = 2.0 * g0 / static_cast<double>(av.size());
            for (size_t i = 0; i < av.size(); ++i) {
                double d = scale * (av[i] - bv[i]);
                da[i] += d;
                db[i] -= d;
            }
        });
    }

    NodeId scale(NodeId x, double k) {
        const Tensor& xv = node(x).value;
        Tensor y = xv;
        for (size_t i = 0; i < y.size(); ++i) y[i] *= k;
        return add_node("scale", {x}, std::move(y), [x, k](Graph& g, NodeId self) {
            const Tensor& dy = g.nodes_[self].grad;
            Tensor& dx = g.nodes_[x].grad;
            for (size_t i = 0; i < dy.size(); ++i) dx[i] += k * dy[i];
        });
    }

    const Tensor& value(NodeId id) const { return node(id).value; }
    const Tensor& grad_of(NodeId id) const { return nodes_.at(id).grad; }
    size_t node_count() const { return nodes_.size(); }

    // Reverse-mode sweep from a scalar loss node. Gradients accumulate into
    // bound ParamTensors; inputs also receive grads (readable via grad_of).
    void backward(NodeId loss) {
        const Node& ln = node(loss);
        if (ln.value.size() != 1) throw std::invalid_argument("backward requires a scalar loss");
        if (!std::isfinite(ln.value[0])) throw std::runtime_error("loss is not finite");
        for (Node& n : nodes_) {
            n.grad = Tensor(n.value.shape());  // zero-filled
        }
        nodes_[loss].grad[0] = 1.0;
        for (int i = loss; i >= 0; --i) {
            if (nodes_[i].backprop) nodes_[i].backprop(*this, i);
        }
        for (Node& n : nodes_) {
            if (n.bound) {
                double* dst = n.bound->grad.data();
                const double* src = n.grad.data();
                for (size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
            }
        }
    }

  private:
    struct Node {
        const char* kind;
        std::vector<NodeId> inputs;
        Tensor value;
        Tensor grad;
        std::function<void(Graph&, NodeId)> backprop;
        ParamTensor* bound = nullptr;
    };

    NodeId add_leaf(const char* kind, Tensor value, ParamTensor* bound) {
        Node n;
        n.kind = kind;
        n.value = std::move(value);
        n.bound = bound;
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    NodeId add_node(const char* kind, std::vector<NodeId> inputs, Tensor value,
                    std::function<void(Graph&, NodeId)> backprop) {
        Node n;
        n.kind = kind;
        n.inputs = std::move(inputs);
        n.value = std::move(value);
        n.backprop = std::move(backprop);
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    const Node& node(NodeId id) const {
        if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
            throw std::out_of_range("bad node id");
        return nodes_[id];
    }

    const Tensor& val(NodeId id, const char* kind, int rank) const {
        const Tensor& t = node(id).value;
        if (t.rank() != rank)
            fail(kind, "expected rank-" + std::to_string(rank) + " input, got " + t.shape_str());
        return t;
    }

    // Sum dy over all axes except `channel_axis` into db.
    void reduce_bias(const Tensor& dy, Tensor& db, int channel_axis) {
        if (channel_axis == 1) {  // (N, C, H, W)
            const int N = dy.dim(0), C = dy.dim(1);
            const size_t plane = static_cast<size_t>(dy.dim(2)) * dy.dim(3);
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const double* p = dy.data() + (static_cast<size_t>(n) * C + c) * plane;
                    double acc = 0.0;
                    for (size_t i = 0; i < plane; ++i) acc += p[i];
                    db[c] += acc;
                }
        } else {  // (C, D, H, W)
            const int C = dy.dim(0);
            const size_t vol = dy.size() / static_cast<size_t>(C);
            for (int c = 0; c < C; ++c) {
                const double* p = dy.data() + static_cast<size_t>(c) * vol;
                double acc = 0.0;
                for (size_t i = 0; i < vol; ++i) acc += p[i];
                db[c] += acc;
            }
        }
    }

    [[noreturn]] static void fail(const char* kind, const std::string& what) {
        throw std::invalid_argument(std::string(kind) + ": " + what);
    }

    std::vector<Node> nodes_;
};

}  // namespace gcdtc::nn

#endif
