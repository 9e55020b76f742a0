#ifndef GCDTC_TC_CORRECTION_HPP
#define GCDTC_TC_CORRECTION_HPP

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "gcdtc/codec/model.hpp"
#include "gcdtc/core/field.hpp"
#include "gcdtc/nn/adam.hpp"
#include "gcdtc/nn/graph.hpp"
#include "gcdtc/util/rng.hpp"

namespace gcdtc::tc {

using codec::ParamStore;
using nn::Graph;
using nn::ParamTensor;
using nn::Tensor;

// Overcomplete feedforward correction network operating on temporal traces
// (the axis perpendicular to the diffusion slices): two hidden layers of
// width 4 * n_t with SiLU activations, linear output of length n_t.
struct TCNetwork {
    int n_t = 0;
    ParamStore store;
    codec::layers::Dense l1, l2, l3;

    static TCNetwork make(int n_t, uint64_t seed) {
        if (n_t < 1) throw std::invalid_argument("trace length must be >= 1");
        TCNetwork net;
        net.n_t = n_t;
        Rng rng(seed);
        const int hidden = 4 * n_t;
        net.l1 = codec::layers::Dense::make(net.store, "tc.l1", n_t, hidden, rng);
        net.l2 = codec::layers::Dense::make(net.store, "tc.l2", hidden, hidden, rng);
        net.l3 = codec::layers::Dense::make(net.store, "tc.l3", hidden, n_t, rng);
        return net;
    }

    std::vector<ParamTensor*> parameters() { return store.all(); }

    Graph::NodeId forward(Graph& g, Graph::NodeId x) const {
        auto h = g.silu(l1.forward(g, x));
        h = g.silu(l2.forward(g, h));
        return l3.forward(g, h);
    }

    // Deterministic inference on a (B, n_t) trace batch.
    Tensor apply(const Tensor& traces) const {
        Graph g;
        auto out = forward(g, g.input(traces));
        return g.value(out);
    }
};

// Paired temporal traces, one row per (window, y, x) site in y-major order.
struct TraceSet {
    int n_t = 0;
    Tensor original;       // (B, n_t)
    Tensor reconstructed;  // (B, n_t)
};

namespace detail {

inline int window_count(int t_len, int n_t) { return (t_len + n_t - 1) / n_t; }

// Reads one trace with edge replication past the end of the field.
inline void read_trace(const TensorField& f, int t0, int y, int x, int n_t, double* out) {
    for (int j = 0; j < n_t; ++j) out[j] = f.at(std::min(t0 + j, f.t_len - 1), y, x);
}

}  // namespace detail

// One trace per spatial site per temporal window; the last window replicates
// the trailing samples when T_len is not divisible by n_t.
inline TraceSet extract_traces(const TensorField& original, const TensorField& reconstructed,
                               int n_t) {
    if (original.t_len != reconstructed.t_len || original.height != reconstructed.height ||
        original.width != reconstructed.width)
        throw std::invalid_argument("field pair shape mismatch");
    if (n_t < 1) throw std::invalid_argument("trace length must be >= 1");

    const int windows = detail::window_count(original.t_len, n_t);
    const int sites = original.height * original.width;
    TraceSet ts;
    ts.n_t = n_t;
    ts.original = Tensor({windows * sites, n_t});
    ts.reconstructed = Tensor({windows * sites, n_t});
    int row = 0;
    for (int w = 0; w < windows; ++w) {
        const int t0 = w * n_t;
        for (int y = 0; y < original.height; ++y) {
            for (int x = 0; x < original.width; ++x, ++row) {
                detail::read_trace(original, t0, y, x, n_t,
                                   ts.original.data() + static_cast<size_t>(row) * n_t);
                detail::read_trace(reconstructed, t0, y, x, n_t,
                                   ts.reconstructed.data() + static_cast<size_t>(row) * n_t);
            }
        }
    }
    return ts;
}

// Full-batch Adam on MSE(TC(reconstructed), original).
inline TCNetwork tc_train(const TraceSet& traces, int epochs, uint64_t seed, double lr = 1e-3) {
    if (traces.original.dim(0) < 1) throw std::invalid_argument("need at least one trace pair");
    TCNetwork net = TCNetwork::make(traces.n_t, seed);
    auto params = net.parameters();
    auto adam = nn::AdamState::init(params, lr);
    for (int e = 0; e < epochs; ++e) {
        Graph g;
        auto out = net.forward(g, g.input(traces.reconstructed));
        auto loss = g.mse(out, g.input(traces.original));
        if (!std::isfinite(g.value(loss)[0]))
            throw std::runtime_error("tensor-correction loss is not finite");
        g.backward(loss);
        nn::adam_step(params, adam);
    }
    return net;
}

// Replaces every temporal trace of the field by the network output.
inline TensorField tc_apply(const TCNetwork& net, const TensorField& reconstructed) {
    const int n_t = net.n_t;
    const int windows = detail::window_count(reconstructed.t_len, n_t);
    const int sites = reconstructed.height * reconstructed.width;

    Tensor in({windows * sites, n_t});
    int row = 0;
    for (int w = 0; w < windows; ++w)
        for (int y = 0; y < reconstructed.height; ++y)
            for (int x = 0; x < reconstructed.width; ++x, ++row)
                detail::read_trace(reconstructed, w * n_t, y, x, n_t,
                                   in.data() + static_cast<size_t>(row) * n_t);

    Tensor out = net.apply(in);

    TensorField enhanced = reconstructed;
    row = 0;
    for (int w = 0; w < windows; ++w) {
        const int t0 = w * n_t;
        for (int y = 0; y < reconstructed.height; ++y) {
            for (int x = 0; x < reconstructed.width; ++x, ++row) {
                const double* tr = out.data() + static_cast<size_t>(row) * n_t;
                for (int j = 0; j < n_t && t0 + j < reconstructed.t_len; ++j)
                    enhanced.at(t0 + j, y, x) = tr[j];
            }
        }
    }
    enhanced.compute_value_range();
    return enhanced;
}

}  // namespace gcdtc::tc

#endif
