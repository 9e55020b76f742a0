#include <gtest/gtest.h>

#include "gcdtc/io/synthetic.hpp"
#include "gcdtc/tc/correction.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::tc;

namespace {

TensorField random_field(int t, int h, int w, uint64_t seed) {
    Rng rng(seed);
    TensorField f = make_field(0, t, h, w);
    for (double& v : f.values) v = rng.uniform(-1.0, 1.0);
    f.compute_value_range();
    return f;
}

double field_mse(const TensorField& a, const TensorField& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.values.size());
}

}  // namespace

TEST(ExtractTraces, SiteCount) {
    auto f = random_field(48, 4, 4, 1);
    auto ts = extract_traces(f, f, 48);
    EXPECT_EQ(ts.original.shape(), (std::vector<int>{16, 48}));
}

TEST(ExtractTraces, IdenticalPairYieldsIdenticalTraces) {
    auto f = random_field(12, 3, 3, 2);
    auto ts = extract_traces(f, f, 6);
    EXPECT_EQ(ts.original.values(), ts.reconstructed.values());
}

TEST(ExtractTraces, TailWindowReplicatesLastSamples) {
    auto f = random_field(50, 2, 2, 3);
    auto ts = extract_traces(f, f, 48);
    // Window 2 covers t = 48..95; everything past t = 49 replicates f(49).
    ASSERT_EQ(ts.original.dim(0), 2 * 4);
    const double* trace = ts.original.data() + 4u * 48u;  // window 1, site (0,0)
    EXPECT_EQ(trace[0], f.at(48, 0, 0));
    EXPECT_EQ(trace[1], f.at(49, 0, 0));
    for (int j = 2; j < 48; ++j) EXPECT_EQ(trace[j], f.at(49, 0, 0));
}

TEST(ExtractTraces, ShapeMismatchFails) {
    auto a = random_field(8, 2, 2, 4);
    auto b = random_field(8, 2, 3, 4);
    EXPECT_THROW(extract_traces(a, b, 8), std::invalid_argument);
}

TEST(TcTrain, NonWorseningOnIdentityData) {
    auto f = random_field(16, 4, 4, 5);
    auto ts = extract_traces(f, f, 8);
    auto initial = TCNetwork::make(8, 0);
    auto init_out = initial.apply(ts.reconstructed);
    double init_mse = 0.0;
    for (size_t i = 0; i < init_out.size(); ++i) {
        double d = init_out[i] - ts.original[i];
        init_mse += d * d;
    }
    init_mse /= static_cast<double>(init_out.size());

    auto net = tc_train(ts, 100, 0);
    auto out = net.apply(ts.reconstructed);
    double mse = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        double d = out[i] - ts.original[i];
        mse += d * d;
    }
    mse /= static_cast<double>(out.size());
    EXPECT_LE(mse, init_mse);
}

TEST(TcTrain, CorrectsConstantOffset) {
    auto orig = random_field(16, 4, 4, 6);
    TensorField corrupted = orig;
    for (double& v : corrupted.values) v += 0.1;

    double pre_mse = field_mse(orig, corrupted);
    auto ts = extract_traces(orig, corrupted, 8);
    auto net = tc_train(ts, 200, 0);
    auto enhanced = tc_apply(net, corrupted);
    double post_mse = field_mse(orig, enhanced);
    EXPECT_LT(post_mse, pre_mse);
}

TEST(TcTrain, ZeroEpochsIsInitialization) {
    auto f = random_field(8, 2, 2, 7);
    auto ts = extract_traces(f, f, 8);
    auto net = tc_train(ts, 0, 42);
    auto ref = TCNetwork::make(8, 42);
    auto a = net.apply(ts.reconstructed);
    auto b = ref.apply(ts.reconstructed);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_TRUE(a.all_finite());
}

TEST(TcApply, PureInference) {
    auto f = random_field(12, 3, 3, 8);
    auto net = TCNetwork::make(6, 1);
    auto a = tc_apply(net, f);
    auto b = tc_apply(net, f);
    EXPECT_EQ(a.values, b.values);
}

TEST(TcApply, ZeroWeightsYieldZeroField) {
    auto f = random_field(8, 2, 2, 9);
    auto net = TCNetwork::make(8, 1);
    for (auto* p : net.parameters()) p->value.fill(0.0);
    auto out = tc_apply(net, f);
    for (double v : out.values) EXPECT_EQ(v, 0.0);
}

TEST(TcApply, TraceLengthLongerThanFieldStillCovers) {
    // n_t longer than T_len: one window, replicated reads, writes clipped.
    auto f = random_field(5, 2, 2, 10);
    auto net = TCNetwork::make(8, 2);
    auto out = tc_apply(net, f);
    EXPECT_EQ(out.t_len, 5);
    EXPECT_TRUE(std::isfinite(out.values[0]));
}
