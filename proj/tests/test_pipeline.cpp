#include <gtest/gtest.h>

#include <filesystem>

#include "gcdtc/pipeline/compress.hpp"
#include "gcdtc/pipeline/metrics.hpp"
#include "testing/tiny_pipeline.hpp"

using namespace gcdtc;
using namespace gcdtc::pipeline;
using gcdtc::testing::tiny_fields;
using gcdtc::testing::tiny_pipeline_config;

TEST(Nrmse, SpecValues) {
    TensorField a = make_field(0, 1, 1, 2);
    a.values = {0.0, 1.0};
    a.compute_value_range();
    TensorField b = a;
    EXPECT_DOUBLE_EQ(nrmse(a, b), 0.0);

    b.values = {0.5, 0.5};
    EXPECT_DOUBLE_EQ(nrmse(a, b), 0.5);
}

TEST(Nrmse, ConstantOffsetClosedForm) {
    auto f = tiny_fields(1, 3)[0];
    TensorField g = f;
    double range = f.vmax - f.vmin;
    for (double& v : g.values) v += 0.001 * range;
    EXPECT_NEAR(nrmse(f, g), 0.001, 1e-12);
}

TEST(Nrmse, ZeroRangeFails) {
    TensorField a = make_field(0, 1, 1, 2);
    a.values = {1.0, 1.0};
    a.compute_value_range();
    EXPECT_THROW(nrmse(a, a), std::invalid_argument);
}

TEST(MaxBlockError, ClippedBoundaryBlocks) {
    TensorField a = make_field(0, 4, 4, 6);  // width not divisible by 4
    TensorField b = a;
    b.at(0, 0, 5) = 3.0;  // single error in the clipped boundary tile
    a.compute_value_range();
    b.compute_value_range();
    EXPECT_DOUBLE_EQ(max_block_error(a, b, 4, 4, 4), 3.0);
}

TEST(CompressionRatio, Arithmetic) {
    EXPECT_DOUBLE_EQ(compression_ratio(1000000, 10000), 100.0);
    EXPECT_THROW(compression_ratio(100, 0), std::invalid_argument);
}

TEST(Archive, SerializeParseRoundTrip) {
    Archive a;
    a.header.kind = CodecKind::gcae;
    a.header.block_d = 8;
    a.header.block_h = 16;
    a.header.block_w = 16;
    a.header.guard_d = 4;
    a.header.guard_h = 4;
    a.header.guard_w = 4;
    a.header.steps = 200;
    a.header.beta_min = 1e-5;
    a.header.beta_max = 5e-3;
    a.header.quant_b = 1000;
    a.header.quant_a = 16;
    a.header.tc_trace_len = 8;
    a.header.tau = 0.25;
    a.header.members = {MemberInfo{8, 16, 16, -3.0, 7.5}};
    a.header.models = {ModelFingerprint{"codec.gckp", 1234, 0xdeadbeef},
                       ModelFingerprint{"tc.gckp", 99, 42}};
    a.latent_stream = {1, 2, 3};
    a.correction_stream = {4, 5};
    a.basis_blob = {6};

    auto bytes = a.serialize();
    auto back = Archive::parse(bytes);
    EXPECT_EQ(back.header.kind, a.header.kind);
    EXPECT_EQ(back.header.tau, a.header.tau);
    EXPECT_EQ(back.header.members[0].norm_max, 7.5);
    EXPECT_EQ(back.header.models, a.header.models);
    EXPECT_EQ(back.latent_stream, a.latent_stream);
    EXPECT_EQ(back.correction_stream, a.correction_stream);
    EXPECT_EQ(back.basis_blob, a.basis_blob);
}

TEST(Archive, CorruptByteDetected) {
    Archive a;
    a.header.members = {MemberInfo{4, 4, 4, 0.0, 1.0}};
    auto bytes = a.serialize();
    bytes[bytes.size() / 2] ^= 0x40;
    EXPECT_THROW(Archive::parse(bytes), std::runtime_error);
}

namespace {

struct PipelineFixture : ::testing::Test {
    static TrainedCodec* models;
    static std::vector<TensorField>* fields;

    static void SetUpTestSuite() {
        fields = new std::vector<TensorField>(tiny_fields(2, 42));
        models = new TrainedCodec(train_models(*fields, tiny_pipeline_config(), CodecKind::gcd));
        std::string dir =
            (std::filesystem::temp_directory_path() / "gcdtc_test_models").string();
        save_models(*models, dir);
    }
    static void TearDownTestSuite() {
        delete models;
        delete fields;
        models = nullptr;
        fields = nullptr;
    }

    double range() const {
        double lo = (*fields)[0].vmin, hi = (*fields)[0].vmax;
        for (const auto& f : *fields) {
            lo = std::min(lo, f.vmin);
            hi = std::max(hi, f.vmax);
        }
        return hi - lo;
    }
};

TrainedCodec* PipelineFixture::models = nullptr;
std::vector<TensorField>* PipelineFixture::fields = nullptr;

}  // namespace

TEST_F(PipelineFixture, CompressDecompressBitIdentical) {
    double tau = 0.05 * range() * 8.0;
    auto res = compress(*fields, *models, tau);
    auto archive = Archive::parse(res.archive_bytes);
    auto back = decompress(archive, *models);
    ASSERT_EQ(back.size(), fields->size());
    for (size_t m = 0; m < back.size(); ++m)
        EXPECT_EQ(back[m].values, res.reconstructed[m].values) << "member " << m;
}

TEST_F(PipelineFixture, BlockBoundHolds) {
    double tau = 0.01 * range() * 8.0;
    auto res = compress(*fields, *models, tau);
    for (size_t m = 0; m < fields->size(); ++m)
        EXPECT_LE(max_block_error((*fields)[m], res.reconstructed[m], 4, 4, 4), tau);
}

TEST_F(PipelineFixture, DeterministicArchiveAcrossCalls) {
    double tau = 0.05 * range() * 8.0;
    auto a = compress(*fields, *models, tau);
    auto b = compress(*fields, *models, tau);
    EXPECT_EQ(a.archive_bytes, b.archive_bytes);
}

TEST_F(PipelineFixture, ThreadCountDoesNotChangeBytes) {
    double tau = 0.05 * range() * 8.0;
    auto a = compress(*fields, *models, tau, 1);
    auto b = compress(*fields, *models, tau, 3);
    EXPECT_EQ(a.archive_bytes, b.archive_bytes);
    auto archive = Archive::parse(a.archive_bytes);
    auto one = decompress(archive, *models, 1);
    auto three = decompress(archive, *models, 3);
    for (size_t m = 0; m < one.size(); ++m) EXPECT_EQ(one[m].values, three[m].values);
}

TEST_F(PipelineFixture, BreakdownSumsToTotal) {
    double tau = 0.05 * range() * 8.0;
    auto res = compress(*fields, *models, tau);
    EXPECT_EQ(res.breakdown.total(), res.archive_bytes.size() + models->model_bytes());
    EXPECT_EQ(res.breakdown.model, models->model_bytes());
}

TEST_F(PipelineFixture, TighterTauCostsBytes) {
    double loose_tau = 0.05 * range() * 8.0;
    double tight_tau = 0.002 * range() * 8.0;
    auto points = sweep(*fields, *models, {tight_tau, loose_tau});
    EXPECT_LE(points[0].nrmse_value, points[1].nrmse_value);
    EXPECT_LE(points[0].cr, points[1].cr);
    auto csv = sweep_csv(points);
    EXPECT_NE(csv.find("tau,nrmse,cr,bytes_latent,bytes_corr,bytes_basis,bytes_model,bytes_tables"),
              std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(PipelineFixture, ModelDirRoundTrip) {
    std::string dir = (std::filesystem::temp_directory_path() / "gcdtc_test_models").string();
    auto loaded = load_models(dir);
    EXPECT_EQ(loaded.kind, models->kind);
    EXPECT_EQ(loaded.fingerprints, models->fingerprints);
    double tau = 0.05 * range() * 8.0;
    auto a = compress(*fields, *models, tau);
    auto b = compress(*fields, loaded, tau);
    EXPECT_EQ(a.archive_bytes, b.archive_bytes);
}

TEST_F(PipelineFixture, FingerprintMismatchRejected) {
    double tau = 0.05 * range() * 8.0;
    auto res = compress(*fields, *models, tau);
    auto archive = Archive::parse(res.archive_bytes);
    TrainedCodec other = load_models(
        (std::filesystem::temp_directory_path() / "gcdtc_test_models").string());
    other.fingerprints[0].crc ^= 1;
    EXPECT_THROW(decompress(archive, other), std::runtime_error);
}

TEST_F(PipelineFixture, InfeasibleTauRejected) {
    guard::GuaranteeConfig gc;
    gc.quant = models->cfg.quant;
    double floor = gc.feasibility_floor();
    EXPECT_THROW(compress(*fields, *models, floor * 0.5), std::invalid_argument);
}

TEST_F(PipelineFixture, GcaeSharesThePath) {
    auto cfg = tiny_pipeline_config();
    auto fields2 = tiny_fields(1, 77);
    auto ae = train_models(fields2, cfg, CodecKind::gcae);
    double range = fields2[0].vmax - fields2[0].vmin;
    double tau = 0.05 * range * 8.0;
    auto res = compress(fields2, ae, tau);
    auto archive = Archive::parse(res.archive_bytes);
    EXPECT_EQ(archive.header.kind, CodecKind::gcae);
    auto back = decompress(archive, ae);
    EXPECT_EQ(back[0].values, res.reconstructed[0].values);
    EXPECT_LE(max_block_error(fields2[0], back[0], 4, 4, 4), tau);
    auto points = sweep(fields2, ae, {tau});
    auto csv = sweep_csv(points);
    EXPECT_NE(csv.find("tau,nrmse,cr,"), std::string::npos);
}
