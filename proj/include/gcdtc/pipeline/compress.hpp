#ifndef GCDTC_PIPELINE_COMPRESS_HPP
#define GCDTC_PIPELINE_COMPRESS_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gcdtc/codec/decode.hpp"
#include "gcdtc/codec/model.hpp"
#include "gcdtc/codec/train.hpp"
#include "gcdtc/entropy/huffman.hpp"
#include "gcdtc/guarantee/correct.hpp"
#include "gcdtc/io/raw.hpp"
#include "gcdtc/nn/checkpoint.hpp"
#include "gcdtc/pipeline/archive.hpp"
#include "gcdtc/pipeline/config.hpp"
#include "gcdtc/pipeline/metrics.hpp"
#include "gcdtc/tc/correction.hpp"

namespace gcdtc::pipeline {

using codec::GcaeModel;
using codec::GcdModel;
using codec::Tensor;

// A trained codec plus its tensor-correction network, as stored in a model
// directory: codec.gckp, tc.gckp, and a model.meta config echo.
struct TrainedCodec {
    CodecKind kind = CodecKind::gcd;
    PipelineConfig cfg;
    std::optional<GcdModel> gcd;
    std::optional<GcaeModel> gcae;
    std::optional<tc::TCNetwork> tcnet;
    std::vector<ModelFingerprint> fingerprints;  // filled on save/load
    std::vector<double> train_losses;            // filled by train_models

    uint64_t model_bytes() const {
        uint64_t n = 0;
        for (const auto& f : fingerprints) n += f.bytes;
        return n;
    }

    Tensor encode(const Tensor& block) const {
        return kind == CodecKind::gcd ? gcd->encode(block) : gcae->encode(block);
    }

    Tensor decode_latent(const Tensor& z) const {
        return kind == CodecKind::gcd ? codec::decode_block(*gcd, z) : gcae->reconstruct(z);
    }
};

namespace detail {

inline std::vector<Tensor> normalized_training_blocks(const std::vector<TensorField>& fields,
                                                      const PipelineConfig& cfg) {
    std::vector<Tensor> blocks;
    for (const auto& f : fields) {
        auto norm = normalize(f, norm_stats_of(f));
        auto [bs, grid] = partition(norm, cfg.codec.block_d, cfg.codec.block_h, cfg.codec.block_w);
        for (const auto& b : bs) blocks.push_back(codec::block_to_tensor(b));
    }
    return blocks;
}

// Quantize -> dequantize -> decode, the exact path a decompressor runs.
inline Tensor roundtrip_latent(const TrainedCodec& models, const Tensor& block,
                               const entropy::QuantConfig& quant) {
    Tensor z = models.encode(block);
    Tensor zq(z.shape());
    for (size_t i = 0; i < z.size(); ++i)
        zq[i] = entropy::dequantize_uniform(entropy::quantize_uniform(z[i], quant), quant);
    return models.decode_latent(zq);
}

// Deterministic block-parallel map: results land in slot order regardless of
// the thread count.
template <class Fn>
void parallel_blocks(size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    int n = std::min<int>(threads, static_cast<int>(count));
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Trains the codec on every block of the input fields, then decodes the
// training set through the quantized path and fits the tensor-correction
// network on the resulting trace pairs.
inline TrainedCodec train_models(const std::vector<TensorField>& fields, PipelineConfig cfg,
                                 CodecKind kind) {
    cfg.validate();
    if (fields.empty()) throw std::invalid_argument("no input fields");

    TrainedCodec out;
    out.kind = kind;
    out.cfg = cfg;
    auto blocks = detail::normalized_training_blocks(fields, cfg);

    Rng rng(cfg.seed);
    if (kind == CodecKind::gcd) {
        out.gcd.emplace(GcdModel::make(cfg.codec, cfg.seed));
        auto params = out.gcd->parameters();
        auto adam = nn::AdamState::init(params, cfg.codec.lr);
        for (int s = 0; s < cfg.train_steps; ++s)
            out.train_losses.push_back(codec::gcd_train_step(*out.gcd, blocks, adam, rng));
    } else {
        out.gcae.emplace(GcaeModel::make(cfg.codec, cfg.seed));
        auto params = out.gcae->parameters();
        auto adam = nn::AdamState::init(params, cfg.codec.lr);
        for (int s = 0; s < cfg.train_steps; ++s)
            out.train_losses.push_back(codec::gcae_train_step(*out.gcae, blocks, adam, rng));
    }

    // Tensor correction is trained on reconstructions of the training data.
    tc::TraceSet traces;
    traces.n_t = cfg.tc_trace_len;
    std::vector<Tensor> orig_rows, recon_rows;
    for (const auto& f : fields) {
        auto stats = norm_stats_of(f);
        auto norm = normalize(f, stats);
        auto [bs, grid] = partition(norm, cfg.codec.block_d, cfg.codec.block_h, cfg.codec.block_w);
        std::vector<Block3D> decoded = bs;
        detail::parallel_blocks(bs.size(), cfg.threads, [&](size_t k) {
            Tensor rec = detail::roundtrip_latent(out, codec::block_to_tensor(bs[k]), cfg.quant);
            codec::tensor_to_block(rec, decoded[k]);
        });
        auto recon_field = reassemble(decoded, grid);
        auto ts = tc::extract_traces(norm, recon_field, cfg.tc_trace_len);
        orig_rows.push_back(ts.original);
        recon_rows.push_back(ts.reconstructed);
    }
    int total_rows = 0;
    for (const auto& t : orig_rows) total_rows += t.dim(0);
    traces.original = Tensor({total_rows, cfg.tc_trace_len});
    traces.reconstructed = Tensor({total_rows, cfg.tc_trace_len});
    size_t off = 0;
    for (size_t k = 0; k < orig_rows.size(); ++k) {
        std::copy(orig_rows[k].data(), orig_rows[k].data() + orig_rows[k].size(),
                  traces.original.data() + off);
        std::copy(recon_rows[k].data(), recon_rows[k].data() + recon_rows[k].size(),
                  traces.reconstructed.data() + off);
        off += orig_rows[k].size();
    }
    out.tcnet.emplace(tc::tc_train(traces, cfg.tc_epochs, cfg.seed, cfg.codec.lr));
    return out;
}

inline void save_models(TrainedCodec& models, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string codec_path = dir + "/codec.gckp";
    std::string tc_path = dir + "/tc.gckp";
    auto codec_params = models.kind == CodecKind::gcd
                            ? models.gcd->store.all_const()
                            : models.gcae->store.all_const();
    nn::save_checkpoint(codec_params, codec_path);
    nn::save_checkpoint(models.tcnet->store.all_const(), tc_path);

    std::string meta = std::string("codec=") + (models.kind == CodecKind::gcd ? "gcd" : "gcae") +
                       "\n" + models.cfg.serialize();
    io::write_file_bytes(dir + "/model.meta", std::vector<uint8_t>(meta.begin(), meta.end()));

    models.fingerprints.clear();
    for (const std::string& name : {std::string("codec.gckp"), std::string("tc.gckp")}) {
        auto bytes = io::read_file_bytes(dir + "/" + name);
        models.fingerprints.push_back(
            ModelFingerprint{name, bytes.size(), crc32(bytes)});
    }
}

inline TrainedCodec load_models(const std::string& dir) {
    auto meta_bytes = io::read_file_bytes(dir + "/model.meta");
    std::istringstream meta(std::string(meta_bytes.begin(), meta_bytes.end()));

    TrainedCodec out;
    std::string line;
    bool kind_seen = false;
    while (std::getline(meta, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad model.meta line: " + line);
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "codec") {
            if (value == "gcd") out.kind = CodecKind::gcd;
            else if (value == "gcae") out.kind = CodecKind::gcae;
            else throw std::runtime_error("unknown codec kind in model.meta: " + value);
            kind_seen = true;
        } else {
            out.cfg.set(key, value);
        }
    }
    if (!kind_seen) throw std::runtime_error("model.meta missing codec kind");
    out.cfg.validate();

    if (out.kind == CodecKind::gcd) {
        out.gcd.emplace(GcdModel::make(out.cfg.codec, 0));
        nn::load_checkpoint(dir + "/codec.gckp", out.gcd->parameters());
    } else {
        out.gcae.emplace(GcaeModel::make(out.cfg.codec, 0));
        nn::load_checkpoint(dir + "/codec.gckp", out.gcae->parameters());
    }
    out.tcnet.emplace(tc::TCNetwork::make(out.cfg.tc_trace_len, 0));
    nn::load_checkpoint(dir + "/tc.gckp", out.tcnet->parameters());

    for (const std::string& name : {std::string("codec.gckp"), std::string("tc.gckp")}) {
        auto bytes = io::read_file_bytes(dir + "/" + name);
        out.fingerprints.push_back(ModelFingerprint{name, bytes.size(), crc32(bytes)});
    }
    return out;
}

struct CompressResult {
    Archive archive;
    std::vector<uint8_t> archive_bytes;
    std::vector<TensorField> reconstructed;  // encoder-side corrected output
    ByteBreakdown breakdown;
};

// Full encoder: normalize -> partition -> encode -> quantize/Huffman ->
// decode through the quantized path -> tensor correction -> PCA basis fit ->
// per-block correction -> archive. The returned reconstruction is
// bit-identical to what decompress() produces from the archive.
inline CompressResult compress(const std::vector<TensorField>& fields, const TrainedCodec& models,
                               double tau, int threads = 1) {
    if (fields.empty()) throw std::invalid_argument("no input fields");
    const PipelineConfig& cfg = models.cfg;

    guard::GuaranteeConfig gcfg;
    gcfg.gd = cfg.guard_d;
    gcfg.gh = cfg.guard_h;
    gcfg.gw = cfg.guard_w;
    gcfg.tau = tau;
    gcfg.quant = cfg.quant;
    gcfg.validate();

    CompressResult out;
    ArchiveHeader& hdr = out.archive.header;
    hdr.kind = models.kind;
    hdr.block_d = static_cast<uint32_t>(cfg.codec.block_d);
    hdr.block_h = static_cast<uint32_t>(cfg.codec.block_h);
    hdr.block_w = static_cast<uint32_t>(cfg.codec.block_w);
    hdr.guard_d = static_cast<uint32_t>(cfg.guard_d);
    hdr.guard_h = static_cast<uint32_t>(cfg.guard_h);
    hdr.guard_w = static_cast<uint32_t>(cfg.guard_w);
    hdr.steps = static_cast<uint32_t>(cfg.codec.steps);
    hdr.beta_min = cfg.codec.beta_min;
    hdr.beta_max = cfg.codec.beta_max;
    hdr.quant_b = cfg.quant.b;
    hdr.quant_a = cfg.quant.a;
    hdr.tc_trace_len = static_cast<uint32_t>(cfg.tc_trace_len);
    hdr.tau = tau;
    hdr.models = models.fingerprints;

    // Encode and quantize every block of every member.
    std::vector<int64_t> latent_symbols;
    std::vector<std::vector<Tensor>> dequantized(fields.size());
    std::vector<BlockGrid> grids(fields.size());
    for (size_t m = 0; m < fields.size(); ++m) {
        const TensorField& f = fields[m];
        f.validate();
        NormStats stats = norm_stats_of(f);
        hdr.members.push_back(MemberInfo{static_cast<uint32_t>(f.t_len),
                                         static_cast<uint32_t>(f.height),
                                         static_cast<uint32_t>(f.width), stats.min, stats.max});
        auto norm = normalize(f, stats);
        auto [blocks, grid] = partition(norm, cfg.codec.block_d, cfg.codec.block_h,
                                        cfg.codec.block_w);
        grids[m] = grid;
        dequantized[m].resize(blocks.size());
        for (size_t k = 0; k < blocks.size(); ++k) {
            Tensor z = models.encode(codec::block_to_tensor(blocks[k]));
            Tensor zq(z.shape());
            for (size_t i = 0; i < z.size(); ++i) {
                int64_t q = entropy::quantize_uniform(z[i], cfg.quant);
                latent_symbols.push_back(q);
                zq[i] = entropy::dequantize_uniform(q, cfg.quant);
            }
            dequantized[m][k] = std::move(zq);
        }
    }
    auto latent_enc = entropy::huffman_encode_stream(latent_symbols);
    out.archive.latent_stream = std::move(latent_enc.bytes);

    // Decode through the quantized path (what the decompressor will see),
    // then tensor-correct and denormalize.
    std::vector<TensorField> reconstructed(fields.size());
    for (size_t m = 0; m < fields.size(); ++m) {
        auto [blocks, grid] = partition(normalize(fields[m], norm_stats_of(fields[m])),
                                        cfg.codec.block_d, cfg.codec.block_h, cfg.codec.block_w);
        std::vector<Block3D> decoded = blocks;
        detail::parallel_blocks(blocks.size(), threads, [&](size_t k) {
            codec::tensor_to_block(models.decode_latent(dequantized[m][k]), decoded[k]);
        });
        auto recon_norm = reassemble(decoded, grid);
        auto enhanced = tc::tc_apply(*models.tcnet, recon_norm);
        reconstructed[m] = denormalize(enhanced, norm_stats_of(fields[m]));
    }

    // Fit the global residual basis in original data units, then correct
    // every guarantee block.
    std::vector<std::vector<double>> residuals;
    for (size_t m = 0; m < fields.size(); ++m) {
        auto r = guard::residual_blocks(fields[m], reconstructed[m], cfg.guard_d, cfg.guard_h,
                                        cfg.guard_w);
        residuals.insert(residuals.end(), r.begin(), r.end());
    }
    auto basis = guard::fit_basis_from_residuals(residuals, cfg.quant);

    std::vector<guard::CorrectionRecord> records;
    out.reconstructed.resize(fields.size());
    for (size_t m = 0; m < fields.size(); ++m) {
        auto [oblocks, ogrid] = partition(fields[m], cfg.guard_d, cfg.guard_h, cfg.guard_w);
        auto [rblocks, rgrid] = partition(reconstructed[m], cfg.guard_d, cfg.guard_h, cfg.guard_w);
        std::vector<guard::CorrectionRecord> member_records(oblocks.size());
        detail::parallel_blocks(oblocks.size(), threads, [&](size_t k) {
            auto [bt, rec] = guard::correct_block(oblocks[k].values, rblocks[k].values, basis,
                                                  gcfg);
            member_records[k] = std::move(rec);
        });
        // Decoder-visible output: records applied to the uncorrected
        // reconstruction through the shared code path.
        out.reconstructed[m] =
            guard::apply_corrections(reconstructed[m], member_records, basis, gcfg);
        out.reconstructed[m].member_id = fields[m].member_id;
        records.insert(records.end(), member_records.begin(), member_records.end());
    }

    size_t corr_tables = 0;
    out.archive.correction_stream = guard::serialize_corrections(records, &corr_tables);
    ByteWriter bw;
    basis.serialize(bw);
    out.archive.basis_blob = bw.take();

    out.archive_bytes = out.archive.serialize();
    out.breakdown.latent = out.archive.latent_stream.size() - latent_enc.table_bytes;
    out.breakdown.corrections = out.archive.correction_stream.size() - corr_tables;
    out.breakdown.basis = out.archive.basis_blob.size();
    out.breakdown.model = models.model_bytes();
    out.breakdown.tables = latent_enc.table_bytes + corr_tables +
                           (out.archive_bytes.size() - out.archive.latent_stream.size() -
                            out.archive.correction_stream.size() - out.archive.basis_blob.size());
    return out;
}

// Decoder: entropy-decode and dequantize latents, run the deterministic
// denoising decoder per block, tensor-correct, denormalize, apply the stored
// corrections. Output is bit-identical to the encoder-side reconstruction.
inline std::vector<TensorField> decompress(const Archive& archive, const TrainedCodec& models,
                                           int threads = 1) {
    const ArchiveHeader& hdr = archive.header;
    const PipelineConfig& cfg = models.cfg;
    if (hdr.models != models.fingerprints)
        throw std::runtime_error("model directory does not match the archive fingerprints");
    if (hdr.block_d != static_cast<uint32_t>(cfg.codec.block_d) ||
        hdr.block_h != static_cast<uint32_t>(cfg.codec.block_h) ||
        hdr.block_w != static_cast<uint32_t>(cfg.codec.block_w) ||
        hdr.steps != static_cast<uint32_t>(cfg.codec.steps) ||
        hdr.tc_trace_len != static_cast<uint32_t>(cfg.tc_trace_len))
        throw std::runtime_error("archive/model configuration mismatch");
    if ((hdr.kind == CodecKind::gcd) != (models.kind == CodecKind::gcd))
        throw std::runtime_error("archive codec kind does not match the model directory");

    entropy::QuantConfig quant{hdr.quant_b, hdr.quant_a};
    quant.validate();
    ByteReader lr(archive.latent_stream);
    auto symbols = entropy::huffman_decode_stream(lr);

    guard::GuaranteeConfig gcfg;
    gcfg.gd = static_cast<int>(hdr.guard_d);
    gcfg.gh = static_cast<int>(hdr.guard_h);
    gcfg.gw = static_cast<int>(hdr.guard_w);
    gcfg.tau = hdr.tau;
    gcfg.quant = quant;
    gcfg.validate();

    ByteReader br(archive.basis_blob);
    auto basis = guard::ResidualBasis::deserialize(br);
    ByteReader cr(archive.correction_stream);
    auto records = guard::deserialize_corrections(cr, basis.n);

    const size_t latent_len = cfg.codec.latent_size();
    std::vector<TensorField> out(hdr.members.size());
    size_t sym_off = 0;
    size_t rec_off = 0;
    for (size_t m = 0; m < hdr.members.size(); ++m) {
        const MemberInfo& info = hdr.members[m];
        TensorField shape_field = make_field(static_cast<int>(m), static_cast<int>(info.t_len),
                                             static_cast<int>(info.height),
                                             static_cast<int>(info.width));
        auto [blocks, grid] = partition(shape_field, cfg.codec.block_d, cfg.codec.block_h,
                                        cfg.codec.block_w);

        std::vector<Tensor> zs(blocks.size());
        for (size_t k = 0; k < blocks.size(); ++k) {
            if (sym_off + latent_len > symbols.size())
                throw std::runtime_error("latent stream shorter than the member shapes imply");
            Tensor z({cfg.codec.latent_channels, cfg.codec.block_d / 4, cfg.codec.block_h / 8,
                      cfg.codec.block_w / 8});
            for (size_t i = 0; i < latent_len; ++i)
                z[i] = entropy::dequantize_uniform(symbols[sym_off + i], quant);
            sym_off += latent_len;
            zs[k] = std::move(z);
        }
        detail::parallel_blocks(blocks.size(), threads, [&](size_t k) {
            codec::tensor_to_block(models.decode_latent(zs[k]), blocks[k]);
        });
        auto recon_norm = reassemble(blocks, grid);
        auto enhanced = tc::tc_apply(*models.tcnet, recon_norm);
        NormStats stats{info.norm_min, info.norm_max};
        auto recon = denormalize(enhanced, stats);

        auto [gblocks, ggrid] = partition(recon, gcfg.gd, gcfg.gh, gcfg.gw);
        if (rec_off + gblocks.size() > records.size())
            throw std::runtime_error("correction stream shorter than the member shapes imply");
        std::vector<guard::CorrectionRecord> member_records(records.begin() + rec_off,
                                                            records.begin() + rec_off +
                                                                gblocks.size());
        rec_off += gblocks.size();
        out[m] = guard::apply_corrections(recon, member_records, basis, gcfg);
        out[m].member_id = static_cast<int>(m);
    }
    if (sym_off != symbols.size())
        throw std::runtime_error("latent stream longer than the member shapes imply");
    if (rec_off != records.size())
        throw std::runtime_error("correction stream longer than the member shapes imply");
    return out;
}

// Rate-distortion point for one error bound.
struct RDPoint {
    double tau = 0.0;
    double nrmse_value = 0.0;
    double cr = 0.0;  // includes model bytes
    ByteBreakdown breakdown;
};

inline std::vector<RDPoint> sweep(const std::vector<TensorField>& fields,
                                  const TrainedCodec& models, const std::vector<double>& taus,
                                  int threads = 1) {
    if (taus.empty()) throw std::invalid_argument("tau list must not be empty");
    std::vector<RDPoint> points;
    const size_t original_bytes = raw_field_bytes(fields);
    for (double tau : taus) {
        auto res = compress(fields, models, tau, threads);
        RDPoint p;
        p.tau = tau;
        p.nrmse_value = nrmse(fields, res.reconstructed);
        p.breakdown = res.breakdown;
        p.cr = compression_ratio(original_bytes, res.breakdown.total());
        points.push_back(p);
    }
    return points;
}

inline std::string sweep_csv(const std::vector<RDPoint>& points) {
    std::ostringstream o;
    o.precision(12);
    o << "tau,nrmse,cr,bytes_latent,bytes_corr,bytes_basis,bytes_model,bytes_tables\n";
    for (const auto& p : points) {
        o << p.tau << "," << p.nrmse_value << "," << p.cr << "," << p.breakdown.latent << ","
          << p.breakdown.corrections << "," << p.breakdown.basis << "," << p.breakdown.model << ","
          << p.breakdown.tables << "\n";
    }
    return o.str();
}

}  // namespace gcdtc::pipeline

#endif
