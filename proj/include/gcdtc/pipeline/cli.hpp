#ifndef GCDTC_PIPELINE_CLI_HPP
#define GCDTC_PIPELINE_CLI_HPP

#include <chrono>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcdtc/io/raw.hpp"
#include "gcdtc/io/synthetic.hpp"
#include "gcdtc/pipeline/compress.hpp"

namespace gcdtc::pipeline {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 guarantee-infeasible.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInfeasible = 3;

namespace cli_detail {

inline bool parse_triple(const std::string& s, int& a, int& b, int& c) {
    return std::sscanf(s.c_str(), "%dx%dx%d", &a, &b, &c) == 3;
}

inline bool parse_range(const std::string& s, double& lo, double& hi) {
    return std::sscanf(s.c_str(), "%lf:%lf", &lo, &hi) == 2;
}

inline std::vector<double> parse_tau_list(const std::string& s) {
    std::vector<double> taus;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        taus.push_back(std::stod(s.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return taus;
}

inline PipelineConfig resolve_config(const std::string& preset, const std::string& config_path) {
    PipelineConfig cfg;
    if (preset == "desk") cfg = PipelineConfig::desk_preset();
    else if (!preset.empty() && preset != "full")
        throw std::invalid_argument("unknown preset '" + preset + "'");
    if (!config_path.empty()) cfg.load_file(config_path);
    return cfg;
}

inline bool infeasible_tau(const std::invalid_argument& e) {
    return std::string(e.what()).find("infeasible") != std::string::npos;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"GCDTC: guaranteed conditional-diffusion tensor compressor"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic .gsd dataset");
    std::string gen_out, gen_shape = "16x32x32", gen_amp = "20:60", gen_width = "3:7",
                gen_drift = "-0.3:0.3", gen_dtype = "f64";
    uint64_t gen_seed = 0;
    int gen_members = 1, gen_bumps = 4;
    double gen_noise = 0.5, gen_noise_sigma = 2.0;
    gen->add_option("--out", gen_out, "output .gsd path")->required();
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--members", gen_members, "member count");
    gen->add_option("--shape", gen_shape, "TxHxW");
    gen->add_option("--bumps", gen_bumps, "gaussian bump count");
    gen->add_option("--amp", gen_amp, "bump amplitude range lo:hi");
    gen->add_option("--width", gen_width, "bump width range lo:hi");
    gen->add_option("--drift", gen_drift, "drift velocity range lo:hi");
    gen->add_option("--noise", gen_noise, "smooth noise amplitude");
    gen->add_option("--noise-sigma", gen_noise_sigma, "noise low-pass sigma");
    gen->add_option("--dtype", gen_dtype, "f32 or f64");

    // train
    auto* train = app.add_subcommand("train", "train codec + tensor correction");
    std::string train_in, train_out, train_codec = "gcd", train_config, train_preset = "desk";
    int train_steps = -1, train_tc_epochs = -1;
    uint64_t train_seed = 0;
    bool train_seed_set = false;
    train->add_option("--input", train_in, "input .gsd")->required();
    train->add_option("--out", train_out, "model directory")->required();
    train->add_option("--codec", train_codec, "gcd or gcae");
    train->add_option("--config", train_config, "key=value config file");
    train->add_option("--preset", train_preset, "desk or full");
    train->add_option("--steps", train_steps, "training steps override");
    train->add_option("--tc-epochs", train_tc_epochs, "tensor-correction epochs override");
    train->add_option("--seed", train_seed, "seed override")->each([&](const std::string&) {
        train_seed_set = true;
    });

    // compress
    auto* comp = app.add_subcommand("compress", "compress a .gsd dataset to a .gcdt archive");
    std::string comp_in, comp_model, comp_out;
    double comp_tau = 0.0;
    int comp_threads = 1;
    comp->add_option("--input", comp_in, "input .gsd")->required();
    comp->add_option("--model-dir", comp_model, "trained model directory")->required();
    comp->add_option("--tau", comp_tau, "per-block l2 error bound (original units)")->required();
    comp->add_option("--out", comp_out, "output .gcdt path")->required();
    comp->add_option("--threads", comp_threads, "decode threads");

    // decompress
    auto* dec = app.add_subcommand("decompress", "decompress a .gcdt archive");
    std::string dec_in, dec_model, dec_out;
    int dec_threads = 1;
    dec->add_option("--input", dec_in, "input .gcdt")->required();
    dec->add_option("--model-dir", dec_model, "trained model directory")->required();
    dec->add_option("--out", dec_out, "output .gsd path")->required();
    dec->add_option("--threads", dec_threads, "decode threads");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "report NRMSE / block error / CR");
    std::string eval_orig, eval_recon, eval_archive, eval_model;
    eval->add_option("--original", eval_orig, "original .gsd")->required();
    eval->add_option("--reconstructed", eval_recon, "reconstructed .gsd")->required();
    eval->add_option("--archive", eval_archive, "archive for CR accounting");
    eval->add_option("--model-dir", eval_model, "model dir (enables decode timing)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "rate-distortion sweep over tau values");
    std::string sw_in, sw_model, sw_taus, sw_out;
    int sw_threads = 1;
    sw->add_option("--input", sw_in, "input .gsd")->required();
    sw->add_option("--model-dir", sw_model, "trained model directory")->required();
    sw->add_option("--tau-list", sw_taus, "comma-separated taus")->required();
    sw->add_option("--out", sw_out, "output CSV path")->required();
    sw->add_option("--threads", sw_threads, "decode threads");

    std::vector<const char*> argv;
    argv.push_back("gcdtc");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help() << std::endl;
            return kExitOk;
        }
        err << "usage error: " << e.what() << std::endl;
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            io::SynthConfig sc;
            sc.seed = gen_seed;
            if (!cli_detail::parse_triple(gen_shape, sc.t_len, sc.height, sc.width))
                throw std::invalid_argument("bad --shape, expected TxHxW");
            sc.bump_count = gen_bumps;
            if (!cli_detail::parse_range(gen_amp, sc.amp_min, sc.amp_max) ||
                !cli_detail::parse_range(gen_width, sc.width_min, sc.width_max) ||
                !cli_detail::parse_range(gen_drift, sc.drift_min, sc.drift_max))
                throw std::invalid_argument("bad range option, expected lo:hi");
            sc.noise_amp = gen_noise;
            sc.noise_sigma = gen_noise_sigma;
            std::vector<TensorField> fields;
            for (int m = 0; m < gen_members; ++m) {
                io::SynthConfig mc = sc;
                mc.seed = sc.seed + static_cast<uint64_t>(m);
                fields.push_back(io::generate_synthetic(mc, m));
            }
            auto dtype = gen_dtype == "f32" ? io::RawDtype::f32 : io::RawDtype::f64;
            size_t n = io::write_raw(fields, gen_out, dtype);
            out << "wrote " << gen_out << " (" << n << " bytes, " << fields.size()
                << " members)" << std::endl;
            return kExitOk;
        }

        if (train->parsed()) {
            auto cfg = cli_detail::resolve_config(train_preset, train_config);
            if (train_steps >= 0) cfg.train_steps = train_steps;
            if (train_tc_epochs >= 0) cfg.tc_epochs = train_tc_epochs;
            if (train_seed_set) cfg.seed = train_seed;
            CodecKind kind;
            if (train_codec == "gcd") kind = CodecKind::gcd;
            else if (train_codec == "gcae") kind = CodecKind::gcae;
            else throw std::invalid_argument("--codec must be gcd or gcae");

            auto fields = io::read_raw(train_in);
            auto models = train_models(fields, cfg, kind);
            save_models(models, train_out);
            double head = 0.0, tail = 0.0;
            size_t n = models.train_losses.size();
            size_t window = std::min<size_t>(50, n);
            if (n > 0) {
                head = std::accumulate(models.train_losses.begin(),
                                       models.train_losses.begin() + window, 0.0) / window;
                tail = std::accumulate(models.train_losses.end() - window,
                                       models.train_losses.end(), 0.0) / window;
            }
            out << "trained " << train_codec << " for " << n << " steps; running loss " << head
                << " -> " << tail << "; models in " << train_out << std::endl;
            return kExitOk;
        }

        if (comp->parsed()) {
            auto fields = io::read_raw(comp_in);
            auto models = load_models(comp_model);
            auto t0 = std::chrono::steady_clock::now();
            auto res = compress(fields, models, comp_tau, comp_threads);
            auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            io::write_file_bytes(comp_out, res.archive_bytes);
            size_t orig = raw_field_bytes(fields);
            out << "wrote " << comp_out << " (" << res.archive_bytes.size() << " bytes archive, "
                << res.breakdown.model << " bytes models); CR "
                << compression_ratio(orig, res.breakdown.total()) << " (with models), "
                << compression_ratio(orig, res.archive_bytes.size()) << " (archive only); "
                << dt << " s" << std::endl;
            return kExitOk;
        }

        if (dec->parsed()) {
            auto models = load_models(dec_model);
            auto archive = Archive::parse(io::read_file_bytes(dec_in));
            auto t0 = std::chrono::steady_clock::now();
            auto fields = decompress(archive, models, dec_threads);
            auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            io::write_raw(fields, dec_out);
            out << "wrote " << dec_out << "; decode time " << dt << " s" << std::endl;
            return kExitOk;
        }

        if (eval->parsed()) {
            auto orig = io::read_raw(eval_orig);
            auto recon = io::read_raw(eval_recon);
            if (orig.size() != recon.size())
                throw std::invalid_argument("member count mismatch between inputs");
            out << "nrmse " << nrmse(orig, recon) << std::endl;

            int gd = 4, gh = 4, gw = 4;
            double tau = 0.0;
            bool have_archive = !eval_archive.empty();
            Archive archive;
            if (have_archive) {
                archive = Archive::parse(io::read_file_bytes(eval_archive));
                gd = static_cast<int>(archive.header.guard_d);
                gh = static_cast<int>(archive.header.guard_h);
                gw = static_cast<int>(archive.header.guard_w);
                tau = archive.header.tau;
            }
            double worst = 0.0;
            for (size_t m = 0; m < orig.size(); ++m)
                worst = std::max(worst, max_block_error(orig[m], recon[m], gd, gh, gw));
            out << "max_block_error " << worst;
            if (have_archive) out << " (tau " << tau << ")";
            out << std::endl;

            if (have_archive) {
                size_t orig_bytes = raw_field_bytes(orig);
                size_t archive_bytes = io::read_file_bytes(eval_archive).size();
                uint64_t model_bytes = archive.header.model_bytes();
                out << "cr_with_models " << compression_ratio(orig_bytes, archive_bytes + model_bytes)
                    << std::endl;
                out << "cr_archive_only " << compression_ratio(orig_bytes, archive_bytes)
                    << std::endl;
                if (!eval_model.empty()) {
                    auto models = load_models(eval_model);
                    auto t0 = std::chrono::steady_clock::now();
                    auto again = decompress(archive, models, 1);
                    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                  .count();
                    out << "decode_seconds " << dt << std::endl;
                    bool identical = again.size() == recon.size();
                    for (size_t m = 0; identical && m < again.size(); ++m)
                        identical = again[m].values == recon[m].values;
                    out << "decode_matches_reconstructed " << (identical ? "yes" : "no")
                        << std::endl;
                }
            }
            return kExitOk;
        }

        if (sw->parsed()) {
            auto fields = io::read_raw(sw_in);
            auto models = load_models(sw_model);
            auto taus = cli_detail::parse_tau_list(sw_taus);
            auto points = sweep(fields, models, taus, sw_threads);
            auto csv = sweep_csv(points);
            io::write_file_bytes(sw_out, std::vector<uint8_t>(csv.begin(), csv.end()));
            out << "wrote " << sw_out << " (" << points.size() << " rows)" << std::endl;
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        if (cli_detail::infeasible_tau(e)) {
            err << "error: " << e.what() << std::endl;
            return kExitInfeasible;
        }
        err << "error: " << e.what() << std::endl;
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << std::endl;
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace gcdtc::pipeline

#endif
