#ifndef GCDTC_PIPELINE_CONFIG_HPP
#define GCDTC_PIPELINE_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gcdtc/codec/config.hpp"
#include "gcdtc/entropy/quantize.hpp"

namespace gcdtc::pipeline {

// Flat key=value configuration covering every tunable of the pipeline.
// Unknown keys are rejected; '#' starts a comment.
struct PipelineConfig {
    codec::CodecConfig codec;
    int guard_d = 4, guard_h = 4, guard_w = 4;
    entropy::QuantConfig quant;  // b=1000, a=16: latents, coefficients, raw residuals
    int tc_trace_len = 16;
    int tc_epochs = 200;
    int train_steps = 300;
    uint64_t seed = 0;
    int threads = 1;

    static PipelineConfig desk_preset() {
        PipelineConfig c;
        c.codec = codec::CodecConfig::desk_preset();
        c.tc_trace_len = 8;
        return c;
    }

    void validate() const {
        codec.validate();
        quant.validate();
        if (guard_d < 1 || guard_h < 1 || guard_w < 1)
            throw std::invalid_argument("guarantee block shape must be positive");
        if (tc_trace_len < 1) throw std::invalid_argument("tc_trace_len must be >= 1");
        if (tc_epochs < 0 || train_steps < 0)
            throw std::invalid_argument("epochs/steps must be non-negative");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }

    void set(const std::string& key, const std::string& value) {
        auto as_int = [&] { return std::stoi(value); };
        auto as_f64 = [&] { return std::stod(value); };
        if (key == "block_d") codec.block_d = as_int();
        else if (key == "block_h") codec.block_h = as_int();
        else if (key == "block_w") codec.block_w = as_int();
        else if (key == "diffusion_steps") codec.steps = as_int();
        else if (key == "beta_min") codec.beta_min = as_f64();
        else if (key == "beta_max") codec.beta_max = as_f64();
        else if (key == "latent_channels") codec.latent_channels = as_int();
        else if (key == "embed_channels") codec.embed_channels = as_int();
        else if (key == "enc_w1") codec.enc_w1 = as_int();
        else if (key == "enc_w2") codec.enc_w2 = as_int();
        else if (key == "embed_hidden") codec.embed_hidden = as_int();
        else if (key == "unet_base") codec.unet_base = as_int();
        else if (key == "time_dim") codec.time_dim = as_int();
        else if (key == "gn_groups") codec.gn_groups = as_int();
        else if (key == "lr") codec.lr = as_f64();
        else if (key == "train_batch") codec.train_batch = as_int();
        else if (key == "train_steps") train_steps = as_int();
        else if (key == "tc_epochs") tc_epochs = as_int();
        else if (key == "tc_trace_len") tc_trace_len = as_int();
        else if (key == "guard_d") guard_d = as_int();
        else if (key == "guard_h") guard_h = as_int();
        else if (key == "guard_w") guard_w = as_int();
        else if (key == "quant_b") quant.b = static_cast<uint32_t>(std::stoul(value));
        else if (key == "quant_a") quant.a = static_cast<uint32_t>(std::stoul(value));
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "threads") threads = as_int();
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key=value");
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            auto trim = [](std::string& s) {
                auto b = s.find_first_not_of(" \t");
                auto e = s.find_last_not_of(" \t");
                s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
            };
            trim(key);
            trim(value);
            set(key, value);
        }
    }

    std::string serialize() const {
        std::ostringstream o;
        o.precision(17);
        o << "block_d=" << codec.block_d << "\nblock_h=" << codec.block_h
          << "\nblock_w=" << codec.block_w << "\ndiffusion_steps=" << codec.steps
          << "\nbeta_min=" << codec.beta_min << "\nbeta_max=" << codec.beta_max
          << "\nlatent_channels=" << codec.latent_channels
          << "\nembed_channels=" << codec.embed_channels << "\nenc_w1=" << codec.enc_w1
          << "\nenc_w2=" << codec.enc_w2 << "\nembed_hidden=" << codec.embed_hidden
          << "\nunet_base=" << codec.unet_base << "\ntime_dim=" << codec.time_dim
          << "\ngn_groups=" << codec.gn_groups << "\nlr=" << codec.lr
          << "\ntrain_batch=" << codec.train_batch << "\ntrain_steps=" << train_steps
          << "\ntc_epochs=" << tc_epochs << "\ntc_trace_len=" << tc_trace_len
          << "\nguard_d=" << guard_d << "\nguard_h=" << guard_h << "\nguard_w=" << guard_w
          << "\nquant_b=" << quant.b << "\nquant_a=" << quant.a << "\nseed=" << seed
          << "\nthreads=" << threads << "\n";
        return o.str();
    }
};

}  // namespace gcdtc::pipeline

#endif
