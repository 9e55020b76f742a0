#ifndef GCDTC_CODEC_CONFIG_HPP
#define GCDTC_CODEC_CONFIG_HPP

#include <stdexcept>
#include <string>

namespace gcdtc::codec {

// Shared network/codec hyperparameters. The defaults are the full-scale
// settings (16x64x64 blocks, T=1000); desk_preset() is the small
// configuration used by tests and quick experiments.
struct CodecConfig {
    int block_d = 16, block_h = 64, block_w = 64;
    int steps = 1000;  // diffusion steps T
    double beta_min = 1e-5, beta_max = 5e-3;

    int latent_channels = 8;   // C_z: encoder output channels
    int embed_channels = 32;   // C_e: per-slice conditioning channels
    int enc_w1 = 16, enc_w2 = 32;
    int embed_hidden = 32;     // EU1 output channels
    int unet_base = 32;        // U-Net level widths: base, 2x, 4x
    int time_dim = 64;
    int gn_groups = 8;

    double lr = 1e-3;
    int train_batch = 2;

    static CodecConfig desk_preset() {
        CodecConfig c;
        c.block_d = 8;
        c.block_h = 16;
        c.block_w = 16;
        c.steps = 200;
        c.latent_channels = 4;
        c.embed_channels = 8;
        c.enc_w1 = 8;
        c.enc_w2 = 16;
        c.embed_hidden = 16;
        c.unet_base = 16;
        return c;
    }

    void validate() const {
        if (block_d % 4 != 0 || block_h % 8 != 0 || block_w % 8 != 0)
            throw std::invalid_argument(
                "block shape must be divisible by (4, 8, 8) for the encoder");
        if (block_h < 8 || block_w < 8 || block_d < 4)
            throw std::invalid_argument("block too small for the encoder stack");
        if (steps < 1) throw std::invalid_argument("diffusion steps must be >= 1");
        if (!(0.0 < beta_min && beta_min < beta_max && beta_max < 1.0))
            throw std::invalid_argument("beta range invalid");
        if (time_dim <= 0 || time_dim % 2 != 0)
            throw std::invalid_argument("time embedding dim must be even");
        if (unet_base % gn_groups != 0)
            throw std::invalid_argument("unet width must be divisible by the group-norm groups");
        if (latent_channels < 1 || embed_channels < 1 || enc_w1 < 1 || enc_w2 < 1 ||
            embed_hidden < 1)
            throw std::invalid_argument("channel counts must be positive");
    }

    // Latent element count per block: C_z * D/4 * H/8 * W/8.
    size_t latent_size() const {
        return static_cast<size_t>(latent_channels) * (block_d / 4) * (block_h / 8) *
               (block_w / 8);
    }
};

}  // namespace gcdtc::codec

#endif
