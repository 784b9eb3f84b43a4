#pragma once

#include "lipsynth/nn/layers.hpp"

namespace lipsynth::nn {

// Hyperparameters shared by every trainable block.
struct BlockConfig {
    int hidden_dim = 512;
    int heads = 8;
    int fft_blocks_per_generator = 3;
    int conformer_layers = 8;
    int conv_kernel = 9;
    double dropout = 0.1;
    int ff_expansion = 4;

    void validate() const {
        if (hidden_dim < 1 || heads < 1) throw std::runtime_error("block config: bad dims");
        if (hidden_dim % heads != 0)
            throw std::runtime_error("block config: hidden_dim not divisible by heads");
        if (conv_kernel < 1 || conv_kernel % 2 == 0)
            throw std::runtime_error("block config: conv_kernel must be odd");
    }
};

// Feed-forward Transformer block: self-attention followed by a two-layer
// 1D-convolutional feed-forward, each wrapped in residual + layer norm.
struct FftBlock {
    MultiHeadAttention attn;
    LayerNorm ln_attn, ln_ff;
    Conv1d conv1, conv2;
    double drop = 0.1;

    FftBlock() = default;
    FftBlock(const BlockConfig& cfg, Rng& rng)
        : attn(cfg.hidden_dim, cfg.heads, rng),
          ln_attn(cfg.hidden_dim),
          ln_ff(cfg.hidden_dim),
          conv1(cfg.hidden_dim, cfg.hidden_dim * cfg.ff_expansion, cfg.conv_kernel, rng),
          conv2(cfg.hidden_dim * cfg.ff_expansion, cfg.hidden_dim, cfg.conv_kernel, rng),
          drop(cfg.dropout) {}

    Tensor forward(Ctx& ctx, const Tensor& x) const;
    void collect(ParamSet& ps, const std::string& prefix) const;
};

// Conformer block in the macaron layout: half-step feed-forward, self-attention,
// convolution module (pointwise + GLU + depthwise + pointwise), half-step
// feed-forward, final layer norm.
struct ConformerBlock {
    LayerNorm ln_ff1, ln_attn, ln_conv, ln_conv_mid, ln_ff2, ln_out;
    Linear ff1_a, ff1_b, ff2_a, ff2_b;
    MultiHeadAttention attn;
    Linear conv_point_in;   // D -> 2D, gated by GLU down to D
    Tensor conv_depth_w;    // k x D depthwise taps
    Linear conv_point_out;  // D -> D
    int conv_kernel = 9;
    double drop = 0.1;

    ConformerBlock() = default;
    ConformerBlock(const BlockConfig& cfg, Rng& rng);

    Tensor forward(Ctx& ctx, const Tensor& x) const;
    void collect(ParamSet& ps, const std::string& prefix) const;
};

// FastSpeech-2 style scalar-per-frame predictor: two 1D conv layers with
// normalization and dropout, then a linear head. Returns T x 1.
struct VariancePredictor {
    Conv1d conv1, conv2;
    LayerNorm ln1, ln2;
    Linear out;
    double drop = 0.1;

    VariancePredictor() = default;
    VariancePredictor(const BlockConfig& cfg, Rng& rng)
        : conv1(cfg.hidden_dim, cfg.hidden_dim, 3, rng),
          conv2(cfg.hidden_dim, cfg.hidden_dim, 3, rng),
          ln1(cfg.hidden_dim),
          ln2(cfg.hidden_dim),
          out(cfg.hidden_dim, 1, rng),
          drop(cfg.dropout) {}

    Tensor forward(Ctx& ctx, const Tensor& x) const;
    void collect(ParamSet& ps, const std::string& prefix) const;
};

}  // namespace lipsynth::nn
