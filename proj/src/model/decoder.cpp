#include "lipsynth/model/decoder.hpp"

#include <cstdio>
#include <stdexcept>

namespace lipsynth::model {

using nn::Tensor;

Tensor length_regulate(const Tensor& x, long factor) {
    if (factor < 1) throw std::invalid_argument("length_regulate: factor must be >= 1");
    return nn::repeat_rows(x, static_cast<int>(factor));
}

SpecLingDecoder::SpecLingDecoder(const ModelConfig& cfg, Rng& rng)
    : excitation_out(cfg.block.hidden_dim, cfg.n_mels, rng),
      formant_out(cfg.block.hidden_dim, cfg.n_mels, rng),
      unit_out(cfg.block.hidden_dim, cfg.unit_clusters, rng),
      const_excitation(nn::uniform_fan_in(1, cfg.block.hidden_dim, cfg.block.hidden_dim, rng), true),
      hidden_dim(cfg.block.hidden_dim),
      n_mels(cfg.n_mels),
      unit_clusters(cfg.unit_clusters) {
    for (long i = 0; i < cfg.block.fft_blocks_per_generator; ++i) {
        excitation_blocks.emplace_back(cfg.block, rng);
        formant_blocks.emplace_back(cfg.block, rng);
    }
    for (long i = 0; i < 2; ++i) unit_blocks.emplace_back(cfg.block, rng);

    const long c = cfg.mel_decoder_channels;
    const int k = static_cast<int>(cfg.mel_decoder_kernel);
    for (long i = 0; i < cfg.mel_decoder_layers; ++i) {
        const long cin = i == 0 ? cfg.n_mels : c;
        const long cout = i == cfg.mel_decoder_layers - 1 ? cfg.n_mels : c;
        mel_cnn.emplace_back(cin, cout, k, rng);
    }
}

Tensor SpecLingDecoder::excitation_generator(nn::Ctx& ctx, const Tensor& acoustic_in,
                                             Tensor* hidden_out) const {
    if (acoustic_in.cols() != hidden_dim)
        throw std::invalid_argument("excitation_generator: input must be at hidden_dim");
    Tensor x = acoustic_in;
    for (const auto& block : excitation_blocks) x = block.forward(ctx, x);
    if (hidden_out) *hidden_out = x;
    return excitation_out.forward(x);
}

Tensor SpecLingDecoder::formant_generator(nn::Ctx& ctx, const Tensor& semantic_in,
                                          Tensor* hidden_out) const {
    if (semantic_in.cols() != hidden_dim)
        throw std::invalid_argument("formant_generator: input must be at hidden_dim");
    Tensor x = semantic_in;
    for (const auto& block : formant_blocks) x = block.forward(ctx, x);
    if (hidden_out) *hidden_out = x;
    return formant_out.forward(x);
}

std::pair<Tensor, Tensor> SpecLingDecoder::fuse_and_decode(nn::Ctx& ctx, const Tensor& excitation,
                                                           const Tensor& formant) const {
    (void)ctx;
    if (excitation.rows() != formant.rows() || excitation.cols() != formant.cols())
        throw std::invalid_argument("fuse_and_decode: generator output shapes differ");
    const Tensor mel_coarse = nn::add(excitation, formant);
    Tensor h = mel_coarse;
    for (size_t i = 0; i < mel_cnn.size(); ++i) {
        h = mel_cnn[i].forward(h);
        if (i + 1 < mel_cnn.size()) h = nn::relu(h);
    }
    const Tensor mel_fine = nn::add(mel_coarse, h);
    return {mel_coarse, mel_fine};
}

Tensor SpecLingDecoder::predict_units(nn::Ctx& ctx, const Tensor& decoder_hidden) const {
    if (decoder_hidden.cols() != hidden_dim)
        throw std::invalid_argument("predict_units: input must be at hidden_dim");
    Tensor x = decoder_hidden;
    if (x.rows() % 2 != 0) {
        std::fprintf(stderr, "warning: predict_units trimming odd final frame (T_mel = %ld)\n",
                     x.rows());
        x = nn::slice_rows(x, 0, x.rows() - 1);
    }
    if (x.rows() < 2) throw std::invalid_argument("predict_units: need at least 2 mel frames");
    x = nn::mean_pool_rows(x, 2);
    for (const auto& block : unit_blocks) x = block.forward(ctx, x);
    return unit_out.forward(x);
}

Tensor SpecLingDecoder::constant_excitation_input(long t_mel) const {
    if (t_mel < 1) throw std::invalid_argument("constant_excitation_input: t_mel must be >= 1");
    return nn::repeat_rows(const_excitation, static_cast<int>(t_mel));
}

void SpecLingDecoder::collect(nn::ParamSet& ps, const std::string& prefix) const {
    for (size_t i = 0; i < excitation_blocks.size(); ++i)
        excitation_blocks[i].collect(ps, prefix + ".excitation." + std::to_string(i));
    excitation_out.collect(ps, prefix + ".excitation_out");
    for (size_t i = 0; i < formant_blocks.size(); ++i)
        formant_blocks[i].collect(ps, prefix + ".formant." + std::to_string(i));
    formant_out.collect(ps, prefix + ".formant_out");
    for (size_t i = 0; i < mel_cnn.size(); ++i)
        mel_cnn[i].collect(ps, prefix + ".mel_cnn." + std::to_string(i));
    for (size_t i = 0; i < unit_blocks.size(); ++i)
        unit_blocks[i].collect(ps, prefix + ".units." + std::to_string(i));
    unit_out.collect(ps, prefix + ".unit_out");
    ps.add(prefix + ".const_excitation", const_excitation);
}

}  // namespace lipsynth::model
