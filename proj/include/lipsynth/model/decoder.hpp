#pragma once

#include "lipsynth/model/config.hpp"

namespace lipsynth::model {

// What the decoder hands back per utterance. pitch_pred/energy_pred are
// filled by the full model (empty under the acoustic ablation / energy
// ablation respectively).
struct DecoderOutput {
    nn::Tensor mel_coarse;   // T_mel x n_mels
    nn::Tensor mel_fine;     // T_mel x n_mels
    nn::Tensor unit_logits;  // T_u x K
    nn::Tensor pitch_pred;   // T_v x 1
    nn::Tensor energy_pred;  // T_v x 1
};

// Each frame repeated `factor` consecutive times (25 Hz -> 100 Hz bridge).
nn::Tensor length_regulate(const nn::Tensor& x, long factor);

// Source-filter synthesis head: excitation + formant generators, additive
// fusion, residual Mel-Decoder CNN, and the Linguistic Predictor.
class SpecLingDecoder {
public:
    SpecLingDecoder() = default;
    SpecLingDecoder(const ModelConfig& cfg, Rng& rng);

    // acoustic_in: T_mel x D -> T_mel x n_mels. hidden_out (optional)
    // receives the final FFT-block output before projection.
    nn::Tensor excitation_generator(nn::Ctx& ctx, const nn::Tensor& acoustic_in,
                                    nn::Tensor* hidden_out = nullptr) const;
    nn::Tensor formant_generator(nn::Ctx& ctx, const nn::Tensor& semantic_in,
                                 nn::Tensor* hidden_out = nullptr) const;

    // mel_coarse = excitation + formant; mel_fine = mel_coarse + CNN(mel_coarse).
    std::pair<nn::Tensor, nn::Tensor> fuse_and_decode(nn::Ctx& ctx, const nn::Tensor& excitation,
                                                      const nn::Tensor& formant) const;

    // decoder_hidden: T_mel x D -> unit logits T_u x K (2:1 pair pooling).
    // Odd T_mel trims the final frame with a warning.
    nn::Tensor predict_units(nn::Ctx& ctx, const nn::Tensor& decoder_hidden) const;

    // Learned constant excitation input used under the acoustic ablation,
    // broadcast to t_mel rows.
    nn::Tensor constant_excitation_input(long t_mel) const;

    void collect(nn::ParamSet& ps, const std::string& prefix) const;

    std::vector<nn::FftBlock> excitation_blocks, formant_blocks, unit_blocks;
    nn::Linear excitation_out, formant_out, unit_out;
    std::vector<nn::Conv1d> mel_cnn;  // 5-layer residual refiner
    nn::Tensor const_excitation;      // 1 x D

    long hidden_dim = 0;
    long n_mels = 0;
    long unit_clusters = 0;
};

}  // namespace lipsynth::model
