#pragma once

#include "lipsynth/model/config.hpp"

namespace lipsynth::model {

// Acoustic branch: speaker-prompt encoder, prompt-to-linguistic alignment,
// pitch/energy predictors, and the prosody/timbre embeddings consumed by the
// excitation path.
class AcousticEncoder {
public:
    AcousticEncoder() = default;
    AcousticEncoder(const ModelConfig& cfg, Rng& rng);

    // Prompt mel (T_r x n_mels) -> E_spk (T_r x D).
    nn::Tensor encode_prompt(nn::Ctx& ctx, const Mat& prompt_mel) const;

    // Cross-attention, query = E_ling, key/value = E_spk; residual from
    // E_ling + layer norm. Output length = E_ling length.
    nn::Tensor align_prompt(nn::Ctx& ctx, const nn::Tensor& e_ling, const nn::Tensor& e_spk) const;

    // Raw predictor outputs, T_v x 1. Pitch is in Hz (clamp at 0 when
    // consuming), energy in the log1p domain.
    nn::Tensor predict_pitch(nn::Ctx& ctx, const nn::Tensor& e_spk_ling) const;
    nn::Tensor predict_energy(nn::Ctx& ctx, const nn::Tensor& e_spk_ling) const;

    // Scalar tracks (T_v x 1) -> summed conv embeddings (T_v x D). The pitch
    // track is scaled by 1/100 before its conv so Hz-scale inputs sit near
    // unit scale; energy is consumed as-is (log1p domain). With
    // no_energy_embed only the pitch embedding is emitted.
    nn::Tensor embed_prosody(nn::Ctx& ctx, const nn::Tensor& f0_col, const nn::Tensor& energy_col,
                             bool no_energy_embed) const;

    // Timbre vector -> 1 x D row for broadcast injection.
    nn::Tensor project_timbre(const Eigen::VectorXd& timbre) const;

    void collect(nn::ParamSet& ps, const std::string& prefix) const;

    nn::Linear prompt_proj;
    std::vector<nn::FftBlock> prompt_encoder;
    nn::MultiHeadAttention align_attn;
    nn::LayerNorm align_ln;
    nn::VariancePredictor pitch_predictor, energy_predictor;
    nn::Conv1d pitch_embed, energy_embed;  // 1 -> D, kernel 3
    nn::Linear timbre_proj;

    long hidden_dim = 0;
    long n_mels = 0;
    long timbre_dim = 0;
};

}  // namespace lipsynth::model
