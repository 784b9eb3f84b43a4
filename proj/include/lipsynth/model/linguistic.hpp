#pragma once

#include "lipsynth/model/config.hpp"

namespace lipsynth::model {

// Semantic branch: visual map (MLP + Transformer encoder + PE), phoneme map
// (embedding + PE + Phoneme Encoder + MLP), reference-transformer recursion,
// and the stacked-Conformer refinement that emits E_ling.
class LinguisticEncoder {
public:
    LinguisticEncoder() = default;
    LinguisticEncoder(const ModelConfig& cfg, Rng& rng);

    // E_v (T_v x D_v) -> H_v (T_v x D): TransformerEncoder(MLP(E_v) + PE).
    nn::Tensor map_visual(nn::Ctx& ctx, const Mat& e_v) const;

    // Phoneme ids -> H_p (T_p x D): MLP(PhonemeEncoder(embed(ids) + PE)).
    nn::Tensor map_phoneme(nn::Ctx& ctx, const std::vector<int>& ids) const;

    // R^{[0]} = H_v; R^{[i]} = LN(R^{[i-1]} + Attn(R^{[i-1]}, H_p, H_p)).
    nn::Tensor reference_transformer(nn::Ctx& ctx, const nn::Tensor& h_v, const nn::Tensor& h_p,
                                     long n) const;

    // Stacked Conformer blocks, shape-preserving.
    nn::Tensor semantic_attention(nn::Ctx& ctx, const nn::Tensor& r) const;

    // Full composition; with no_l2t_sra the phoneme stream is never touched.
    nn::Tensor forward(nn::Ctx& ctx, const Mat& e_v, const std::vector<int>& phoneme_ids,
                       bool no_l2t_sra) const;

    void collect(nn::ParamSet& ps, const std::string& prefix) const;

    nn::Linear visual_mlp;
    std::vector<nn::FftBlock> visual_encoder;
    nn::Embedding phoneme_embed;
    std::vector<nn::FftBlock> phoneme_encoder;  // runs at the embedding width
    nn::Linear phoneme_mlp;
    std::vector<nn::MultiHeadAttention> reference_attn;
    std::vector<nn::LayerNorm> reference_ln;
    std::vector<nn::ConformerBlock> conformers;

    long hidden_dim = 0;
    long visual_dim = 0;
    long phoneme_dim = 0;
    long inventory = 0;
    long n_reference = 0;
};

}  // namespace lipsynth::model
