#include "lipsynth/model/linguistic.hpp"

#include <stdexcept>

namespace lipsynth::model {

using nn::Tensor;

LinguisticEncoder::LinguisticEncoder(const ModelConfig& cfg, Rng& rng)
    : visual_mlp(cfg.visual_dim, cfg.block.hidden_dim, rng),
      phoneme_embed(cfg.phoneme_inventory, cfg.phoneme_embedding_dim, rng),
      phoneme_mlp(cfg.phoneme_embedding_dim, cfg.block.hidden_dim, rng),
      hidden_dim(cfg.block.hidden_dim),
      visual_dim(cfg.visual_dim),
      phoneme_dim(cfg.phoneme_embedding_dim),
      inventory(cfg.phoneme_inventory),
      n_reference(cfg.sra.n_reference_layers) {
    for (long i = 0; i < cfg.visual_encoder_layers; ++i) visual_encoder.emplace_back(cfg.block, rng);

    nn::BlockConfig pcfg = cfg.block;
    pcfg.hidden_dim = static_cast<int>(cfg.phoneme_embedding_dim);
    for (long i = 0; i < cfg.phoneme_encoder_blocks; ++i) phoneme_encoder.emplace_back(pcfg, rng);

    for (long i = 0; i < cfg.sra.n_reference_layers; ++i) {
        reference_attn.emplace_back(cfg.block.hidden_dim, cfg.block.heads, rng);
        reference_ln.emplace_back(cfg.block.hidden_dim);
    }
    for (long i = 0; i < cfg.sra.conformer_layers; ++i) conformers.emplace_back(cfg.block, rng);
}

Tensor LinguisticEncoder::map_visual(nn::Ctx& ctx, const Mat& e_v) const {
    if (e_v.rows() < 1) throw std::invalid_argument("linguistic: empty visual features");
    if (e_v.cols() != visual_dim)
        throw std::invalid_argument("linguistic: visual dim " + std::to_string(e_v.cols()) +
                                    " != configured " + std::to_string(visual_dim));
    Tensor x = visual_mlp.forward(Tensor(e_v));
    x = nn::add(x, Tensor(nn::positional_encoding(e_v.rows(), hidden_dim)));
    for (const auto& block : visual_encoder) x = block.forward(ctx, x);
    return x;
}

Tensor LinguisticEncoder::map_phoneme(nn::Ctx& ctx, const std::vector<int>& ids) const {
    if (ids.empty()) throw std::invalid_argument("linguistic: empty phoneme sequence");
    for (int id : ids)
        if (id < 0 || id >= inventory)
            throw std::invalid_argument("linguistic: phoneme id " + std::to_string(id) +
                                        " outside inventory of " + std::to_string(inventory));
    Tensor x = phoneme_embed.forward(ids);
    x = nn::add(x, Tensor(nn::positional_encoding(static_cast<long>(ids.size()), phoneme_dim)));
    for (const auto& block : phoneme_encoder) x = block.forward(ctx, x);
    return phoneme_mlp.forward(x);
}

Tensor LinguisticEncoder::reference_transformer(nn::Ctx& ctx, const Tensor& h_v, const Tensor& h_p,
                                                long n) const {
    (void)ctx;
    if (n < 0) throw std::invalid_argument("reference_transformer: n must be >= 0");
    if (n > static_cast<long>(reference_attn.size()))
        throw std::invalid_argument("reference_transformer: n exceeds constructed layers");
    if (h_v.cols() != hidden_dim || (n > 0 && h_p.cols() != hidden_dim))
        throw std::invalid_argument("reference_transformer: inputs must be at hidden_dim");
    Tensor r = h_v;  // R^{[0]}
    for (long i = 0; i < n; ++i) {
        const Tensor attended = reference_attn[static_cast<size_t>(i)].forward(r, h_p, h_p);
        r = reference_ln[static_cast<size_t>(i)].forward(nn::add(r, attended));
    }
    return r;
}

Tensor LinguisticEncoder::semantic_attention(nn::Ctx& ctx, const Tensor& r) const {
    if (r.cols() != hidden_dim)
        throw std::invalid_argument("semantic_attention: input must be at hidden_dim");
    Tensor x = r;
    for (const auto& block : conformers) x = block.forward(ctx, x);
    return x;
}

Tensor LinguisticEncoder::forward(nn::Ctx& ctx, const Mat& e_v, const std::vector<int>& phoneme_ids,
                                  bool no_l2t_sra) const {
    const Tensor h_v = map_visual(ctx, e_v);
    if (no_l2t_sra) return semantic_attention(ctx, h_v);
    const Tensor h_p = map_phoneme(ctx, phoneme_ids);
    const Tensor r = reference_transformer(ctx, h_v, h_p, n_reference);
    return semantic_attention(ctx, r);
}

void LinguisticEncoder::collect(nn::ParamSet& ps, const std::string& prefix) const {
    visual_mlp.collect(ps, prefix + ".visual_mlp");
    for (size_t i = 0; i < visual_encoder.size(); ++i)
        visual_encoder[i].collect(ps, prefix + ".visual_encoder." + std::to_string(i));
    phoneme_embed.collect(ps, prefix + ".phoneme_embed");
    for (size_t i = 0; i < phoneme_encoder.size(); ++i)
        phoneme_encoder[i].collect(ps, prefix + ".phoneme_encoder." + std::to_string(i));
    phoneme_mlp.collect(ps, prefix + ".phoneme_mlp");
    for (size_t i = 0; i < reference_attn.size(); ++i) {
        reference_attn[i].collect(ps, prefix + ".reference." + std::to_string(i) + ".attn");
        reference_ln[i].collect(ps, prefix + ".reference." + std::to_string(i) + ".ln");
    }
    for (size_t i = 0; i < conformers.size(); ++i)
        conformers[i].collect(ps, prefix + ".conformer." + std::to_string(i));
}

}  // namespace lipsynth::model
