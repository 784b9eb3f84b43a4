#include "lipsynth/model/acoustic.hpp"

#include <stdexcept>

namespace lipsynth::model {

using nn::Tensor;

AcousticEncoder::AcousticEncoder(const ModelConfig& cfg, Rng& rng)
    : prompt_proj(cfg.n_mels, cfg.block.hidden_dim, rng),
      align_attn(cfg.block.hidden_dim, cfg.block.heads, rng),
      align_ln(cfg.block.hidden_dim),
      pitch_predictor(cfg.block, rng),
      energy_predictor(cfg.block, rng),
      pitch_embed(1, cfg.block.hidden_dim, 3, rng),
      energy_embed(1, cfg.block.hidden_dim, 3, rng),
      timbre_proj(cfg.timbre_dim, cfg.block.hidden_dim, rng),
      hidden_dim(cfg.block.hidden_dim),
      n_mels(cfg.n_mels),
      timbre_dim(cfg.timbre_dim) {
    for (long i = 0; i < cfg.prompt_encoder_blocks; ++i) prompt_encoder.emplace_back(cfg.block, rng);
}

Tensor AcousticEncoder::encode_prompt(nn::Ctx& ctx, const Mat& prompt_mel) const {
    if (prompt_mel.rows() < 1) throw std::invalid_argument("acoustic: empty speaker prompt");
    if (prompt_mel.cols() != n_mels)
        throw std::invalid_argument("acoustic: prompt mel bands " + std::to_string(prompt_mel.cols()) +
                                    " != configured " + std::to_string(n_mels));
    Tensor x = prompt_proj.forward(Tensor(prompt_mel));
    for (const auto& block : prompt_encoder) x = block.forward(ctx, x);
    return x;
}

Tensor AcousticEncoder::align_prompt(nn::Ctx& ctx, const Tensor& e_ling, const Tensor& e_spk) const {
    (void)ctx;
    if (e_ling.cols() != hidden_dim || e_spk.cols() != hidden_dim)
        throw std::invalid_argument("acoustic: align inputs must be at hidden_dim");
    const Tensor attended = align_attn.forward(e_ling, e_spk, e_spk);
    return align_ln.forward(nn::add(e_ling, attended));
}

Tensor AcousticEncoder::predict_pitch(nn::Ctx& ctx, const Tensor& e_spk_ling) const {
    return pitch_predictor.forward(ctx, e_spk_ling);
}

Tensor AcousticEncoder::predict_energy(nn::Ctx& ctx, const Tensor& e_spk_ling) const {
    return energy_predictor.forward(ctx, e_spk_ling);
}

Tensor AcousticEncoder::embed_prosody(nn::Ctx& ctx, const Tensor& f0_col, const Tensor& energy_col,
                                      bool no_energy_embed) const {
    (void)ctx;
    if (f0_col.cols() != 1) throw std::invalid_argument("acoustic: f0 track must be T x 1");
    Tensor pitch = pitch_embed.forward(nn::scale(f0_col, 0.01));
    if (no_energy_embed) return pitch;
    if (!energy_col.defined() || energy_col.cols() != 1 || energy_col.rows() != f0_col.rows())
        throw std::invalid_argument("acoustic: energy track must match f0 track length");
    return nn::add(pitch, energy_embed.forward(energy_col));
}

Tensor AcousticEncoder::project_timbre(const Eigen::VectorXd& timbre) const {
    if (timbre.size() != timbre_dim)
        throw std::invalid_argument("acoustic: timbre dim " + std::to_string(timbre.size()) +
                                    " != configured " + std::to_string(timbre_dim));
    Mat row(1, timbre.size());
    row.row(0) = timbre.transpose();
    return timbre_proj.forward(Tensor(row));
}

void AcousticEncoder::collect(nn::ParamSet& ps, const std::string& prefix) const {
    prompt_proj.collect(ps, prefix + ".prompt_proj");
    for (size_t i = 0; i < prompt_encoder.size(); ++i)
        prompt_encoder[i].collect(ps, prefix + ".prompt_encoder." + std::to_string(i));
    align_attn.collect(ps, prefix + ".align_attn");
    align_ln.collect(ps, prefix + ".align_ln");
    pitch_predictor.collect(ps, prefix + ".pitch_predictor");
    energy_predictor.collect(ps, prefix + ".energy_predictor");
    pitch_embed.collect(ps, prefix + ".pitch_embed");
    energy_embed.collect(ps, prefix + ".energy_embed");
    timbre_proj.collect(ps, prefix + ".timbre_proj");
}

}  // namespace lipsynth::model
