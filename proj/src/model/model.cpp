#include "lipsynth/model/model.hpp"

#include <stdexcept>

namespace lipsynth::model {

using nn::Tensor;

void SRAConfig::validate() const {
    if (n_reference_layers < 0)
        throw std::invalid_argument("model config: sra.n_reference_layers must be >= 0");
    if (conformer_layers < 0)
        throw std::invalid_argument("model config: conformer_layers must be >= 0");
}

void ModelConfig::validate() const {
    block.validate();
    sra.validate();
    if (visual_dim < 1) throw std::invalid_argument("model config: visual_dim must be >= 1");
    if (phoneme_inventory < 2)
        throw std::invalid_argument("model config: phoneme_inventory must be >= 2");
    if (phoneme_embedding_dim < 1 || phoneme_embedding_dim % block.heads != 0)
        throw std::invalid_argument(
            "model config: phoneme_embedding_dim must be positive and divisible by heads");
    if (timbre_dim < 1) throw std::invalid_argument("model config: timbre_dim must be >= 1");
    if (n_mels < 1) throw std::invalid_argument("model config: n_mels must be >= 1");
    if (unit_clusters < 1) throw std::invalid_argument("model config: unit_clusters must be >= 1");
    if (visual_encoder_layers < 0 || phoneme_encoder_blocks < 0 || prompt_encoder_blocks < 0)
        throw std::invalid_argument("model config: encoder depths must be >= 0");
    if (mel_decoder_layers < 1)
        throw std::invalid_argument("model config: mel_decoder_layers must be >= 1");
    if (mel_decoder_channels < 1)
        throw std::invalid_argument("model config: mel_decoder_channels must be >= 1");
    if (mel_decoder_kernel < 1 || mel_decoder_kernel % 2 == 0)
        throw std::invalid_argument("model config: mel_decoder_kernel must be odd");
    if (length_factor < 1) throw std::invalid_argument("model config: length_factor must be >= 1");
}

Model::Model(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    cfg_ = cfg;
    Rng rng(seed);
    linguistic = LinguisticEncoder(cfg_, rng);
    acoustic = AcousticEncoder(cfg_, rng);
    decoder = SpecLingDecoder(cfg_, rng);
}

DecoderOutput Model::forward(nn::Ctx& ctx, const ModelInputs& in, const AblationFlags& flags,
                             const ProsodyTeacher* teacher) const {
    const Tensor e_ling = linguistic.forward(ctx, in.visual, in.phonemes, flags.no_l2t_sra);
    const long t_v = e_ling.rows();
    const long t_mel = t_v * cfg_.length_factor;

    DecoderOutput out;
    Tensor acoustic_in;
    if (flags.no_acoustic_branch) {
        acoustic_in = decoder.constant_excitation_input(t_mel);
    } else {
        const Tensor e_spk = acoustic.encode_prompt(ctx, in.prompt_mel);
        const Tensor e_spk_ling = acoustic.align_prompt(ctx, e_ling, e_spk);
        out.pitch_pred = acoustic.predict_pitch(ctx, e_spk_ling);
        if (!flags.no_energy_predictor) out.energy_pred = acoustic.predict_energy(ctx, e_spk_ling);

        Tensor f0_track, energy_track;
        if (teacher) {
            if (teacher->f0.size() != t_v)
                throw std::invalid_argument("model: teacher f0 length != T_v");
            Mat f0(t_v, 1);
            f0.col(0) = teacher->f0;
            f0_track = Tensor(f0);
            if (!flags.no_energy_predictor) {
                if (teacher->energy.size() != t_v)
                    throw std::invalid_argument("model: teacher energy length != T_v");
                Mat en(t_v, 1);
                en.col(0) = teacher->energy;
                energy_track = Tensor(en);
            }
        } else {
            f0_track = nn::relu(out.pitch_pred);  // predictions, 0-clamped Hz
            if (!flags.no_energy_predictor) energy_track = out.energy_pred;
        }
        const Tensor prosody =
            acoustic.embed_prosody(ctx, f0_track, energy_track, flags.no_energy_predictor);
        const Tensor timbre_row = acoustic.project_timbre(in.timbre);
        const Tensor summed = nn::add_row_broadcast(nn::add(e_spk_ling, prosody), timbre_row);
        acoustic_in = length_regulate(summed, cfg_.length_factor);
    }

    const Tensor semantic_in = length_regulate(e_ling, cfg_.length_factor);

    Tensor exc_hidden, form_hidden;
    const Tensor excitation = decoder.excitation_generator(ctx, acoustic_in, &exc_hidden);
    const Tensor formant = decoder.formant_generator(ctx, semantic_in, &form_hidden);
    auto [mel_coarse, mel_fine] = decoder.fuse_and_decode(ctx, excitation, formant);
    out.mel_coarse = mel_coarse;
    out.mel_fine = mel_fine;
    out.unit_logits = decoder.predict_units(ctx, nn::add(exc_hidden, form_hidden));
    return out;
}

nn::ParamSet Model::params() const {
    nn::ParamSet ps;
    linguistic.collect(ps, "linguistic");
    acoustic.collect(ps, "acoustic");
    decoder.collect(ps, "decoder");
    return ps;
}

}  // namespace lipsynth::model
