#pragma once

#include "lipsynth/nn/blocks.hpp"

namespace lipsynth::model {

struct SRAConfig {
    // Depth n of the reference-transformer recursion R^{[n]}; 0 only under
    // the no_l2t_sra ablation.
    long n_reference_layers = 2;
    long conformer_layers = 8;

    void validate() const;
};

struct AblationFlags {
    bool no_l2t_sra = false;
    bool no_acoustic_branch = false;
    bool no_energy_predictor = false;
};

struct ModelConfig {
    nn::BlockConfig block;
    SRAConfig sra;
    long visual_dim = 768;
    long phoneme_inventory = 64;
    long phoneme_embedding_dim = 256;
    long timbre_dim = 256;
    long n_mels = 80;
    long unit_clusters = 200;
    long visual_encoder_layers = 2;   // Transformer Encoder depth in the visual map
    long phoneme_encoder_blocks = 2;  // Phoneme Encoder depth
    long prompt_encoder_blocks = 2;   // Speaker Prompt Encoder depth
    long mel_decoder_channels = 256;
    long mel_decoder_kernel = 5;
    long mel_decoder_layers = 5;
    long length_factor = 4;  // 25 Hz linguistic -> 100 Hz mel

    void validate() const;
};

}  // namespace lipsynth::model
