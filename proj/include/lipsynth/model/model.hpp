#pragma once

#include "lipsynth/model/acoustic.hpp"
#include "lipsynth/model/decoder.hpp"
#include "lipsynth/model/linguistic.hpp"

namespace lipsynth::model {

struct ModelInputs {
    Mat visual;                 // T_v x D_v
    std::vector<int> phonemes;  // T_p ids
    Mat prompt_mel;             // T_r x n_mels (unused under the acoustic ablation)
    Eigen::VectorXd timbre;     // D_t (likewise)
};

// Ground-truth prosody tracks at the linguistic rate, used for teacher
// forcing during training. f0 in Hz, energy in log1p domain.
struct ProsodyTeacher {
    Eigen::VectorXd f0;
    Eigen::VectorXd energy;
};

class Model {
public:
    Model() = default;
    Model(const ModelConfig& cfg, uint64_t seed);

    // teacher == nullptr -> inference mode (predicted tracks feed the
    // prosody embedding). Flags sever paths per the ablation table.
    DecoderOutput forward(nn::Ctx& ctx, const ModelInputs& in, const AblationFlags& flags,
                          const ProsodyTeacher* teacher = nullptr) const;

    nn::ParamSet params() const;
    const ModelConfig& config() const { return cfg_; }

    LinguisticEncoder linguistic;
    AcousticEncoder acoustic;
    SpecLingDecoder decoder;

private:
    ModelConfig cfg_;
};

}  // namespace lipsynth::model
