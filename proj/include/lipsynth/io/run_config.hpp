#pragma once

#include "lipsynth/dsp/pitch.hpp"
#include "lipsynth/dsp/spectrogram.hpp"
#include "lipsynth/model/config.hpp"
#include "lipsynth/train/config.hpp"

#include <map>
#include <string>

namespace lipsynth::io {

struct ProvidersConfig {
    std::string visual_mode = "synthetic";    // synthetic | file
    std::string phoneme_mode = "transcript";  // transcript | file
    std::string timbre_mode = "stub";         // stub | file
    std::string g2p_table;                    // path; empty = bundled default

    void validate() const;
};

struct UnitsConfig {
    long clusters = 200;
    long feature_dim = 40;  // mel-cepstra per 50 Hz unit frame

    void validate() const;
};

struct VocoderConfig {
    std::string kind = "griffin_lim";
    long iterations = 60;

    void validate() const;
};

// Whole-run configuration. Text form is one dotted `key = value` per line;
// unknown keys are rejected so hyperparameters cannot drift silently.
struct RunConfig {
    uint64_t seed = 1234;
    dsp::SpectrogramConfig spectrogram;
    dsp::PitchConfig pitch;
    model::ModelConfig model;
    train::LossWeights loss;
    train::TrainConfig train;
    ProvidersConfig providers;
    UnitsConfig units;
    VocoderConfig vocoder;
    double prompt_seconds = 0.5;

    // Re-derives coupled fields (mel band count, unit head size, pitch hop,
    // train seed) and validates every section.
    void finalize();
};

// Applies `text` on top of `base`; errors cite line numbers.
RunConfig parse_run_config_text(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});
std::string serialize_run_config(const RunConfig& cfg);

// key -> value view of the canonical serialization (checkpoint compatibility
// checks compare these).
std::map<std::string, std::string> config_key_values(const RunConfig& cfg);

}  // namespace lipsynth::io
