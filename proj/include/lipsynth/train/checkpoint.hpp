#pragma once

#include "lipsynth/io/array_container.hpp"
#include "lipsynth/io/run_config.hpp"
#include "lipsynth/model/model.hpp"
#include "lipsynth/train/optimizer.hpp"

#include <string>

namespace lipsynth::train {

// On-disk training state: version tag, config snapshot, step counter, named
// f64 parameter arrays, and the optimizer moments.
struct Checkpoint {
    uint64_t step = 0;
    uint64_t opt_step = 0;
    std::string config_text;
    io::ArrayMap params;
    io::ArrayMap adam_m, adam_v;  // empty when saved without an optimizer
};

void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

Checkpoint snapshot(const model::Model& m, const Adam* opt, uint64_t step,
                    const io::RunConfig& cfg);

// Errors name every missing/extra/mis-shaped parameter.
void restore_params(model::Model& m, const Checkpoint& ck);
void restore_optimizer(Adam& opt, const Checkpoint& ck);

// Errors listing config keys whose stored value differs on model-shape
// prefixes (model., sra., units., spectrogram.n_mels).
void check_config_compatible(const io::RunConfig& current, const std::string& stored_text);

// Convenience wrappers used by the CLI and trainer.
void save_checkpoint(const std::string& path, const model::Model& m, const Adam* opt,
                     uint64_t step, const io::RunConfig& cfg);
struct LoadedCheckpoint {
    io::RunConfig config;
    uint64_t step = 0;
    uint64_t opt_step = 0;
    Checkpoint raw;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace lipsynth::train
