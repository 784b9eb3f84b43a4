#pragma once

#include "lipsynth/train/checkpoint.hpp"
#include "lipsynth/train/dataset.hpp"
#include "lipsynth/train/optimizer.hpp"

namespace lipsynth::train {

// One clipped gradient step with teacher forcing over the batch (loss
// averaged across examples). Aborts on non-finite loss.
LossBreakdown train_step(model::Model& m, Adam& opt, const std::vector<Example>& batch,
                         const io::RunConfig& cfg, Rng& rng);

// Teacher-forced loss without gradients (validation).
LossBreakdown eval_loss(const model::Model& m, const std::vector<Example>& batch,
                        const io::RunConfig& cfg);

struct TrainingOutcome {
    uint64_t steps = 0;
    LossBreakdown first;
    LossBreakdown last;
    std::string checkpoint_path;
};

// Epoch loop with per-epoch validation logging, LR decay, final checkpoint at
// <out_dir>/model.ckpt and metric log at <out_dir>/train_log.jsonl.
TrainingOutcome run_training(const Dataset& train_set, const Dataset* val_set, io::RunConfig cfg,
                             const std::string& out_dir, const std::string& resume_path = "");

}  // namespace lipsynth::train
