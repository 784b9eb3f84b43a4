#pragma once

#include "lipsynth/model/config.hpp"

#include <cstdint>

namespace lipsynth::train {

struct LossWeights {
    double lambda_m = 100.0;
    double lambda_p = 0.1;
    double lambda_e = 0.1;
    double lambda_u = 0.01;
    double label_smoothing = 0.1;

    void validate() const;
};

struct TrainConfig {
    long epochs = 80;
    double lr = 1e-3;
    long batch_size = 4;
    uint64_t seed = 1234;
    model::AblationFlags flags;
    long warmup_steps = 1000;
    double grad_clip = 1.0;
    long lr_decay_epochs = 20;
    double lr_decay_factor = 0.5;

    void validate() const;
};

}  // namespace lipsynth::train
