#pragma once

#include "lipsynth/model/model.hpp"
#include "lipsynth/train/config.hpp"

namespace lipsynth::train {

struct LossBreakdown {
    double l_m = 0.0;
    double l_p = 0.0;
    double l_e = 0.0;
    double l_u = 0.0;
    double l_total = 0.0;
};

// Ground-truth targets already at the decoder's output rates.
struct Targets {
    Mat mel;                 // T_mel x n_mels
    Eigen::VectorXd f0;      // T_v, Hz (0 where unvoiced)
    Eigen::VectorXd energy;  // T_v, log1p domain
    std::vector<int> units;  // T_u
};

struct LossResult {
    nn::Tensor total;  // 1x1, differentiable
    LossBreakdown breakdown;
};

// The weighted-sum identity; returns a breakdown with l_total filled.
LossBreakdown weighted_total(double l_m, double l_p, double l_e, double l_u,
                             const LossWeights& w);

// l_m averages coarse+fine mel L1; l_p/l_e are predictor L1s (zeroed by their
// ablations); l_u is label-smoothed cross-entropy over unit frames.
LossResult compute_loss(const model::DecoderOutput& out, const Targets& targets,
                        const LossWeights& weights, const model::AblationFlags& flags);

}  // namespace lipsynth::train
