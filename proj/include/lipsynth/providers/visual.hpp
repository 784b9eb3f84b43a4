#pragma once

#include "lipsynth/common.hpp"

#include <cstdint>
#include <string>

namespace lipsynth::providers {

struct VisualFeatures {
    Mat matrix;  // T_v x D_v
    double fps = 25.0;
};

// Loads the "visual" array from an array-container file; errors when its
// width differs from expect_dim.
VisualFeatures load_visual_file(const std::string& path, long expect_dim);
void save_visual_file(const std::string& path, const VisualFeatures& vis);

// Deterministic pseudo-random features keyed by (seed, utterance id).
VisualFeatures synthetic_visual(const std::string& utterance_id, uint64_t seed, long t_v, long d_v);

}  // namespace lipsynth::providers
