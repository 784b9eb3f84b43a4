#pragma once

#include "lipsynth/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipsynth::providers {

struct UnitCodebook {
    Mat centroids;  // K x D_u
    long clusters() const { return centroids.rows(); }
    long feature_dim() const { return centroids.cols(); }
};

struct SpeechUnits {
    std::vector<int> ids;  // in [0, K)
    double rate = 50.0;    // unit frames per second
    long num_frames() const { return static_cast<long>(ids.size()); }
};

// Standard k-means: k-means++ init, <= 100 Lloyd iterations, stop when the
// largest centroid shift drops below 1e-6. Deterministic given seed.
UnitCodebook train_unit_quantizer(const std::vector<Mat>& features, long k, uint64_t seed);

// Nearest centroid per frame, ties broken by lowest index.
SpeechUnits quantize_units(const Mat& features, const UnitCodebook& codebook);

// Mean squared distance of frames to their assigned centroids.
double quantization_distortion(const Mat& features, const UnitCodebook& codebook);

void save_codebook(const std::string& path, const UnitCodebook& codebook);
UnitCodebook load_codebook(const std::string& path);

}  // namespace lipsynth::providers
