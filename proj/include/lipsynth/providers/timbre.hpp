#pragma once

#include "lipsynth/dsp/spectrogram.hpp"

#include <cstdint>
#include <string>

namespace lipsynth::providers {

struct TimbreEmbedding {
    Eigen::VectorXd vector;  // unit L2 norm
    long dim() const { return vector.size(); }
};

// Stub timbre encoder: mel time-mean through a fixed seed-keyed random
// projection, L2-normalized. Content-light by construction.
TimbreEmbedding timbre_stub(const dsp::MelSpectrogram& mel, uint64_t seed, long dim);

TimbreEmbedding load_timbre_file(const std::string& path, long expect_dim);
void save_timbre_file(const std::string& path, const TimbreEmbedding& emb);

double cosine_similarity(const TimbreEmbedding& a, const TimbreEmbedding& b);

}  // namespace lipsynth::providers
