#pragma once

#include "lipsynth/dsp/audio.hpp"

#include <vector>

namespace lipsynth::dsp {

struct PitchConfig {
    double f0_min = 65.0;
    double f0_max = 600.0;
    double hop_seconds = 0.010;
    double voicing_threshold = 0.45;

    void validate() const;
};

// Frame-level prosody: f0 in Hz (0 where unvoiced), per-frame flag, and the
// energy track (filled from frame_energy when the pipeline combines them).
struct ProsodyTrack {
    std::vector<double> f0_hz;
    std::vector<double> energy;
    std::vector<bool> voiced;
    long num_frames() const { return static_cast<long>(f0_hz.size()); }
};

ProsodyTrack extract_f0(const AudioWaveform& wav, const PitchConfig& cfg);

}  // namespace lipsynth::dsp
