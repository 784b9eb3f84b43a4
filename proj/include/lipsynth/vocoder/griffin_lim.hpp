#pragma once

#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/dsp/spectrogram.hpp"
#include "lipsynth/providers/units.hpp"

#include <cstdint>

namespace lipsynth::vocoder {

struct VocoderOptions {
    long iterations = 60;
    uint64_t seed = 0;
};

// Log-mel frames -> waveform via filterbank pseudo-inverse and iterative
// phase reconstruction. The unit sequence is accepted so a learned vocoder
// can slot in behind the same call; this implementation ignores it.
dsp::AudioWaveform griffin_lim_vocode(const dsp::MelSpectrogram& mel,
                                      const providers::SpeechUnits* units,
                                      const dsp::SpectrogramConfig& cfg,
                                      const VocoderOptions& opts = {});

}  // namespace lipsynth::vocoder
