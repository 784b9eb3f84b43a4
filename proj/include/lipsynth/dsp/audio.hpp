#pragma once

#include <string>
#include <vector>

namespace lipsynth::dsp {

// Mono waveform with samples in [-1, 1] after ingestion normalization.
struct AudioWaveform {
    std::vector<double> samples;
    int rate = 16000;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / static_cast<double>(rate);
    }
};

// Reads a single-channel RIFF/WAVE file (16-bit PCM or 32-bit IEEE float).
AudioWaveform read_wav(const std::string& path);

// Writes 16-bit PCM mono.
void write_wav(const std::string& path, const AudioWaveform& wav);

// Scales in place so the absolute peak lands on `peak`; silence stays silent.
void peak_normalize(AudioWaveform& wav, double peak = 0.95);

// Band-limited windowed-sinc resampling to `target_rate`.
AudioWaveform resample(const AudioWaveform& wav, int target_rate);

}  // namespace lipsynth::dsp
