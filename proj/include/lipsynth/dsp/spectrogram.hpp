#pragma once

#include "lipsynth/common.hpp"
#include "lipsynth/dsp/audio.hpp"

#include <vector>

namespace lipsynth::dsp {

struct SpectrogramConfig {
    int sample_rate = 16000;
    int fft_size = 1024;
    int hop = 160;   // 10 ms at 16 kHz
    int win = 640;   // 40 ms
    int n_mels = 80;
    double fmin = 0.0;
    double fmax = 8000.0;
    double log_floor = 1e-5;
    bool center = true;

    void validate() const;
    double hop_seconds() const { return static_cast<double>(hop) / sample_rate; }
};

// Frame-by-bin magnitudes, T x (fft_size/2 + 1).
struct LinearSpectrogram {
    Mat frames;
    double hop_seconds = 0.010;
    long num_frames() const { return frames.rows(); }
};

// Natural-log mel magnitudes, T x n_mels, floored at log(log_floor).
struct MelSpectrogram {
    Mat frames;
    double hop_seconds = 0.010;
    long num_frames() const { return frames.rows(); }
    long num_bands() const { return frames.cols(); }
};

// Triangular mel filterbank, n_mels x (fft_size/2 + 1).
Mat mel_filterbank(const SpectrogramConfig& cfg);

// Center frequencies (Hz) of the filterbank triangles, length n_mels + 2
// (edges included); band m peaks at entry m + 1.
std::vector<double> mel_band_edges_hz(const SpectrogramConfig& cfg);

LinearSpectrogram linear_spectrogram(const AudioWaveform& wav, const SpectrogramConfig& cfg);
MelSpectrogram mel_spectrogram(const AudioWaveform& wav, const SpectrogramConfig& cfg);
MelSpectrogram mel_from_linear(const LinearSpectrogram& lin, const SpectrogramConfig& cfg);

// Per-frame L2 norm of the magnitude bins.
std::vector<double> frame_energy(const LinearSpectrogram& spec);

// Orthonormal DCT-II over log-mel frames. Returns T x n_coeffs; when
// drop_c0 is set the 0th coefficient is excluded (coeffs 1..n_coeffs).
Mat mel_cepstra(const MelSpectrogram& mel, int n_coeffs, bool drop_c0);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

}  // namespace lipsynth::dsp
