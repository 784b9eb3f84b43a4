#include "lipsynth/vocoder/griffin_lim.hpp"

#include "lipsynth/dsp/fft.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

namespace lipsynth::vocoder {
namespace {

using ComplexSpec = std::vector<std::vector<std::complex<double>>>;  // T x bins

ComplexSpec stft(const std::vector<double>& x, const dsp::SpectrogramConfig& cfg,
                 const std::vector<double>& window, long t_frames) {
    long pad = cfg.win / 2;
    long n_bins = cfg.fft_size / 2 + 1;
    ComplexSpec spec(t_frames, std::vector<std::complex<double>>(n_bins));
    std::vector<double> frame(cfg.win);
    long len = static_cast<long>(x.size());
    for (long t = 0; t < t_frames; ++t) {
        long start = t * cfg.hop - pad;
        for (long i = 0; i < cfg.win; ++i) {
            long idx = start + i;
            double s = (idx >= 0 && idx < len) ? x[idx] : 0.0;
            frame[i] = s * window[i];
        }
        spec[t] = dsp::rfft(frame, cfg.fft_size);
    }
    return spec;
}

std::vector<double> istft(const ComplexSpec& spec, const dsp::SpectrogramConfig& cfg,
                          const std::vector<double>& window, long out_len) {
    long t_frames = static_cast<long>(spec.size());
    long pad = cfg.win / 2;
    long buf_len = (t_frames - 1) * cfg.hop + cfg.fft_size;
    std::vector<double> acc(buf_len, 0.0);
    std::vector<double> wsum(buf_len, 0.0);
    for (long t = 0; t < t_frames; ++t) {
        std::vector<double> frame = dsp::irfft(spec[t], cfg.fft_size);
        long start = t * cfg.hop - pad;
        for (long i = 0; i < cfg.win; ++i) {
            long idx = start + i + pad;  // shift so buffer index 0 is sample -pad
            acc[idx] += frame[i] * window[i];
            wsum[idx] += window[i] * window[i];
        }
    }
    std::vector<double> out(out_len, 0.0);
    for (long i = 0; i < out_len; ++i) {
        long idx = i + pad;
        if (idx < buf_len && wsum[idx] > 1e-9) out[i] = acc[idx] / wsum[idx];
    }
    return out;
}

}  // namespace

dsp::AudioWaveform griffin_lim_vocode(const dsp::MelSpectrogram& mel,
                                      const providers::SpeechUnits* units,
                                      const dsp::SpectrogramConfig& cfg,
                                      const VocoderOptions& opts) {
    (void)units;
    cfg.validate();
    if (!cfg.center) throw std::runtime_error("vocoder: requires center-padded spectrogram config");
    if (mel.frames.cols() != cfg.n_mels)
        throw std::runtime_error("vocoder: mel has " + std::to_string(mel.frames.cols()) +
                                 " bands, config expects " + std::to_string(cfg.n_mels));
    if (std::abs(mel.hop_seconds - cfg.hop_seconds()) > 1e-9)
        throw std::runtime_error("vocoder: mel hop does not match spectrogram config");
    if (opts.iterations < 0) throw std::runtime_error("vocoder: negative iteration count");
    long t_frames = mel.frames.rows();
    if (t_frames == 0) throw std::runtime_error("vocoder: empty mel");

    // undo the log, then lift mel magnitudes back to linear bins with the
    // filterbank right pseudo-inverse
    Mat mel_mag = mel.frames.array().exp().matrix();
    Mat fb = dsp::mel_filterbank(cfg);  // n_mels x bins
    Mat gram = fb * fb.transpose();
    gram.diagonal().array() += 1e-10;
    Mat pinv = fb.transpose() * gram.ldlt().solve(Mat::Identity(cfg.n_mels, cfg.n_mels));
    Mat lin = (mel_mag * pinv.transpose()).cwiseMax(0.0);  // T x bins

    long n_bins = cfg.fft_size / 2 + 1;
    std::vector<double> window = dsp::hann_window(cfg.win);
    long out_len = (t_frames - 1) * cfg.hop;
    if (out_len <= 0) out_len = cfg.hop;

    Rng rng(opts.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
    ComplexSpec spec(t_frames, std::vector<std::complex<double>>(n_bins));
    for (long t = 0; t < t_frames; ++t) {
        for (long k = 0; k < n_bins; ++k) {
            double phi = phase_dist(rng);
            spec[t][k] = std::polar(lin(t, k), phi);
        }
    }

    std::vector<double> x = istft(spec, cfg, window, out_len);
    for (long it = 0; it < opts.iterations; ++it) {
        ComplexSpec est = stft(x, cfg, window, t_frames);
        for (long t = 0; t < t_frames; ++t) {
            for (long k = 0; k < n_bins; ++k) {
                double mag = std::abs(est[t][k]);
                spec[t][k] = mag > 1e-12 ? est[t][k] * (lin(t, k) / mag)
                                         : std::complex<double>(lin(t, k), 0.0);
            }
        }
        x = istft(spec, cfg, window, out_len);
    }

    dsp::AudioWaveform out;
    out.samples = std::move(x);
    out.rate = cfg.sample_rate;
    return out;
}

}  // namespace lipsynth::vocoder
