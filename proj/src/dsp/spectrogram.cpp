#include "lipsynth/dsp/spectrogram.hpp"

#include "lipsynth/dsp/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace lipsynth::dsp {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void SpectrogramConfig::validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("spectrogram: sample_rate must be positive");
    if (fft_size <= 0 || !is_power_of_two(static_cast<size_t>(fft_size)))
        throw std::invalid_argument("spectrogram: fft_size must be a positive power of two");
    if (hop <= 0) throw std::invalid_argument("spectrogram: hop must be positive");
    if (win < hop) throw std::invalid_argument("spectrogram: win must be >= hop");
    if (fft_size < win) throw std::invalid_argument("spectrogram: fft_size must be >= win");
    if (n_mels <= 0) throw std::invalid_argument("spectrogram: n_mels must be positive");
    if (fmin < 0.0) throw std::invalid_argument("spectrogram: fmin must be >= 0");
    if (fmax <= fmin) throw std::invalid_argument("spectrogram: fmax must be > fmin");
    if (fmax > sample_rate / 2.0)
        throw std::invalid_argument("spectrogram: fmax must be <= sample_rate / 2");
    if (log_floor <= 0.0) throw std::invalid_argument("spectrogram: log_floor must be positive");
}

std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
    return w;
}

std::vector<double> mel_band_edges_hz(const SpectrogramConfig& cfg) {
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(cfg.fmax);
    std::vector<double> edges(static_cast<size_t>(cfg.n_mels) + 2);
    for (int m = 0; m < cfg.n_mels + 2; ++m) {
        const double mel = mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1);
        edges[static_cast<size_t>(m)] = mel_to_hz(mel);
    }
    return edges;
}

Mat mel_filterbank(const SpectrogramConfig& cfg) {
    cfg.validate();
    const int bins = cfg.fft_size / 2 + 1;
    const auto edges = mel_band_edges_hz(cfg);
    Mat fb = Mat::Zero(cfg.n_mels, bins);
    const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = edges[static_cast<size_t>(m)];
        const double mid = edges[static_cast<size_t>(m) + 1];
        const double hi = edges[static_cast<size_t>(m) + 2];
        for (int k = 0; k < bins; ++k) {
            const double hz = k * bin_hz;
            double w = 0.0;
            if (hz >= lo && hz <= mid && mid > lo) w = (hz - lo) / (mid - lo);
            else if (hz > mid && hz <= hi && hi > mid) w = (hi - hz) / (hi - mid);
            if (w > 0.0) fb(m, k) = w;
        }
    }
    return fb;
}

LinearSpectrogram linear_spectrogram(const AudioWaveform& wav, const SpectrogramConfig& cfg) {
    cfg.validate();
    if (wav.rate != cfg.sample_rate)
        throw std::invalid_argument("spectrogram: waveform rate does not match config sample_rate");
    if (wav.samples.empty()) throw std::invalid_argument("spectrogram: empty waveform");

    const long len = static_cast<long>(wav.samples.size());
    std::vector<double> padded;
    long t_frames = 0;
    long offset = 0;
    if (cfg.center) {
        const long pad = cfg.win / 2;
        padded.assign(static_cast<size_t>(len + 2 * pad), 0.0);
        for (long i = 0; i < len; ++i) padded[static_cast<size_t>(i + pad)] = wav.samples[static_cast<size_t>(i)];
        t_frames = 1 + len / cfg.hop;
        offset = 0;
    } else {
        if (len < cfg.win)
            throw std::invalid_argument("spectrogram: waveform shorter than win with center disabled");
        padded = wav.samples;
        t_frames = 1 + (len - cfg.win) / cfg.hop;
        offset = 0;
    }

    const auto window = hann_window(cfg.win);
    const int bins = cfg.fft_size / 2 + 1;
    LinearSpectrogram out;
    out.frames = Mat::Zero(t_frames, bins);
    out.hop_seconds = cfg.hop_seconds();

    std::vector<double> frame(static_cast<size_t>(cfg.fft_size));
    for (long t = 0; t < t_frames; ++t) {
        const long start = offset + t * cfg.hop;
        std::fill(frame.begin(), frame.end(), 0.0);
        for (int i = 0; i < cfg.win; ++i) {
            const long idx = start + i;
            double s = 0.0;
            if (idx >= 0 && idx < static_cast<long>(padded.size())) s = padded[static_cast<size_t>(idx)];
            frame[static_cast<size_t>(i)] = s * window[static_cast<size_t>(i)];
        }
        const auto spec = rfft(frame, cfg.fft_size);
        for (int k = 0; k < bins; ++k) out.frames(t, k) = std::abs(spec[static_cast<size_t>(k)]);
    }
    return out;
}

MelSpectrogram mel_from_linear(const LinearSpectrogram& lin, const SpectrogramConfig& cfg) {
    const Mat fb = mel_filterbank(cfg);
    if (lin.frames.cols() != fb.cols())
        throw std::invalid_argument("spectrogram: linear bins do not match filterbank");
    MelSpectrogram mel;
    mel.hop_seconds = lin.hop_seconds;
    mel.frames = lin.frames * fb.transpose();
    const double floor_log = std::log(cfg.log_floor);
    for (long t = 0; t < mel.frames.rows(); ++t)
        for (long m = 0; m < mel.frames.cols(); ++m) {
            const double v = mel.frames(t, m);
            mel.frames(t, m) = v <= cfg.log_floor ? floor_log : std::log(v);
        }
    return mel;
}

MelSpectrogram mel_spectrogram(const AudioWaveform& wav, const SpectrogramConfig& cfg) {
    return mel_from_linear(linear_spectrogram(wav, cfg), cfg);
}

std::vector<double> frame_energy(const LinearSpectrogram& spec) {
    std::vector<double> e(static_cast<size_t>(spec.frames.rows()));
    for (long t = 0; t < spec.frames.rows(); ++t) e[static_cast<size_t>(t)] = spec.frames.row(t).norm();
    return e;
}

Mat mel_cepstra(const MelSpectrogram& mel, int n_coeffs, bool drop_c0) {
    const long n = mel.frames.cols();
    if (n_coeffs <= 0) throw std::invalid_argument("mel_cepstra: n_coeffs must be positive");
    const int need = n_coeffs + (drop_c0 ? 1 : 0);
    if (need > n) throw std::invalid_argument("mel_cepstra: n_coeffs exceeds mel band count");

    // Orthonormal DCT-II basis rows.
    Mat basis(need, n);
    const double scale0 = std::sqrt(1.0 / n);
    const double scale = std::sqrt(2.0 / n);
    for (int k = 0; k < need; ++k)
        for (long j = 0; j < n; ++j)
            basis(k, j) = (k == 0 ? scale0 : scale) * std::cos(M_PI * (j + 0.5) * k / n);

    Mat full = mel.frames * basis.transpose();  // T x need
    if (!drop_c0) return full;
    return full.rightCols(n_coeffs).eval();
}

}  // namespace lipsynth::dsp
