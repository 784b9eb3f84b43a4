#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/dsp/fft.hpp"
#include "lipsynth/dsp/pitch.hpp"
#include "lipsynth/dsp/spectrogram.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace lipsynth;

namespace {

dsp::AudioWaveform make_sine(double freq, double seconds, int rate = 16000, double amp = 0.5) {
    dsp::AudioWaveform wav;
    wav.rate = rate;
    long n = static_cast<long>(std::lround(seconds * rate));
    wav.samples.resize(n);
    for (long i = 0; i < n; ++i) wav.samples[i] = amp * std::sin(2.0 * M_PI * freq * i / rate);
    return wav;
}

// FFT-peak oracle: strongest rfft bin mapped back to Hz
double fft_peak_hz(const dsp::AudioWaveform& wav) {
    size_t n = 1;
    while (n * 2 <= wav.samples.size()) n *= 2;
    std::vector<double> head(wav.samples.begin(), wav.samples.begin() + n);
    auto spec = dsp::rfft(head, n);
    size_t best = 0;
    for (size_t k = 1; k < spec.size(); ++k)
        if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
    return static_cast<double>(best) * wav.rate / static_cast<double>(n);
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("fft: impulse has flat spectrum") {
    std::vector<std::complex<double>> x(8, 0.0);
    x[0] = 1.0;
    dsp::fft(x, false);
    for (const auto& v : x) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("fft: pure tone concentrates in one bin") {
    const int n = 1024;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * M_PI * 64.0 * i / n);
    auto spec = dsp::rfft(x, n);
    size_t best = 0;
    for (size_t k = 0; k < spec.size(); ++k)
        if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
    CHECK(best == 64);
    CHECK(std::abs(spec[64]) == doctest::Approx(n / 2.0).epsilon(1e-9));
}

TEST_CASE("fft: linear over inputs") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> dist;
    std::vector<std::complex<double>> a(16), b(16), sum(16);
    for (int i = 0; i < 16; ++i) {
        a[i] = {dist(rng), dist(rng)};
        b[i] = {dist(rng), dist(rng)};
        sum[i] = a[i] + b[i];
    }
    auto fa = a, fb = b, fs = sum;
    dsp::fft(fa, false);
    dsp::fft(fb, false);
    dsp::fft(fs, false);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(fs[i] - (fa[i] + fb[i])) < 1e-10);
}

TEST_CASE("fft: inverse round trip") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    std::vector<double> x(256);
    for (auto& v : x) v = dist(rng);
    auto spec = dsp::rfft(x, 256);
    CHECK(spec.size() == 129);
    auto back = dsp::irfft(spec, 256);
    for (int i = 0; i < 256; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("fft: rejects non-power-of-two lengths") {
    std::vector<std::complex<double>> x(12, 0.0);
    CHECK_THROWS(dsp::fft(x, false));
    CHECK(!dsp::is_power_of_two(0));
    CHECK(dsp::is_power_of_two(1));
    CHECK(dsp::is_power_of_two(1024));
}

TEST_CASE("wav: 16-bit round trip is bit-exact") {
    dsp::AudioWaveform wav;
    wav.rate = 16000;
    for (int i = -4; i <= 4; ++i) wav.samples.push_back(i * 1000 / 32768.0);
    const std::string path = temp_path("lipsynth_wav_rt.wav");
    dsp::write_wav(path, wav);
    dsp::AudioWaveform back = dsp::read_wav(path);
    CHECK(back.rate == wav.rate);
    REQUIRE(back.samples.size() == wav.samples.size());
    for (size_t i = 0; i < wav.samples.size(); ++i) CHECK(back.samples[i] == wav.samples[i]);
    std::filesystem::remove(path);
}

TEST_CASE("wav: missing file errors") { CHECK_THROWS(dsp::read_wav("/nonexistent/x.wav")); }

TEST_CASE("peak_normalize scales to the target") {
    dsp::AudioWaveform wav = make_sine(100.0, 0.05, 16000, 0.1);
    dsp::peak_normalize(wav, 0.95);
    double peak = 0.0;
    for (double s : wav.samples) peak = std::max(peak, std::abs(s));
    CHECK(peak == doctest::Approx(0.95).epsilon(1e-9));
}

TEST_CASE("resample: identity when rates match") {
    dsp::AudioWaveform wav = make_sine(220.0, 0.1);
    dsp::AudioWaveform out = dsp::resample(wav, 16000);
    CHECK(out.samples == wav.samples);
}

TEST_CASE("resample: preserves tone frequency across rates") {
    dsp::AudioWaveform hi = make_sine(440.0, 0.5, 48000);
    dsp::AudioWaveform down = dsp::resample(hi, 16000);
    CHECK(down.rate == 16000);
    CHECK(std::abs(static_cast<long>(down.samples.size()) - 8000) <= 2);
    CHECK(fft_peak_hz(down) == doctest::Approx(440.0).epsilon(0.02));

    dsp::AudioWaveform lo = make_sine(440.0, 0.5, 8000);
    dsp::AudioWaveform up = dsp::resample(lo, 16000);
    CHECK(fft_peak_hz(up) == doctest::Approx(440.0).epsilon(0.02));
}

TEST_CASE("hann window is periodic") {
    auto w = dsp::hann_window(4);
    CHECK(w[0] == doctest::Approx(0.0));
    CHECK(w[1] == doctest::Approx(0.5));
    CHECK(w[2] == doctest::Approx(1.0));
    CHECK(w[3] == doctest::Approx(0.5));
}

TEST_CASE("spectrogram: 1 s at hop 160 gives 101 frames") {
    dsp::SpectrogramConfig cfg;
    dsp::AudioWaveform wav = make_sine(440.0, 1.0);
    auto lin = dsp::linear_spectrogram(wav, cfg);
    CHECK(lin.num_frames() == 101);
    CHECK(lin.frames.cols() == 513);
    auto mel = dsp::mel_from_linear(lin, cfg);
    CHECK(mel.num_frames() == 101);
    CHECK(mel.num_bands() == 80);
    CHECK(mel.hop_seconds == doctest::Approx(0.010));
}

TEST_CASE("spectrogram: non-centered framing arithmetic") {
    dsp::SpectrogramConfig cfg;
    cfg.center = false;
    dsp::AudioWaveform wav = make_sine(440.0, 1.0);
    auto lin = dsp::linear_spectrogram(wav, cfg);
    CHECK(lin.num_frames() == 1 + (16000 - 640) / 160);

    dsp::AudioWaveform tiny = make_sine(440.0, 0.01);
    CHECK_THROWS(dsp::linear_spectrogram(tiny, cfg));
}

TEST_CASE("spectrogram: silence rests on the log floor") {
    dsp::SpectrogramConfig cfg;
    dsp::AudioWaveform wav;
    wav.rate = 16000;
    wav.samples.assign(16000, 0.0);
    auto mel = dsp::mel_spectrogram(wav, cfg);
    const double floor_log = std::log(cfg.log_floor);
    for (long t = 0; t < mel.frames.rows(); ++t)
        for (long m = 0; m < mel.frames.cols(); ++m) CHECK(mel.frames(t, m) == floor_log);
}

TEST_CASE("spectrogram: tone lands in the right mel band") {
    dsp::SpectrogramConfig cfg;
    dsp::AudioWaveform wav = make_sine(440.0, 1.0);
    auto mel = dsp::mel_spectrogram(wav, cfg);
    long best = 0;
    Eigen::VectorXd mean = mel.frames.colwise().mean();
    for (long m = 1; m < mean.size(); ++m)
        if (mean(m) > mean(best)) best = m;

    auto edges = dsp::mel_band_edges_hz(cfg);
    // band whose triangle peak is nearest 440 Hz
    long expect = 0;
    for (long m = 1; m < cfg.n_mels; ++m)
        if (std::abs(edges[m + 1] - 440.0) < std::abs(edges[expect + 1] - 440.0)) expect = m;
    CHECK(std::abs(best - expect) <= 1);
}

TEST_CASE("spectrogram: filterbank triangles are sane") {
    dsp::SpectrogramConfig cfg;
    Mat fb = dsp::mel_filterbank(cfg);
    CHECK(fb.rows() == 80);
    CHECK(fb.cols() == 513);
    for (long m = 0; m < fb.rows(); ++m) {
        CHECK(fb.row(m).minCoeff() >= 0.0);
        CHECK(fb.row(m).maxCoeff() > 0.0);  // no empty band
    }
    auto edges = dsp::mel_band_edges_hz(cfg);
    for (size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);
}

TEST_CASE("spectrogram: config validation") {
    dsp::SpectrogramConfig cfg;
    cfg.fft_size = 1000;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.fmax = 9000.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.win = 100;  // < hop
    CHECK_THROWS(cfg.validate());
    cfg = {};
    dsp::AudioWaveform wav = make_sine(440.0, 0.1, 22050);
    CHECK_THROWS(dsp::linear_spectrogram(wav, cfg));  // rate mismatch
    dsp::AudioWaveform empty;
    CHECK_THROWS(dsp::linear_spectrogram(empty, cfg));
}

TEST_CASE("frame_energy scales linearly with amplitude") {
    dsp::SpectrogramConfig cfg;
    auto lin1 = dsp::linear_spectrogram(make_sine(440.0, 0.5, 16000, 0.2), cfg);
    auto lin2 = dsp::linear_spectrogram(make_sine(440.0, 0.5, 16000, 0.4), cfg);
    auto e1 = dsp::frame_energy(lin1);
    auto e2 = dsp::frame_energy(lin2);
    // compare interior frames (edges see the zero padding)
    for (size_t t = 5; t + 5 < e1.size(); ++t) {
        CHECK(e2[t] == doctest::Approx(2.0 * e1[t]).epsilon(1e-6));
        CHECK(e1[t] > 0.0);
    }
}

TEST_CASE("mel_cepstra: DCT basis behaves") {
    dsp::SpectrogramConfig cfg;
    dsp::MelSpectrogram mel;
    mel.frames = Mat::Constant(3, 80, 2.5);  // flat rows -> only c0 responds
    Mat full = dsp::mel_cepstra(mel, 4, false);
    CHECK(full.rows() == 3);
    CHECK(full.cols() == 4);
    CHECK(full(0, 0) == doctest::Approx(2.5 * std::sqrt(80.0)).epsilon(1e-9));
    for (long k = 1; k < 4; ++k) CHECK(std::abs(full(0, k)) < 1e-9);

    Mat no_c0 = dsp::mel_cepstra(mel, 13, true);
    CHECK(no_c0.cols() == 13);
    for (long k = 0; k < 13; ++k) CHECK(std::abs(no_c0(0, k)) < 1e-9);

    CHECK_THROWS(dsp::mel_cepstra(mel, 81, true));
    CHECK_THROWS(dsp::mel_cepstra(mel, 0, false));
}

TEST_CASE("pitch: clean sines tracked within 5% with no octave errors") {
    dsp::PitchConfig pcfg;
    for (double f0 : {110.0, 220.0, 440.0}) {
        dsp::AudioWaveform wav = make_sine(f0, 0.6);
        auto track = dsp::extract_f0(wav, pcfg);
        REQUIRE(track.num_frames() > 10);
        long voiced = 0;
        for (long t = 5; t < track.num_frames() - 5; ++t) {
            if (!track.voiced[t]) continue;
            ++voiced;
            CHECK(track.f0_hz[t] == doctest::Approx(f0).epsilon(0.05));
        }
        CHECK(voiced > track.num_frames() / 2);
    }
}

TEST_CASE("pitch: silence and noise stay unvoiced") {
    dsp::PitchConfig pcfg;
    dsp::AudioWaveform silence;
    silence.rate = 16000;
    silence.samples.assign(8000, 0.0);
    auto ts = dsp::extract_f0(silence, pcfg);
    for (long t = 0; t < ts.num_frames(); ++t) {
        CHECK(!ts.voiced[t]);
        CHECK(ts.f0_hz[t] == 0.0);
    }

    dsp::AudioWaveform noise;
    noise.rate = 16000;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist(0.0, 0.3);
    noise.samples.resize(8000);
    for (auto& s : noise.samples) s = dist(rng);
    auto tn = dsp::extract_f0(noise, pcfg);
    long voiced = 0;
    for (long t = 0; t < tn.num_frames(); ++t)
        if (tn.voiced[t]) ++voiced;
    CHECK(voiced < tn.num_frames() / 10);
}

TEST_CASE("pitch: follows a glide") {
    const int rate = 16000;
    dsp::AudioWaveform wav;
    wav.rate = rate;
    const double dur = 1.0;
    long n = static_cast<long>(dur * rate);
    wav.samples.resize(n);
    double phase = 0.0;
    auto f_at = [&](double t) { return 180.0 - 60.0 * (t / dur); };
    for (long i = 0; i < n; ++i) {
        phase += 2.0 * M_PI * f_at(static_cast<double>(i) / rate) / rate;
        wav.samples[i] = 0.5 * std::sin(phase);
    }
    dsp::PitchConfig pcfg;
    auto track = dsp::extract_f0(wav, pcfg);
    for (long t = 10; t < track.num_frames() - 10; ++t) {
        REQUIRE(track.voiced[t]);
        double expect = f_at(t * pcfg.hop_seconds);
        CHECK(track.f0_hz[t] == doctest::Approx(expect).epsilon(0.10));
    }
}

TEST_CASE("pitch: config validation") {
    dsp::PitchConfig pcfg;
    pcfg.f0_min = 700.0;  // above f0_max
    CHECK_THROWS(pcfg.validate());
    pcfg = {};
    pcfg.voicing_threshold = 1.5;
    CHECK_THROWS(pcfg.validate());
}
