#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/dsp/pitch.hpp"
#include "lipsynth/dsp/spectrogram.hpp"
#include "lipsynth/metrics/metrics.hpp"
#include "lipsynth/providers/units.hpp"
#include "lipsynth/train/loss.hpp"
#include "lipsynth/vocoder/griffin_lim.hpp"

namespace py = pybind11;
using namespace lipsynth;

namespace {

// NB: pass an explicit shape plus the source buffer; the bare-count array_t
// constructor produced a stride-0 view under the distro's pybind11 2.9.
py::array_t<double> to_array(const std::vector<double>& v) {
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
    return py::array_t<double>(shape, v.data());
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("samples must be a 1-d array");
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "lipsynth core: DSP front-end, speech units, vocoder, and evaluation metrics";

    // ---- audio ----
    py::class_<dsp::AudioWaveform>(m, "AudioWaveform")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
                         int rate) {
                 dsp::AudioWaveform w;
                 w.samples = from_array(samples);
                 w.rate = rate;
                 return w;
             }),
             py::arg("samples"), py::arg("rate") = 16000)
        .def_property(
            "samples", [](const dsp::AudioWaveform& w) { return to_array(w.samples); },
            [](dsp::AudioWaveform& w,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
                w.samples = from_array(a);
            })
        .def_readwrite("rate", &dsp::AudioWaveform::rate)
        .def("duration_seconds", &dsp::AudioWaveform::duration_seconds)
        .def("__len__", [](const dsp::AudioWaveform& w) { return w.samples.size(); });

    m.def("read_wav", &dsp::read_wav, py::arg("path"));
    m.def("write_wav", &dsp::write_wav, py::arg("path"), py::arg("wav"));
    m.def("peak_normalize", &dsp::peak_normalize, py::arg("wav"), py::arg("peak") = 0.95);
    m.def("resample", &dsp::resample, py::arg("wav"), py::arg("target_rate"));

    // ---- spectrogram ----
    py::class_<dsp::SpectrogramConfig>(m, "SpectrogramConfig")
        .def(py::init<>())
        .def_readwrite("sample_rate", &dsp::SpectrogramConfig::sample_rate)
        .def_readwrite("fft_size", &dsp::SpectrogramConfig::fft_size)
        .def_readwrite("hop", &dsp::SpectrogramConfig::hop)
        .def_readwrite("win", &dsp::SpectrogramConfig::win)
        .def_readwrite("n_mels", &dsp::SpectrogramConfig::n_mels)
        .def_readwrite("fmin", &dsp::SpectrogramConfig::fmin)
        .def_readwrite("fmax", &dsp::SpectrogramConfig::fmax)
        .def_readwrite("log_floor", &dsp::SpectrogramConfig::log_floor)
        .def_readwrite("center", &dsp::SpectrogramConfig::center)
        .def("hop_seconds", &dsp::SpectrogramConfig::hop_seconds);

    py::class_<dsp::MelSpectrogram>(m, "MelSpectrogram")
        .def_readwrite("frames", &dsp::MelSpectrogram::frames)
        .def_readwrite("hop_seconds", &dsp::MelSpectrogram::hop_seconds)
        .def("num_frames", &dsp::MelSpectrogram::num_frames)
        .def("num_bands", &dsp::MelSpectrogram::num_bands);

    m.def("mel_spectrogram", &dsp::mel_spectrogram, py::arg("wav"),
          py::arg("config") = dsp::SpectrogramConfig{});
    m.def("mel_filterbank", &dsp::mel_filterbank, py::arg("config") = dsp::SpectrogramConfig{});
    m.def(
        "mel_cepstra",
        [](const Mat& frames, double hop_seconds, int n_coeffs, bool drop_c0) {
            return dsp::mel_cepstra({frames, hop_seconds}, n_coeffs, drop_c0);
        },
        py::arg("frames"), py::arg("hop_seconds") = 0.010, py::arg("n_coeffs") = 13,
        py::arg("drop_c0") = true);

    // ---- pitch ----
    py::class_<dsp::PitchConfig>(m, "PitchConfig")
        .def(py::init<>())
        .def_readwrite("f0_min", &dsp::PitchConfig::f0_min)
        .def_readwrite("f0_max", &dsp::PitchConfig::f0_max)
        .def_readwrite("hop_seconds", &dsp::PitchConfig::hop_seconds)
        .def_readwrite("voicing_threshold", &dsp::PitchConfig::voicing_threshold);

    py::class_<dsp::ProsodyTrack>(m, "ProsodyTrack")
        .def_property_readonly("f0_hz",
                               [](const dsp::ProsodyTrack& t) { return to_array(t.f0_hz); })
        .def_property_readonly("energy",
                               [](const dsp::ProsodyTrack& t) { return to_array(t.energy); })
        .def_property_readonly("voiced",
                               [](const dsp::ProsodyTrack& t) {
                                   std::vector<uint8_t> flags(t.voiced.size());
                                   for (size_t i = 0; i < t.voiced.size(); ++i)
                                       flags[i] = t.voiced[i] ? 1 : 0;
                                   const std::vector<py::ssize_t> shape{
                                       static_cast<py::ssize_t>(flags.size())};
                                   return py::array_t<bool>(
                                       shape, reinterpret_cast<const bool*>(flags.data()));
                               })
        .def("num_frames", &dsp::ProsodyTrack::num_frames);

    m.def("extract_f0", &dsp::extract_f0, py::arg("wav"), py::arg("config") = dsp::PitchConfig{});

    // ---- speech units ----
    py::class_<providers::UnitCodebook>(m, "UnitCodebook")
        .def(py::init<>())
        .def_readwrite("centroids", &providers::UnitCodebook::centroids)
        .def("clusters", &providers::UnitCodebook::clusters)
        .def("feature_dim", &providers::UnitCodebook::feature_dim);

    py::class_<providers::SpeechUnits>(m, "SpeechUnits")
        .def_readwrite("ids", &providers::SpeechUnits::ids)
        .def_readwrite("rate", &providers::SpeechUnits::rate)
        .def("num_frames", &providers::SpeechUnits::num_frames);

    m.def("train_unit_quantizer", &providers::train_unit_quantizer, py::arg("features"),
          py::arg("k"), py::arg("seed") = 0);
    m.def("quantize_units", &providers::quantize_units, py::arg("features"), py::arg("codebook"));
    m.def("quantization_distortion", &providers::quantization_distortion, py::arg("features"),
          py::arg("codebook"));
    m.def("save_codebook", &providers::save_codebook, py::arg("path"), py::arg("codebook"));
    m.def("load_codebook", &providers::load_codebook, py::arg("path"));

    // ---- vocoder ----
    m.def(
        "griffin_lim",
        [](const Mat& mel_frames, const dsp::SpectrogramConfig& cfg, long iterations,
           uint64_t seed) {
            dsp::MelSpectrogram mel{mel_frames, cfg.hop_seconds()};
            vocoder::VocoderOptions opts;
            opts.iterations = iterations;
            opts.seed = seed;
            return vocoder::griffin_lim_vocode(mel, nullptr, cfg, opts);
        },
        py::arg("mel_frames"), py::arg("config") = dsp::SpectrogramConfig{},
        py::arg("iterations") = 60, py::arg("seed") = 0);

    // ---- metrics ----
    m.def("wer", &metrics::wer, py::arg("ref_words"), py::arg("hyp_words"));
    m.def("rtf", &metrics::rtf, py::arg("audio_seconds"), py::arg("wall_seconds"));
    m.def("estoi", &metrics::estoi, py::arg("ref"), py::arg("hyp"));
    m.def("mcd_dtw_sl", &metrics::mcd_dtw_sl, py::arg("ref"), py::arg("hyp"),
          py::arg("config") = dsp::SpectrogramConfig{});
    m.def("mae_f0", &metrics::mae_f0, py::arg("ref"), py::arg("hyp"),
          py::arg("config") = dsp::PitchConfig{});
    m.def("mae_rmse", &metrics::mae_rmse, py::arg("ref"), py::arg("hyp"));
    m.def(
        "dtw_alignment",
        [](const Mat& cost) {
            const metrics::DtwResult r = metrics::dtw_alignment(cost);
            return py::make_tuple(r.total, r.steps);
        },
        py::arg("cost"));
    m.def(
        "secs",
        [](const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp, uint64_t seed, long dim) {
            return metrics::secs(ref, hyp, metrics::stub_embedder({}, seed, dim));
        },
        py::arg("ref"), py::arg("hyp"), py::arg("seed") = 1234, py::arg("dim") = 256);

    // ---- training loss identity ----
    py::class_<train::LossWeights>(m, "LossWeights")
        .def(py::init<>())
        .def_readwrite("lambda_m", &train::LossWeights::lambda_m)
        .def_readwrite("lambda_p", &train::LossWeights::lambda_p)
        .def_readwrite("lambda_e", &train::LossWeights::lambda_e)
        .def_readwrite("lambda_u", &train::LossWeights::lambda_u)
        .def_readwrite("label_smoothing", &train::LossWeights::label_smoothing);

    py::class_<train::LossBreakdown>(m, "LossBreakdown")
        .def_readonly("l_m", &train::LossBreakdown::l_m)
        .def_readonly("l_p", &train::LossBreakdown::l_p)
        .def_readonly("l_e", &train::LossBreakdown::l_e)
        .def_readonly("l_u", &train::LossBreakdown::l_u)
        .def_readonly("l_total", &train::LossBreakdown::l_total)
        .def("__repr__", [](const train::LossBreakdown& b) {
            return "LossBreakdown(l_m=" + std::to_string(b.l_m) + ", l_p=" + std::to_string(b.l_p) +
                   ", l_e=" + std::to_string(b.l_e) + ", l_u=" + std::to_string(b.l_u) +
                   ", l_total=" + std::to_string(b.l_total) + ")";
        });

    m.def("weighted_total", &train::weighted_total, py::arg("l_m"), py::arg("l_p"), py::arg("l_e"),
          py::arg("l_u"), py::arg("weights") = train::LossWeights{});
}
