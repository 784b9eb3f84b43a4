#pragma once

#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/dsp/pitch.hpp"
#include "lipsynth/dsp/spectrogram.hpp"
#include "lipsynth/io/manifest.hpp"
#include "lipsynth/providers/timbre.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lipsynth::metrics {

double mae_f0(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp,
              const dsp::PitchConfig& pcfg = {});

// MAE of per-frame waveform RMS (25 ms window / 10 ms hop).
double mae_rmse(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp);

double estoi(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp);

double mcd_dtw_sl(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp,
                  const dsp::SpectrogramConfig& scfg = {});

// DTW with steps (1,0), (0,1), (1,1) minimizing summed cell cost; ties prefer
// shorter paths. Exposed for the exhaustive-path oracle.
struct DtwResult {
    double total = 0.0;
    long steps = 0;
};
DtwResult dtw_alignment(const Mat& cost);

using Embedder = std::function<providers::TimbreEmbedding(const dsp::AudioWaveform&)>;
Embedder stub_embedder(const dsp::SpectrogramConfig& scfg, uint64_t seed, long dim);
double secs(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp, const Embedder& embedder);

double wer(const std::vector<std::string>& ref_words, const std::vector<std::string>& hyp_words);

double rtf(double audio_seconds, double wall_seconds);

// ---- corpus evaluation -----------------------------------------------------

struct EvalConfig {
    dsp::SpectrogramConfig spectrogram;
    dsp::PitchConfig pitch;
    uint64_t seed = 1234;
    long timbre_dim = 256;
    std::set<std::string> selected;  // empty = all available
};

struct UtteranceMetrics {
    std::string id;
    std::map<std::string, double> values;
};

struct MetricReport {
    std::vector<UtteranceMetrics> utterances;
    std::map<std::string, double> means;       // arithmetic mean per metric
    std::vector<std::string> failures;         // "id: reason"
};

// Reference audio from the manifest vs. <synth_dir>/<id>.wav. WER uses
// <synth_dir>/<id>.txt when present; RTF comes from <synth_dir>/rtf.tsv.
// Missing/corrupt utterances become failure entries without aborting.
MetricReport evaluate_corpus(const std::vector<io::UtteranceRecord>& records,
                             const std::string& synth_dir, const EvalConfig& cfg);

std::string format_report_table(const MetricReport& report);

}  // namespace lipsynth::metrics
