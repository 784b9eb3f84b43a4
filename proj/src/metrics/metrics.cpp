#include "lipsynth/metrics/metrics.hpp"

#include "lipsynth/dsp/fft.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lipsynth::metrics {
namespace {

void check_same_rate(const dsp::AudioWaveform& a, const dsp::AudioWaveform& b) {
    if (a.rate != b.rate)
        throw std::runtime_error("metric: sample rate mismatch (" + std::to_string(a.rate) +
                                 " vs " + std::to_string(b.rate) + ")");
}

bool is_silent(const dsp::AudioWaveform& wav) {
    for (double s : wav.samples)
        if (std::abs(s) > 1e-8) return false;
    return true;
}

}  // namespace

double mae_f0(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp,
              const dsp::PitchConfig& pcfg) {
    check_same_rate(ref, hyp);
    dsp::ProsodyTrack tr = dsp::extract_f0(ref, pcfg);
    dsp::ProsodyTrack th = dsp::extract_f0(hyp, pcfg);
    std::size_t n = std::min(tr.f0_hz.size(), th.f0_hz.size());
    double sum = 0.0;
    long count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!tr.voiced[t]) continue;
        sum += std::abs(tr.f0_hz[t] - th.f0_hz[t]);
        ++count;
    }
    if (count == 0) throw std::runtime_error("mae_f0: no voiced frames in reference");
    return sum / count;
}

double mae_rmse(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp) {
    check_same_rate(ref, hyp);
    long win = std::lround(0.025 * ref.rate);
    long hop = std::lround(0.010 * ref.rate);
    auto frame_rms = [&](const dsp::AudioWaveform& wav) {
        std::vector<double> out;
        long len = static_cast<long>(wav.samples.size());
        for (long start = 0; start + win <= len; start += hop) {
            double acc = 0.0;
            for (long i = 0; i < win; ++i) acc += wav.samples[start + i] * wav.samples[start + i];
            out.push_back(std::sqrt(acc / win));
        }
        return out;
    };
    std::vector<double> rr = frame_rms(ref);
    std::vector<double> rh = frame_rms(hyp);
    std::size_t n = std::min(rr.size(), rh.size());
    if (n == 0) throw std::runtime_error("mae_rmse: input shorter than one 25 ms frame");
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) sum += std::abs(rr[t] - rh[t]);
    return sum / static_cast<double>(n);
}

double estoi(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp) {
    check_same_rate(ref, hyp);
    if (is_silent(ref) || is_silent(hyp)) throw std::runtime_error("estoi: silent input");
    double dr = ref.duration_seconds();
    double dh = hyp.duration_seconds();
    if (dr <= 0.0 || dh <= 0.0) throw std::runtime_error("estoi: empty input");
    if (std::abs(dr - dh) > 0.10 * std::max(dr, dh))
        throw std::runtime_error("estoi: durations differ by more than 10%");

    const long rate = 10000;
    dsp::AudioWaveform x = dsp::resample(ref, rate);
    dsp::AudioWaveform y = dsp::resample(hyp, rate);
    std::size_t len = std::min(x.samples.size(), y.samples.size());
    x.samples.resize(len);
    y.samples.resize(len);

    const long win = 256;
    const long hop = 128;
    const long nfft = 512;
    const long n_bands = 15;
    const long seg = 30;
    if (static_cast<long>(len) < win) throw std::runtime_error("estoi: signal too short");

    std::vector<double> window = dsp::hann_window(win);

    // one-third-octave band edges over the 257 rfft bins
    long n_bins = nfft / 2 + 1;
    std::vector<std::pair<long, long>> bands;  // [lo, hi) bin ranges
    for (long j = 0; j < n_bands; ++j) {
        double cf = 150.0 * std::pow(2.0, j / 3.0);
        double f_lo = cf / std::pow(2.0, 1.0 / 6.0);
        double f_hi = cf * std::pow(2.0, 1.0 / 6.0);
        long lo = static_cast<long>(std::ceil(f_lo * nfft / rate));
        long hi = static_cast<long>(std::ceil(f_hi * nfft / rate));
        hi = std::min(hi, n_bins);
        if (lo >= hi) throw std::runtime_error("estoi: degenerate third-octave band");
        bands.emplace_back(lo, hi);
    }

    auto band_envelopes = [&](const dsp::AudioWaveform& wav) {
        long t_frames = 1 + (static_cast<long>(wav.samples.size()) - win) / hop;
        Mat env(n_bands, t_frames);
        std::vector<double> frame(win);
        for (long t = 0; t < t_frames; ++t) {
            for (long i = 0; i < win; ++i) frame[i] = wav.samples[t * hop + i] * window[i];
            std::vector<std::complex<double>> spec = dsp::rfft(frame, nfft);
            for (long j = 0; j < n_bands; ++j) {
                double acc = 0.0;
                for (long k = bands[j].first; k < bands[j].second; ++k) acc += std::norm(spec[k]);
                env(j, t) = std::sqrt(acc);
            }
        }
        return env;
    };

    Mat ex = band_envelopes(x);
    Mat ey = band_envelopes(y);
    long t_frames = std::min(ex.cols(), ey.cols());
    if (t_frames < seg) throw std::runtime_error("estoi: signal too short");

    auto normalize_segment = [&](Mat m) {
        for (long r = 0; r < m.rows(); ++r) {
            m.row(r).array() -= m.row(r).mean();
            double norm = m.row(r).norm();
            if (norm > 1e-12) m.row(r) /= norm;
        }
        for (long c = 0; c < m.cols(); ++c) {
            m.col(c).array() -= m.col(c).mean();
            double norm = m.col(c).norm();
            if (norm > 1e-12) m.col(c) /= norm;
        }
        return m;
    };

    double total = 0.0;
    long n_segments = t_frames - seg + 1;
    for (long s = 0; s < n_segments; ++s) {
        Mat sx = normalize_segment(ex.block(0, s, n_bands, seg));
        Mat sy = normalize_segment(ey.block(0, s, n_bands, seg));
        double d = 0.0;
        for (long c = 0; c < seg; ++c) d += sx.col(c).dot(sy.col(c));
        total += d / seg;
    }
    return total / n_segments;
}

DtwResult dtw_alignment(const Mat& cost) {
    long r = cost.rows();
    long c = cost.cols();
    if (r == 0 || c == 0) throw std::runtime_error("dtw: empty cost matrix");
    const double inf = std::numeric_limits<double>::infinity();
    Mat acc = Mat::Constant(r, c, inf);
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> steps(r, c);
    acc(0, 0) = cost(0, 0);
    steps(0, 0) = 1;
    for (long i = 0; i < r; ++i) {
        for (long j = 0; j < c; ++j) {
            if (i == 0 && j == 0) continue;
            double best = inf;
            long best_steps = 0;
            auto consider = [&](long pi, long pj) {
                if (pi < 0 || pj < 0) return;
                double cand = acc(pi, pj);
                if (cand < best || (cand == best && steps(pi, pj) + 1 < best_steps)) {
                    best = cand;
                    best_steps = steps(pi, pj) + 1;
                }
            };
            consider(i - 1, j - 1);
            consider(i - 1, j);
            consider(i, j - 1);
            acc(i, j) = best + cost(i, j);
            steps(i, j) = best_steps;
        }
    }
    return {acc(r - 1, c - 1), steps(r - 1, c - 1)};
}

double mcd_dtw_sl(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp,
                  const dsp::SpectrogramConfig& scfg) {
    check_same_rate(ref, hyp);
    if (ref.rate != scfg.sample_rate)
        throw std::runtime_error("mcd_dtw_sl: waveform rate does not match spectrogram config");
    dsp::MelSpectrogram mr = dsp::mel_spectrogram(ref, scfg);
    dsp::MelSpectrogram mh = dsp::mel_spectrogram(hyp, scfg);
    Mat cr = dsp::mel_cepstra(mr, 13, /*drop_c0=*/true);  // c1..c13
    Mat ch = dsp::mel_cepstra(mh, 13, /*drop_c0=*/true);
    if (cr.rows() < 2 || ch.rows() < 2)
        throw std::runtime_error("mcd_dtw_sl: fewer than 2 frames");

    Mat cost(cr.rows(), ch.rows());
    for (long i = 0; i < cr.rows(); ++i)
        for (long j = 0; j < ch.rows(); ++j) cost(i, j) = (cr.row(i) - ch.row(j)).norm();
    DtwResult d = dtw_alignment(cost);
    double mcd = (10.0 / std::log(10.0)) * std::sqrt(2.0) * (d.total / d.steps);
    double longer = static_cast<double>(std::max(cr.rows(), ch.rows()));
    double shorter = static_cast<double>(std::min(cr.rows(), ch.rows()));
    return mcd * (longer / shorter);
}

Embedder stub_embedder(const dsp::SpectrogramConfig& scfg, uint64_t seed, long dim) {
    return [scfg, seed, dim](const dsp::AudioWaveform& wav) {
        dsp::MelSpectrogram mel = dsp::mel_spectrogram(wav, scfg);
        return providers::timbre_stub(mel, seed, dim);
    };
}

double secs(const dsp::AudioWaveform& ref, const dsp::AudioWaveform& hyp, const Embedder& embedder) {
    providers::TimbreEmbedding er = embedder(ref);
    providers::TimbreEmbedding eh = embedder(hyp);
    return providers::cosine_similarity(er, eh);
}

double wer(const std::vector<std::string>& ref_words, const std::vector<std::string>& hyp_words) {
    if (ref_words.empty()) throw std::runtime_error("wer: empty reference");
    std::size_t r = ref_words.size();
    std::size_t h = hyp_words.size();
    std::vector<std::vector<long>> d(r + 1, std::vector<long>(h + 1, 0));
    for (std::size_t i = 0; i <= r; ++i) d[i][0] = static_cast<long>(i);
    for (std::size_t j = 0; j <= h; ++j) d[0][j] = static_cast<long>(j);
    for (std::size_t i = 1; i <= r; ++i) {
        for (std::size_t j = 1; j <= h; ++j) {
            long sub = d[i - 1][j - 1] + (ref_words[i - 1] == hyp_words[j - 1] ? 0 : 1);
            d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
        }
    }
    return static_cast<double>(d[r][h]) / static_cast<double>(r);
}

double rtf(double audio_seconds, double wall_seconds) {
    if (audio_seconds <= 0.0) throw std::runtime_error("rtf: non-positive audio duration");
    return wall_seconds / audio_seconds;
}

// ---- corpus evaluation -----------------------------------------------------

namespace {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct RtfEntry {
    double audio_seconds = 0.0;
    double wall_seconds = 0.0;
};

std::map<std::string, RtfEntry> load_rtf_log(const std::string& path) {
    std::map<std::string, RtfEntry> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string id;
        RtfEntry e;
        if (ss >> id >> e.audio_seconds >> e.wall_seconds) out[id] = e;
    }
    return out;
}

bool wants(const EvalConfig& cfg, const std::string& name) {
    return cfg.selected.empty() || cfg.selected.count(name) > 0;
}

dsp::AudioWaveform load_eval_wav(const std::string& path, long rate) {
    dsp::AudioWaveform wav = dsp::read_wav(path);
    wav = dsp::resample(wav, rate);
    dsp::peak_normalize(wav, 0.95);
    return wav;
}

}  // namespace

MetricReport evaluate_corpus(const std::vector<io::UtteranceRecord>& records,
                             const std::string& synth_dir, const EvalConfig& cfg) {
    if (records.empty()) throw std::runtime_error("evaluate_corpus: no utterances to evaluate");
    cfg.spectrogram.validate();

    std::map<std::string, RtfEntry> rtf_log =
        load_rtf_log(synth_dir + "/rtf.tsv");

    struct Slot {
        UtteranceMetrics metrics;
        bool ok = true;
        std::string error;
    };
    std::vector<Slot> slots(records.size());

    auto eval_one = [&](std::size_t idx) {
        const io::UtteranceRecord& rec = records[idx];
        Slot& slot = slots[idx];
        slot.metrics.id = rec.id;
        try {
            std::string hyp_path = synth_dir + "/" + rec.id + ".wav";
            if (!std::filesystem::exists(hyp_path))
                throw std::runtime_error("missing synthesized audio " + hyp_path);
            dsp::AudioWaveform ref = load_eval_wav(rec.audio_path, cfg.spectrogram.sample_rate);
            dsp::AudioWaveform hyp = load_eval_wav(hyp_path, cfg.spectrogram.sample_rate);

            auto& vals = slot.metrics.values;
            if (wants(cfg, "mae_f0")) vals["mae_f0"] = mae_f0(ref, hyp, cfg.pitch);
            if (wants(cfg, "mae_rmse")) vals["mae_rmse"] = mae_rmse(ref, hyp);
            if (wants(cfg, "estoi")) vals["estoi"] = estoi(ref, hyp);
            if (wants(cfg, "mcd_dtw_sl")) vals["mcd_dtw_sl"] = mcd_dtw_sl(ref, hyp, cfg.spectrogram);
            if (wants(cfg, "secs"))
                vals["secs"] = secs(ref, hyp, stub_embedder(cfg.spectrogram, cfg.seed, cfg.timbre_dim));
            if (wants(cfg, "wer")) {
                std::string txt_path = synth_dir + "/" + rec.id + ".txt";
                if (std::filesystem::exists(txt_path) && !rec.transcript.empty()) {
                    std::ifstream txt(txt_path);
                    std::string hyp_text((std::istreambuf_iterator<char>(txt)),
                                         std::istreambuf_iterator<char>());
                    vals["wer"] = wer(split_words(rec.transcript), split_words(hyp_text));
                }
            }
            if (wants(cfg, "rtf")) {
                auto it = rtf_log.find(rec.id);
                if (it != rtf_log.end())
                    vals["rtf"] = rtf(it->second.audio_seconds, it->second.wall_seconds);
            }
        } catch (const std::exception& e) {
            slot.ok = false;
            slot.error = e.what();
        }
    };

    // pure per-utterance work; fan out across a small worker pool
    unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                       static_cast<unsigned>(records.size())));
    if (workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1))
                    eval_one(i);
            });
        }
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < records.size(); ++i) eval_one(i);
    }

    MetricReport report;
    std::map<std::string, std::pair<double, long>> acc;
    for (Slot& slot : slots) {
        if (!slot.ok) {
            report.failures.push_back(slot.metrics.id + ": " + slot.error);
            continue;
        }
        for (const auto& [name, value] : slot.metrics.values) {
            acc[name].first += value;
            acc[name].second += 1;
        }
        report.utterances.push_back(std::move(slot.metrics));
    }
    if (report.utterances.empty())
        throw std::runtime_error("evaluate_corpus: no utterance evaluated successfully");
    for (const auto& [name, sum_count] : acc)
        report.means[name] = sum_count.first / sum_count.second;
    return report;
}

std::string format_report_table(const MetricReport& report) {
    std::vector<std::string> columns;
    for (const auto& [name, _] : report.means) columns.push_back(name);

    std::ostringstream out;
    out << "utterance";
    for (const auto& c : columns) out << "\t" << c;
    out << "\n";
    auto write_row = [&](const std::string& id, const std::map<std::string, double>& vals) {
        out << id;
        for (const auto& c : columns) {
            auto it = vals.find(c);
            out << "\t";
            if (it == vals.end()) {
                out << "-";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.6g", it->second);
                out << buf;
            }
        }
        out << "\n";
    };
    for (const auto& u : report.utterances) write_row(u.id, u.values);
    write_row("mean", report.means);
    for (const auto& f : report.failures) out << "FAILED\t" << f << "\n";
    return out.str();
}

}  // namespace lipsynth::metrics
