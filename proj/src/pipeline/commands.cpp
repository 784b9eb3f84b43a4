#include "lipsynth/pipeline/commands.hpp"

#include "lipsynth/dsp/pitch.hpp"
#include "lipsynth/dsp/spectrogram.hpp"
#include "lipsynth/io/array_container.hpp"
#include "lipsynth/metrics/metrics.hpp"
#include "lipsynth/providers/g2p.hpp"
#include "lipsynth/providers/timbre.hpp"
#include "lipsynth/providers/units.hpp"
#include "lipsynth/providers/visual.hpp"
#include "lipsynth/train/checkpoint.hpp"
#include "lipsynth/train/dataset.hpp"
#include "lipsynth/train/trainer.hpp"
#include "lipsynth/vocoder/griffin_lim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;

namespace lipsynth::pipeline {
namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<io::UtteranceRecord> records_for_split(const std::vector<io::UtteranceRecord>& all,
                                                   const std::string& split) {
    if (split == "all") return all;
    std::vector<io::UtteranceRecord> out;
    for (const auto& r : all)
        if (r.split == split) out.push_back(r);
    if (out.empty())
        throw std::runtime_error("no utterances in split '" + split + "'");
    return out;
}

// fan a per-index job over a small thread pool; jobs must be independent
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

dsp::AudioWaveform load_audio(const std::string& path, int rate) {
    dsp::AudioWaveform wav = dsp::read_wav(path);
    wav = dsp::resample(wav, rate);
    dsp::peak_normalize(wav, 0.95);
    return wav;
}

bool cache_entry_fresh(const io::UtteranceRecord& rec, const std::string& entry) {
    std::error_code ec;
    auto entry_time = fs::last_write_time(entry, ec);
    if (ec) return false;
    auto audio_time = fs::last_write_time(rec.audio_path, ec);
    if (ec) return false;
    if (entry_time < audio_time) return false;
    if (!rec.visual_feature_path.empty()) {
        auto vis_time = fs::last_write_time(rec.visual_feature_path, ec);
        if (!ec && entry_time < vis_time) return false;
    }
    return true;
}

}  // namespace

int cmd_prepare(const std::string& manifest_path, const io::RunConfig& cfg,
                const std::string& cache_dir, PrepareStats* stats) {
    const auto records = io::parse_manifest(manifest_path);
    fs::create_directories(cache_dir);

    std::optional<providers::G2p> g2p;
    if (cfg.providers.phoneme_mode == "transcript") {
        if (cfg.providers.g2p_table.empty())
            throw std::runtime_error("prepare: providers.g2p_table not set");
        g2p = providers::G2p::from_file(cfg.providers.g2p_table);
        if (g2p->inventory_size() > cfg.model.phoneme_inventory)
            throw std::runtime_error("prepare: g2p inventory (" +
                                     std::to_string(g2p->inventory_size()) +
                                     ") exceeds model.phoneme_inventory (" +
                                     std::to_string(cfg.model.phoneme_inventory) + ")");
    }

    // unit features live at half the mel rate
    dsp::SpectrogramConfig unit_cfg = cfg.spectrogram;
    unit_cfg.hop = cfg.spectrogram.hop * 2;

    struct Slot {
        bool failed = false;
        bool skipped = false;
        std::string error;
    };
    std::vector<Slot> slots(records.size());

    parallel_for(records.size(), [&](std::size_t i) {
        const io::UtteranceRecord& rec = records[i];
        Slot& slot = slots[i];
        try {
            const std::string entry = train::cache_entry_path(cache_dir, rec.id);
            if (cache_entry_fresh(rec, entry)) {
                slot.skipped = true;
                return;
            }
            dsp::AudioWaveform wav = load_audio(rec.audio_path, cfg.spectrogram.sample_rate);
            dsp::LinearSpectrogram lin = dsp::linear_spectrogram(wav, cfg.spectrogram);
            dsp::MelSpectrogram mel = dsp::mel_from_linear(lin, cfg.spectrogram);
            std::vector<double> energy = dsp::frame_energy(lin);
            dsp::ProsodyTrack pitch = dsp::extract_f0(wav, cfg.pitch);

            providers::VisualFeatures vis;
            if (cfg.providers.visual_mode == "file") {
                if (rec.visual_feature_path.empty())
                    throw std::runtime_error("manifest has no visual feature path");
                vis = providers::load_visual_file(rec.visual_feature_path, cfg.model.visual_dim);
            } else {
                long t_v = std::max<long>(1, std::llround(wav.duration_seconds() * 25.0));
                vis = providers::synthetic_visual(rec.id, cfg.seed, t_v, cfg.model.visual_dim);
            }

            std::vector<int> phonemes;
            if (cfg.providers.phoneme_mode == "file") {
                if (rec.visual_feature_path.empty())
                    throw std::runtime_error("phoneme file mode needs a feature container path");
                io::ArrayMap ext = io::read_arrays(rec.visual_feature_path);
                auto it = ext.find("phonemes");
                if (it == ext.end())
                    throw std::runtime_error("feature container lacks 'phonemes' array");
                phonemes = io::ids_from_array(it->second);
            } else {
                phonemes = g2p->to_phonemes(rec.transcript).ids;
            }

            providers::TimbreEmbedding timbre;
            if (cfg.providers.timbre_mode == "file") {
                if (rec.visual_feature_path.empty())
                    throw std::runtime_error("timbre file mode needs a feature container path");
                timbre = providers::load_timbre_file(rec.visual_feature_path, cfg.model.timbre_dim);
            } else {
                timbre = providers::timbre_stub(mel, cfg.seed, cfg.model.timbre_dim);
            }

            dsp::MelSpectrogram unit_mel = dsp::mel_spectrogram(wav, unit_cfg);
            Mat unit_feats = dsp::mel_cepstra(unit_mel, static_cast<int>(cfg.units.feature_dim),
                                              /*drop_c0=*/false);

            std::vector<int> voiced(pitch.voiced.size());
            for (std::size_t t = 0; t < pitch.voiced.size(); ++t) voiced[t] = pitch.voiced[t] ? 1 : 0;

            io::ArrayMap arrays;
            arrays["visual"] = io::array_from_mat(vis.matrix);
            arrays["phonemes"] = io::array_from_ids(phonemes);
            arrays["mel"] = io::array_from_mat(mel.frames);
            arrays["f0"] = io::array_from_doubles(pitch.f0_hz);
            arrays["energy"] = io::array_from_doubles(energy);
            arrays["voiced"] = io::array_from_ids(voiced);
            arrays["timbre"] = io::array_from_doubles(
                std::vector<double>(timbre.vector.data(), timbre.vector.data() + timbre.vector.size()));
            arrays["unit_feats"] = io::array_from_mat(unit_feats);
            io::write_arrays(entry, arrays);
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.error = e.what();
        }
    });

    PrepareStats local;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (slots[i].failed) {
            ++local.failed;
            std::cerr << "prepare: " << records[i].id << ": " << slots[i].error << "\n";
        } else if (slots[i].skipped) {
            ++local.skipped;
        } else {
            ++local.processed;
        }
    }
    std::cout << "prepare: " << local.processed << " processed, " << local.skipped
              << " up-to-date, " << local.failed << " failed\n";
    if (stats) *stats = local;
    return local.failed > 0 ? exit_partial : exit_ok;
}

int cmd_train_units(const std::string& manifest_path, const io::RunConfig& cfg,
                    const std::string& cache_dir) {
    const auto records = io::parse_manifest(manifest_path);
    std::vector<io::UtteranceRecord> train_recs = records_for_split(records, "train");

    std::vector<Mat> features;
    features.reserve(train_recs.size());
    for (const auto& rec : train_recs) {
        io::ArrayMap arrays = io::read_arrays(train::cache_entry_path(cache_dir, rec.id));
        auto it = arrays.find("unit_feats");
        if (it == arrays.end())
            throw std::runtime_error("train-units: cache entry for '" + rec.id +
                                     "' lacks unit features (run prepare first)");
        features.push_back(io::mat_from_array(it->second));
    }

    providers::UnitCodebook codebook =
        providers::train_unit_quantizer(features, cfg.units.clusters, cfg.seed);
    const std::string codebook_path = cache_dir + "/units.codebook";
    providers::save_codebook(codebook_path, codebook);

    // label every split with the train-fit codebook
    for (const auto& rec : records) {
        const std::string entry = train::cache_entry_path(cache_dir, rec.id);
        io::ArrayMap arrays = io::read_arrays(entry);
        auto it = arrays.find("unit_feats");
        if (it == arrays.end())
            throw std::runtime_error("train-units: cache entry for '" + rec.id +
                                     "' lacks unit features (run prepare first)");
        providers::SpeechUnits units = providers::quantize_units(io::mat_from_array(it->second), codebook);
        arrays["units"] = io::array_from_ids(units.ids);
        io::write_arrays(entry, arrays);
    }

    double distortion = 0.0;
    for (const auto& m : features) distortion += providers::quantization_distortion(m, codebook);
    distortion /= static_cast<double>(features.size());
    std::cout << "train-units: " << cfg.units.clusters << " clusters over " << features.size()
              << " utterances, mean distortion " << distortion << ", codebook at " << codebook_path
              << "\n";
    return exit_ok;
}

int cmd_train(const std::string& manifest_path, const io::RunConfig& cfg,
              const std::string& cache_dir, const std::string& out_dir, const TrainOptions& opts) {
    const auto records = io::parse_manifest(manifest_path);
    std::vector<io::UtteranceRecord> train_recs = records_for_split(records, "train");
    std::vector<io::UtteranceRecord> val_recs;
    for (const auto& r : records)
        if (r.split == "val") val_recs.push_back(r);

    train::Dataset train_set(train_recs, cache_dir, cfg);
    std::optional<train::Dataset> val_set;
    if (!val_recs.empty()) val_set.emplace(val_recs, cache_dir, cfg);

    train::TrainingOutcome outcome = train::run_training(
        train_set, val_set ? &*val_set : nullptr, cfg, out_dir, opts.resume);
    std::cout << "train: " << outcome.steps << " steps, l_total " << outcome.first.l_total
              << " -> " << outcome.last.l_total << ", checkpoint at " << outcome.checkpoint_path
              << "\n";
    return exit_ok;
}

int cmd_synth(const std::string& checkpoint_path, const std::string& manifest_path,
              const io::RunConfig& cfg, const std::string& cache_dir,
              const std::string& out_dir, const SynthOptions& opts) {
    if (cfg.vocoder.kind != "griffin_lim")
        throw std::runtime_error("synth: unknown vocoder '" + cfg.vocoder.kind + "'");
    train::LoadedCheckpoint ck = train::load_checkpoint(checkpoint_path);
    train::check_config_compatible(cfg, ck.raw.config_text);
    model::Model m(cfg.model, cfg.seed);
    train::restore_params(m, ck.raw);

    const auto all_records = io::parse_manifest(manifest_path);
    std::vector<io::UtteranceRecord> records = records_for_split(all_records, opts.split);
    fs::create_directories(out_dir);

    auto read_entry = [&](const std::string& id) {
        const std::string entry = train::cache_entry_path(cache_dir, id);
        if (!fs::exists(entry))
            throw std::runtime_error("no cache entry for '" + id + "' (run prepare first)");
        return io::read_arrays(entry);
    };

    long prompt_frames =
        std::max<long>(1, std::llround(cfg.prompt_seconds / cfg.spectrogram.hop_seconds()));

    struct Slot {
        bool failed = false;
        std::string error;
        double audio_seconds = 0.0;
        double wall_seconds = 0.0;
    };
    std::vector<Slot> slots(records.size());

    // model forward shares no mutable state across utterances; fan out
    parallel_for(records.size(), [&](std::size_t i) {
        const io::UtteranceRecord& rec = records[i];
        Slot& slot = slots[i];
        try {
            io::ArrayMap entry = read_entry(rec.id);
            auto need = [&](const char* name) -> const io::Array& {
                auto it = entry.find(name);
                if (it == entry.end())
                    throw std::runtime_error("cache entry lacks array '" + std::string(name) + "'");
                return it->second;
            };
            model::ModelInputs in;
            in.visual = io::mat_from_array(need("visual"));
            in.phonemes = io::ids_from_array(need("phonemes"));

            const std::string prompt_id = opts.prompt_source.empty() ? rec.id : opts.prompt_source;
            io::ArrayMap prompt_entry = prompt_id == rec.id ? entry : read_entry(prompt_id);
            auto pit = prompt_entry.find("mel");
            if (pit == prompt_entry.end())
                throw std::runtime_error("prompt cache entry lacks 'mel'");
            in.prompt_mel = train::cut_prompt_fixed(io::mat_from_array(pit->second), prompt_frames);
            auto tit = prompt_entry.find("timbre");
            if (tit == prompt_entry.end())
                throw std::runtime_error("prompt cache entry lacks 'timbre'");
            std::vector<double> tv = io::doubles_from_array(tit->second);
            in.timbre = Eigen::Map<Eigen::VectorXd>(tv.data(), static_cast<long>(tv.size()));

            auto t0 = std::chrono::steady_clock::now();
            nn::Ctx ctx = nn::eval_ctx();
            model::DecoderOutput out = m.forward(ctx, in, cfg.train.flags);
            dsp::MelSpectrogram mel;
            mel.frames = out.mel_fine.value();
            mel.hop_seconds = cfg.spectrogram.hop_seconds();
            vocoder::VocoderOptions vopts;
            vopts.iterations = cfg.vocoder.iterations;
            vopts.seed = cfg.seed ^ fnv1a(rec.id);
            dsp::AudioWaveform wav =
                vocoder::griffin_lim_vocode(mel, nullptr, cfg.spectrogram, vopts);
            dsp::peak_normalize(wav, 0.95);
            auto t1 = std::chrono::steady_clock::now();

            dsp::write_wav(out_dir + "/" + rec.id + ".wav", wav);
            std::ofstream txt(out_dir + "/" + rec.id + ".txt", std::ios::trunc);
            txt << rec.transcript << "\n";

            slot.audio_seconds = wav.duration_seconds();
            slot.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.error = e.what();
        }
    });

    std::ofstream rtf_log(out_dir + "/rtf.tsv", std::ios::trunc);
    rtf_log << "# id\taudio_seconds\twall_seconds\trtf\n";
    long failed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Slot& slot = slots[i];
        if (slot.failed) {
            ++failed;
            std::cerr << "synth: " << records[i].id << ": " << slot.error << "\n";
            continue;
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f", records[i].id.c_str(),
                      slot.audio_seconds, slot.wall_seconds,
                      metrics::rtf(slot.audio_seconds, slot.wall_seconds));
        rtf_log << buf << "\n";
    }
    std::cout << "synth: " << (records.size() - failed) << " utterances to " << out_dir;
    if (failed > 0) std::cout << ", " << failed << " failed";
    std::cout << "\n";
    return failed > 0 ? exit_partial : exit_ok;
}

int cmd_eval(const std::string& manifest_path, const std::string& synth_dir,
             const io::RunConfig& cfg, const std::string& out_dir, const EvalOptions& opts) {
    const auto all_records = io::parse_manifest(manifest_path);
    std::vector<io::UtteranceRecord> records = records_for_split(all_records, opts.split);

    metrics::EvalConfig ecfg;
    ecfg.spectrogram = cfg.spectrogram;
    ecfg.pitch = cfg.pitch;
    ecfg.seed = cfg.seed;
    ecfg.timbre_dim = cfg.model.timbre_dim;
    ecfg.selected = opts.metrics;

    metrics::MetricReport report = metrics::evaluate_corpus(records, synth_dir, ecfg);
    std::string table = metrics::format_report_table(report);
    std::cout << table;

    fs::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.txt", std::ios::trunc);
        out << table;
    }
    {
        std::ofstream out(out_dir + "/report.jsonl", std::ios::trunc);
        auto write_record = [&](const std::string& id, const std::map<std::string, double>& vals) {
            out << "{\"id\":\"" << id << "\"";
            for (const auto& [name, value] : vals) {
                char buf[48];
                std::snprintf(buf, sizeof(buf), "%.10g", value);
                out << ",\"" << name << "\":" << buf;
            }
            out << "}\n";
        };
        for (const auto& u : report.utterances) write_record(u.id, u.values);
        write_record("mean", report.means);
        for (const auto& f : report.failures) out << "{\"failed\":\"" << f << "\"}\n";
    }
    for (const auto& f : report.failures) std::cerr << "eval: failed: " << f << "\n";
    return report.failures.empty() ? exit_ok : exit_partial;
}

}  // namespace lipsynth::pipeline
