#include "lipsynth/toy/toy_corpus.hpp"

#include "lipsynth/common.hpp"
#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/io/manifest.hpp"
#include "lipsynth/io/run_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;

namespace lipsynth::toy {
namespace {

struct Syllable {
    double start;
    double stop;
};

// Harmonic voice: pitch glide, two formant-like resonances, raised-cosine
// syllable envelopes, a whisper of noise.
dsp::AudioWaveform synth_voice(double dur, double f0_start, double f0_end,
                               const std::vector<Syllable>& syllables, double formant1,
                               double formant2, uint64_t seed) {
    const int rate = 16000;
    const long n = static_cast<long>(std::lround(dur * rate));
    dsp::AudioWaveform wav;
    wav.rate = rate;
    wav.samples.assign(n, 0.0);

    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double edge = 0.020;  // s of fade at each syllable boundary

    double phase = 0.0;
    for (long i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / rate;
        double f0 = f0_start + (f0_end - f0_start) * (t / dur);
        phase += 2.0 * M_PI * f0 / rate;

        double env = 0.0;
        for (const auto& syl : syllables) {
            if (t < syl.start || t > syl.stop) continue;
            double rise = std::min(1.0, (t - syl.start) / edge);
            double fall = std::min(1.0, (syl.stop - t) / edge);
            double gate = std::min(rise, fall);
            env = 0.5 - 0.5 * std::cos(M_PI * std::min(1.0, gate));
        }
        if (env <= 0.0) {
            wav.samples[i] = 1e-4 * noise(rng);
            continue;
        }

        double s = 0.0;
        for (int h = 1; h <= 24; ++h) {
            double fh = h * f0;
            if (fh > 7000.0) break;
            double a = 1.0 / h;
            a += 0.8 * std::exp(-std::pow((fh - formant1) / 250.0, 2.0));
            a += 0.5 * std::exp(-std::pow((fh - formant2) / 350.0, 2.0));
            s += a * std::sin(h * phase);
        }
        wav.samples[i] = env * 0.25 * s + 1e-4 * noise(rng);
    }
    dsp::peak_normalize(wav, 0.95);
    return wav;
}

void write_g2p_table(const std::string& path) {
    const char* consonants[] = {"b", "d", "g", "m", "n", "p", "t", "k", "s", "l"};
    const char* vowels[] = {"a", "i", "o", "u"};
    std::ofstream out(path, std::ios::trunc);
    out << "# toy lookup table: consonant-vowel words\n";
    for (const char* c : consonants)
        for (const char* v : vowels) out << c << v << "\t" << c << " " << v << "\n";
}

}  // namespace

ToyCorpus make_toy_corpus(const std::string& dir, uint64_t seed) {
    fs::create_directories(dir + "/audio");

    ToyCorpus corpus;
    corpus.dir = dir;
    corpus.g2p_path = dir + "/g2p.tsv";
    corpus.manifest_path = dir + "/manifest.tsv";
    corpus.config_path = dir + "/toy.cfg";
    corpus.ids = {"toy_a", "toy_b"};

    write_g2p_table(corpus.g2p_path);

    dsp::AudioWaveform a =
        synth_voice(1.2, 185.0, 130.0,
                    {{0.05, 0.35}, {0.45, 0.75}, {0.85, 1.15}}, 700.0, 1200.0, seed);
    dsp::AudioWaveform b =
        synth_voice(1.0, 115.0, 175.0, {{0.05, 0.45}, {0.55, 0.95}}, 550.0, 1600.0, seed + 1);
    dsp::write_wav(dir + "/audio/toy_a.wav", a);
    dsp::write_wav(dir + "/audio/toy_b.wav", b);

    std::vector<io::UtteranceRecord> records;
    records.push_back({"toy_a", dir + "/audio/toy_a.wav", "", "train", "ba da ga"});
    records.push_back({"toy_b", dir + "/audio/toy_b.wav", "", "train", "mo ni"});
    io::write_manifest(corpus.manifest_path, records);

    std::string cfg_text;
    cfg_text += "# smoke-sized run\n";
    cfg_text += "seed = " + std::to_string(seed) + "\n";
    cfg_text += "model.hidden_dim = 64\n";
    cfg_text += "model.heads = 2\n";
    cfg_text += "model.fft_blocks_per_generator = 2\n";
    cfg_text += "model.conformer_layers = 2\n";
    cfg_text += "model.conv_kernel = 3\n";
    cfg_text += "model.ff_expansion = 2\n";
    cfg_text += "model.visual_dim = 32\n";
    cfg_text += "model.phoneme_embedding_dim = 32\n";
    cfg_text += "model.timbre_dim = 32\n";
    cfg_text += "model.visual_encoder_layers = 1\n";
    cfg_text += "model.phoneme_encoder_blocks = 1\n";
    cfg_text += "model.prompt_encoder_blocks = 1\n";
    cfg_text += "model.mel_decoder_channels = 48\n";
    cfg_text += "sra.n_reference_layers = 1\n";
    cfg_text += "units.clusters = 16\n";
    cfg_text += "units.feature_dim = 13\n";
    cfg_text += "train.epochs = 40\n";
    cfg_text += "train.lr = 0.001\n";
    cfg_text += "train.batch_size = 2\n";
    cfg_text += "train.warmup_steps = 50\n";
    cfg_text += "train.lr_decay_epochs = 100\n";
    cfg_text += "providers.g2p_table = " + corpus.g2p_path + "\n";
    cfg_text += "vocoder.iterations = 30\n";
    cfg_text += "synth.prompt_seconds = 0.3\n";
    {
        std::ofstream out(corpus.config_path, std::ios::trunc);
        out << cfg_text;
    }
    // round-trip as a guard against key drift
    (void)io::load_run_config(corpus.config_path);
    return corpus;
}

}  // namespace lipsynth::toy
