#include "lipsynth/io/run_config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lipsynth::io {

namespace {

std::string fmt_double(double v) {
    // Shortest representation that parses back to the same bits.
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::runtime_error("expected a number, got '" + s + "'");
    return v;
}

long to_long(const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw std::runtime_error("expected an integer, got '" + s + "'");
    return v;
}

uint64_t to_u64(const std::string& s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("expected a non-negative integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::runtime_error("expected true or false, got '" + s + "'");
}

struct Binding {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <typename S>
Binding bind_long(std::string key, S RunConfig::* sub, long S::* field) {
    return {std::move(key),
            [sub, field](const RunConfig& c) { return std::to_string(c.*sub.*field); },
            [sub, field](RunConfig& c, const std::string& v) { c.*sub.*field = to_long(v); }};
}

template <typename S>
Binding bind_int(std::string key, S RunConfig::* sub, int S::* field) {
    return {std::move(key),
            [sub, field](const RunConfig& c) { return std::to_string(c.*sub.*field); },
            [sub, field](RunConfig& c, const std::string& v) { c.*sub.*field = static_cast<int>(to_long(v)); }};
}

template <typename S>
Binding bind_double(std::string key, S RunConfig::* sub, double S::* field) {
    return {std::move(key),
            [sub, field](const RunConfig& c) { return fmt_double(c.*sub.*field); },
            [sub, field](RunConfig& c, const std::string& v) { c.*sub.*field = to_double(v); }};
}

template <typename S>
Binding bind_bool(std::string key, S RunConfig::* sub, bool S::* field) {
    return {std::move(key),
            [sub, field](const RunConfig& c) { return c.*sub.*field ? "true" : "false"; },
            [sub, field](RunConfig& c, const std::string& v) { c.*sub.*field = to_bool(v); }};
}

template <typename S>
Binding bind_string(std::string key, S RunConfig::* sub, std::string S::* field) {
    return {std::move(key),
            [sub, field](const RunConfig& c) { return c.*sub.*field; },
            [sub, field](RunConfig& c, const std::string& v) { c.*sub.*field = v; }};
}

std::vector<Binding> make_bindings() {
    using RC = RunConfig;
    std::vector<Binding> b;

    b.push_back({"seed", [](const RC& c) { return std::to_string(c.seed); },
                 [](RC& c, const std::string& v) { c.seed = to_u64(v); }});

    b.push_back(bind_int("spectrogram.sample_rate", &RC::spectrogram, &dsp::SpectrogramConfig::sample_rate));
    b.push_back(bind_int("spectrogram.fft_size", &RC::spectrogram, &dsp::SpectrogramConfig::fft_size));
    b.push_back(bind_int("spectrogram.hop", &RC::spectrogram, &dsp::SpectrogramConfig::hop));
    b.push_back(bind_int("spectrogram.win", &RC::spectrogram, &dsp::SpectrogramConfig::win));
    b.push_back(bind_int("spectrogram.n_mels", &RC::spectrogram, &dsp::SpectrogramConfig::n_mels));
    b.push_back(bind_double("spectrogram.fmin", &RC::spectrogram, &dsp::SpectrogramConfig::fmin));
    b.push_back(bind_double("spectrogram.fmax", &RC::spectrogram, &dsp::SpectrogramConfig::fmax));
    b.push_back(bind_double("spectrogram.log_floor", &RC::spectrogram, &dsp::SpectrogramConfig::log_floor));
    b.push_back(bind_bool("spectrogram.center", &RC::spectrogram, &dsp::SpectrogramConfig::center));

    b.push_back(bind_double("pitch.f0_min", &RC::pitch, &dsp::PitchConfig::f0_min));
    b.push_back(bind_double("pitch.f0_max", &RC::pitch, &dsp::PitchConfig::f0_max));
    b.push_back(bind_double("pitch.voicing_threshold", &RC::pitch, &dsp::PitchConfig::voicing_threshold));

    auto block = [](RC& c) -> nn::BlockConfig& { return c.model.block; };
    b.push_back({"model.hidden_dim",
                 [](const RC& c) { return std::to_string(c.model.block.hidden_dim); },
                 [block](RC& c, const std::string& v) { block(c).hidden_dim = to_long(v); }});
    b.push_back({"model.heads", [](const RC& c) { return std::to_string(c.model.block.heads); },
                 [block](RC& c, const std::string& v) { block(c).heads = to_long(v); }});
    b.push_back({"model.fft_blocks_per_generator",
                 [](const RC& c) { return std::to_string(c.model.block.fft_blocks_per_generator); },
                 [block](RC& c, const std::string& v) { block(c).fft_blocks_per_generator = to_long(v); }});
    b.push_back({"model.conformer_layers",
                 [](const RC& c) { return std::to_string(c.model.block.conformer_layers); },
                 [block](RC& c, const std::string& v) { block(c).conformer_layers = to_long(v); }});
    b.push_back({"model.conv_kernel",
                 [](const RC& c) { return std::to_string(c.model.block.conv_kernel); },
                 [block](RC& c, const std::string& v) { block(c).conv_kernel = to_long(v); }});
    b.push_back({"model.dropout", [](const RC& c) { return fmt_double(c.model.block.dropout); },
                 [block](RC& c, const std::string& v) { block(c).dropout = to_double(v); }});
    b.push_back({"model.ff_expansion",
                 [](const RC& c) { return std::to_string(c.model.block.ff_expansion); },
                 [block](RC& c, const std::string& v) { block(c).ff_expansion = to_long(v); }});

    b.push_back(bind_long("model.visual_dim", &RC::model, &model::ModelConfig::visual_dim));
    b.push_back(bind_long("model.phoneme_inventory", &RC::model, &model::ModelConfig::phoneme_inventory));
    b.push_back(bind_long("model.phoneme_embedding_dim", &RC::model, &model::ModelConfig::phoneme_embedding_dim));
    b.push_back(bind_long("model.timbre_dim", &RC::model, &model::ModelConfig::timbre_dim));
    b.push_back(bind_long("model.visual_encoder_layers", &RC::model, &model::ModelConfig::visual_encoder_layers));
    b.push_back(bind_long("model.phoneme_encoder_blocks", &RC::model, &model::ModelConfig::phoneme_encoder_blocks));
    b.push_back(bind_long("model.prompt_encoder_blocks", &RC::model, &model::ModelConfig::prompt_encoder_blocks));
    b.push_back(bind_long("model.mel_decoder_channels", &RC::model, &model::ModelConfig::mel_decoder_channels));
    b.push_back(bind_long("model.mel_decoder_kernel", &RC::model, &model::ModelConfig::mel_decoder_kernel));

    b.push_back({"sra.n_reference_layers",
                 [](const RC& c) { return std::to_string(c.model.sra.n_reference_layers); },
                 [](RC& c, const std::string& v) { c.model.sra.n_reference_layers = to_long(v); }});

    b.push_back(bind_long("units.clusters", &RC::units, &UnitsConfig::clusters));
    b.push_back(bind_long("units.feature_dim", &RC::units, &UnitsConfig::feature_dim));

    b.push_back(bind_double("loss.lambda_m", &RC::loss, &train::LossWeights::lambda_m));
    b.push_back(bind_double("loss.lambda_p", &RC::loss, &train::LossWeights::lambda_p));
    b.push_back(bind_double("loss.lambda_e", &RC::loss, &train::LossWeights::lambda_e));
    b.push_back(bind_double("loss.lambda_u", &RC::loss, &train::LossWeights::lambda_u));
    b.push_back(bind_double("loss.label_smoothing", &RC::loss, &train::LossWeights::label_smoothing));

    b.push_back(bind_long("train.epochs", &RC::train, &train::TrainConfig::epochs));
    b.push_back(bind_double("train.lr", &RC::train, &train::TrainConfig::lr));
    b.push_back(bind_long("train.batch_size", &RC::train, &train::TrainConfig::batch_size));
    b.push_back(bind_long("train.warmup_steps", &RC::train, &train::TrainConfig::warmup_steps));
    b.push_back(bind_double("train.grad_clip", &RC::train, &train::TrainConfig::grad_clip));
    b.push_back(bind_long("train.lr_decay_epochs", &RC::train, &train::TrainConfig::lr_decay_epochs));
    b.push_back(bind_double("train.lr_decay_factor", &RC::train, &train::TrainConfig::lr_decay_factor));
    b.push_back({"train.no_l2t_sra",
                 [](const RC& c) { return c.train.flags.no_l2t_sra ? "true" : "false"; },
                 [](RC& c, const std::string& v) { c.train.flags.no_l2t_sra = to_bool(v); }});
    b.push_back({"train.no_acoustic_branch",
                 [](const RC& c) { return c.train.flags.no_acoustic_branch ? "true" : "false"; },
                 [](RC& c, const std::string& v) { c.train.flags.no_acoustic_branch = to_bool(v); }});
    b.push_back({"train.no_energy_predictor",
                 [](const RC& c) { return c.train.flags.no_energy_predictor ? "true" : "false"; },
                 [](RC& c, const std::string& v) { c.train.flags.no_energy_predictor = to_bool(v); }});

    b.push_back(bind_string("providers.visual_mode", &RC::providers, &ProvidersConfig::visual_mode));
    b.push_back(bind_string("providers.phoneme_mode", &RC::providers, &ProvidersConfig::phoneme_mode));
    b.push_back(bind_string("providers.timbre_mode", &RC::providers, &ProvidersConfig::timbre_mode));
    b.push_back(bind_string("providers.g2p_table", &RC::providers, &ProvidersConfig::g2p_table));

    b.push_back(bind_string("vocoder.kind", &RC::vocoder, &VocoderConfig::kind));
    b.push_back(bind_long("vocoder.iterations", &RC::vocoder, &VocoderConfig::iterations));

    b.push_back({"synth.prompt_seconds", [](const RC& c) { return fmt_double(c.prompt_seconds); },
                 [](RC& c, const std::string& v) { c.prompt_seconds = to_double(v); }});
    return b;
}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> b = make_bindings();
    return b;
}

std::string trim(const std::string& s) {
    size_t a = 0, z = s.size();
    while (a < z && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (z > a && std::isspace(static_cast<unsigned char>(s[z - 1]))) --z;
    return s.substr(a, z - a);
}

}  // namespace

void ProvidersConfig::validate() const {
    if (visual_mode != "synthetic" && visual_mode != "file")
        throw std::invalid_argument("config: providers.visual_mode must be synthetic or file");
    if (phoneme_mode != "transcript" && phoneme_mode != "file")
        throw std::invalid_argument("config: providers.phoneme_mode must be transcript or file");
    if (timbre_mode != "stub" && timbre_mode != "file")
        throw std::invalid_argument("config: providers.timbre_mode must be stub or file");
}

void UnitsConfig::validate() const {
    if (clusters < 1) throw std::invalid_argument("config: units.clusters must be >= 1");
    if (feature_dim < 1) throw std::invalid_argument("config: units.feature_dim must be >= 1");
}

void VocoderConfig::validate() const {
    if (kind != "griffin_lim")
        throw std::invalid_argument("config: vocoder.kind must be griffin_lim");
    if (iterations < 0) throw std::invalid_argument("config: vocoder.iterations must be >= 0");
}

void RunConfig::finalize() {
    model.n_mels = spectrogram.n_mels;
    model.unit_clusters = units.clusters;
    model.sra.conformer_layers = model.block.conformer_layers;
    pitch.hop_seconds = spectrogram.hop_seconds();
    train.seed = seed;
    if (prompt_seconds <= 0.0)
        throw std::invalid_argument("config: synth.prompt_seconds must be positive");
    spectrogram.validate();
    pitch.validate();
    model.validate();
    loss.validate();
    train.validate();
    providers.validate();
    units.validate();
    vocoder.validate();
}

RunConfig parse_run_config_text(const std::string& text, RunConfig base) {
    std::map<std::string, const Binding*> by_key;
    for (const auto& b : bindings()) by_key[b.key] = &b;

    std::istringstream is(text);
    std::string line;
    long line_no = 0;
    std::map<std::string, long> seen;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "config: line " << line_no << ": expected 'key = value'";
            throw std::runtime_error(msg.str());
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
            std::ostringstream msg;
            msg << "config: line " << line_no << ": unknown key '" << key << "'";
            throw std::runtime_error(msg.str());
        }
        if (const auto prev = seen.find(key); prev != seen.end()) {
            std::ostringstream msg;
            msg << "config: line " << line_no << ": duplicate key '" << key << "' (first on line "
                << prev->second << ")";
            throw std::runtime_error(msg.str());
        }
        seen[key] = line_no;
        try {
            it->second->set(base, value);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "config: line " << line_no << ": " << key << ": " << e.what();
            throw std::runtime_error(msg.str());
        }
    }
    base.finalize();
    return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_run_config_text(buf.str(), std::move(base));
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& b : bindings()) os << b.key << " = " << b.get(cfg) << '\n';
    return os.str();
}

std::map<std::string, std::string> config_key_values(const RunConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& b : bindings()) out[b.key] = b.get(cfg);
    return out;
}

}  // namespace lipsynth::io
