#include "lipsynth/train/dataset.hpp"

#include "lipsynth/io/array_container.hpp"

#include <cmath>
#include <stdexcept>

namespace lipsynth::train {

std::string cache_entry_path(const std::string& cache_dir, const std::string& id) {
    return cache_dir + "/" + id + ".arr";
}

model::ProsodyTeacher pool_prosody(const Example& ex, long factor) {
    const long t_v = ex.t_v();
    if (ex.f0.size() != t_v * factor || ex.energy.size() != t_v * factor)
        throw std::invalid_argument("pool_prosody: track length != T_v * factor");
    model::ProsodyTeacher teacher;
    teacher.f0.resize(t_v);
    teacher.energy.resize(t_v);
    for (long g = 0; g < t_v; ++g) {
        double f0_sum = 0.0, en_sum = 0.0;
        long voiced_n = 0;
        for (long k = 0; k < factor; ++k) {
            const long t = g * factor + k;
            if (ex.voiced[static_cast<size_t>(t)]) {
                f0_sum += ex.f0[t];
                ++voiced_n;
            }
            en_sum += ex.energy[t];
        }
        teacher.f0[g] = voiced_n > 0 ? f0_sum / voiced_n : 0.0;
        teacher.energy[g] = std::log1p(en_sum / factor);
    }
    return teacher;
}

Targets make_targets(const Example& ex, long factor) {
    const auto teacher = pool_prosody(ex, factor);
    Targets t;
    t.mel = ex.mel;
    t.f0 = teacher.f0;
    t.energy = teacher.energy;
    t.units = ex.units;
    return t;
}

Mat cut_prompt_random(const Mat& mel, long frames, Rng& rng) {
    if (mel.rows() < 1) throw std::invalid_argument("cut_prompt: empty mel");
    if (frames < 1) throw std::invalid_argument("cut_prompt: frames must be >= 1");
    if (mel.rows() <= frames) return mel;
    std::uniform_int_distribution<long> dist(0, mel.rows() - frames);
    return mel.middleRows(dist(rng), frames);
}

Mat cut_prompt_fixed(const Mat& mel, long frames) {
    if (mel.rows() < 1) throw std::invalid_argument("cut_prompt: empty mel");
    if (frames < 1) throw std::invalid_argument("cut_prompt: frames must be >= 1");
    if (mel.rows() <= frames) return mel;
    long start = mel.rows() / 4;
    start = std::min(start, mel.rows() - frames);
    return mel.middleRows(start, frames);
}

model::ModelInputs make_inputs(const Example& ex, const io::RunConfig& cfg, Rng* prompt_rng) {
    model::ModelInputs in;
    in.visual = ex.visual;
    in.phonemes = ex.phonemes;
    const long frames =
        std::max<long>(1, std::llround(cfg.prompt_seconds / cfg.spectrogram.hop_seconds()));
    in.prompt_mel = prompt_rng ? cut_prompt_random(ex.mel, frames, *prompt_rng)
                               : cut_prompt_fixed(ex.mel, frames);
    in.timbre = ex.timbre;
    return in;
}

Dataset::Dataset(std::vector<io::UtteranceRecord> records, std::string cache_dir, io::RunConfig cfg)
    : records_(std::move(records)), cache_dir_(std::move(cache_dir)), cfg_(std::move(cfg)) {}

Example Dataset::load(size_t i) const {
    const auto& rec = records_.at(i);
    const std::string path = cache_entry_path(cache_dir_, rec.id);
    io::ArrayMap arrays;
    try {
        arrays = io::read_arrays(path);
    } catch (const std::exception& e) {
        throw std::runtime_error("dataset: cannot load cache entry for '" + rec.id +
                                 "' (run prepare first): " + e.what());
    }
    auto need = [&](const char* name) -> const io::Array& {
        const auto it = arrays.find(name);
        if (it == arrays.end())
            throw std::runtime_error("dataset: cache entry for '" + rec.id + "' lacks array '" +
                                     std::string(name) + "'");
        return it->second;
    };

    Example ex;
    ex.id = rec.id;
    ex.visual = io::mat_from_array(need("visual"));
    ex.phonemes = io::ids_from_array(need("phonemes"));
    Mat mel = io::mat_from_array(need("mel"));
    const auto f0 = io::doubles_from_array(need("f0"));
    const auto energy = io::doubles_from_array(need("energy"));
    const auto voiced = io::ids_from_array(need("voiced"));
    const auto it_units = arrays.find("units");
    if (it_units == arrays.end())
        throw std::runtime_error("dataset: cache entry for '" + rec.id +
                                 "' has no unit ids (run train-units first)");
    const auto units = io::ids_from_array(it_units->second);
    const auto timbre = io::doubles_from_array(need("timbre"));

    const long factor = cfg_.model.length_factor;
    // Tracks are stored at the mel rate within +-1 frame of each other;
    // trim everything to a common T_v multiple.
    long t_mel = std::min<long>(mel.rows(), static_cast<long>(f0.size()));
    t_mel = std::min<long>(t_mel, static_cast<long>(energy.size()));
    t_mel = std::min<long>(t_mel, static_cast<long>(voiced.size()));
    long t_v = std::min<long>(ex.visual.rows(), t_mel / factor);
    long t_u = std::min<long>(static_cast<long>(units.size()), t_v * factor / 2);
    t_v = std::min(t_v, t_u * 2 / factor);
    if (t_v < 1)
        throw std::runtime_error("dataset: utterance '" + rec.id + "' too short after alignment");
    t_mel = t_v * factor;
    t_u = t_v * factor / 2;

    ex.visual = ex.visual.topRows(t_v).eval();
    ex.mel = mel.topRows(t_mel).eval();
    ex.f0 = Eigen::Map<const Eigen::VectorXd>(f0.data(), t_mel);
    ex.energy = Eigen::Map<const Eigen::VectorXd>(energy.data(), t_mel);
    ex.voiced.assign(voiced.begin(), voiced.begin() + t_mel);
    ex.units.assign(units.begin(), units.begin() + t_u);
    ex.timbre = Eigen::Map<const Eigen::VectorXd>(timbre.data(), static_cast<long>(timbre.size()));
    return ex;
}

}  // namespace lipsynth::train
