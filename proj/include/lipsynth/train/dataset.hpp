#pragma once

#include "lipsynth/io/manifest.hpp"
#include "lipsynth/io/run_config.hpp"
#include "lipsynth/model/model.hpp"
#include "lipsynth/train/loss.hpp"

namespace lipsynth::train {

// One cached utterance, trimmed so the rates line up exactly:
// mel/f0/energy at 4*T_v frames, units at 2*T_v.
struct Example {
    std::string id;
    Mat visual;                   // T_v x D_v
    std::vector<int> phonemes;    // T_p
    Mat mel;                      // 4*T_v x n_mels
    Eigen::VectorXd f0;           // 4*T_v, Hz (0 unvoiced)
    std::vector<uint8_t> voiced;  // 4*T_v
    Eigen::VectorXd energy;       // 4*T_v, linear L2 norms
    std::vector<int> units;       // 2*T_v
    Eigen::VectorXd timbre;       // D_t

    long t_v() const { return visual.rows(); }
};

std::string cache_entry_path(const std::string& cache_dir, const std::string& id);

// 4:1 pooling to the linguistic rate: f0 = mean over voiced frames per group
// (0 when none voiced), energy = log1p(mean of the raw group).
model::ProsodyTeacher pool_prosody(const Example& ex, long factor);

Targets make_targets(const Example& ex, long factor);

// Prompt windows cut from a (usually ground-truth) mel. `frames` derives from
// prompt_seconds / hop_seconds. Shorter inputs pass through whole.
Mat cut_prompt_random(const Mat& mel, long frames, Rng& rng);
Mat cut_prompt_fixed(const Mat& mel, long frames);  // starts at 25% of the source

// prompt_rng == nullptr -> deterministic 25%-start window.
model::ModelInputs make_inputs(const Example& ex, const io::RunConfig& cfg, Rng* prompt_rng);

class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<io::UtteranceRecord> records, std::string cache_dir, io::RunConfig cfg);

    size_t size() const { return records_.size(); }
    const io::UtteranceRecord& record(size_t i) const { return records_.at(i); }
    // Loads the cache entry; throws when prepare/train-units have not run.
    Example load(size_t i) const;

private:
    std::vector<io::UtteranceRecord> records_;
    std::string cache_dir_;
    io::RunConfig cfg_;
};

}  // namespace lipsynth::train
