#pragma once

#include "lipsynth/io/manifest.hpp"
#include "lipsynth/io/run_config.hpp"

#include <set>
#include <string>

namespace lipsynth::pipeline {

// Exit-code convention shared with the CLI: 0 success, 1 usage/config error
// (surfaced as exceptions), 2 partial data failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_partial = 2;

struct PrepareStats {
    long processed = 0;
    long skipped = 0;
    long failed = 0;
};

// Audio -> cache entries (<cache>/<id>.arr): mel + linear energy + f0 +
// visual features + phoneme ids + timbre + unit features. Idempotent: entries
// newer than their inputs are left untouched.
int cmd_prepare(const std::string& manifest_path, const io::RunConfig& cfg,
                const std::string& cache_dir, PrepareStats* stats = nullptr);

// K-means codebook over train-split unit features, then writes "units" ids
// into every cache entry.
int cmd_train_units(const std::string& manifest_path, const io::RunConfig& cfg,
                    const std::string& cache_dir);

struct TrainOptions {
    std::string resume;  // checkpoint path; empty = fresh run
};
int cmd_train(const std::string& manifest_path, const io::RunConfig& cfg,
              const std::string& cache_dir, const std::string& out_dir,
              const TrainOptions& opts = {});

struct SynthOptions {
    std::string split = "test";
    std::string prompt_source;  // utterance id supplying prompt+timbre; empty = self
};
int cmd_synth(const std::string& checkpoint_path, const std::string& manifest_path,
              const io::RunConfig& cfg, const std::string& cache_dir,
              const std::string& out_dir, const SynthOptions& opts = {});

struct EvalOptions {
    std::string split = "test";
    std::set<std::string> metrics;  // empty = all
};
int cmd_eval(const std::string& manifest_path, const std::string& synth_dir,
             const io::RunConfig& cfg, const std::string& out_dir,
             const EvalOptions& opts = {});

}  // namespace lipsynth::pipeline
