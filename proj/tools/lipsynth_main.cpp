#include "lipsynth/io/run_config.hpp"
#include "lipsynth/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

using lipsynth::io::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::string manifest_path;
    std::string cache_dir;
    long seed = -1;
    bool no_l2t_sra = false;
    bool no_acoustic_branch = false;
    bool no_energy_predictor = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_manifest = true) {
    cmd->add_option("--config", args.config_path, "run config file (defaults apply when omitted)");
    if (with_manifest)
        cmd->add_option("--manifest", args.manifest_path, "utterance manifest (TSV)")->required();
    cmd->add_option("--cache", args.cache_dir,
                    "feature cache directory (default $LIPSYNTH_CACHE or ./cache)");
    cmd->add_option("--seed", args.seed, "override config seed");
}

void add_ablations(CLI::App* cmd, CommonArgs& args) {
    cmd->add_flag("--no-l2t-sra", args.no_l2t_sra, "drop the phoneme reference path");
    cmd->add_flag("--no-acoustic-branch", args.no_acoustic_branch,
                  "replace the acoustic branch with a learned constant");
    cmd->add_flag("--no-energy-predictor", args.no_energy_predictor, "drop the energy predictor");
}

RunConfig resolve_config(CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = lipsynth::io::load_run_config(args.config_path);
    bool dirty = false;
    if (args.seed >= 0) {
        cfg.seed = static_cast<uint64_t>(args.seed);
        dirty = true;
    }
    if (args.no_l2t_sra) cfg.train.flags.no_l2t_sra = true;
    if (args.no_acoustic_branch) cfg.train.flags.no_acoustic_branch = true;
    if (args.no_energy_predictor) cfg.train.flags.no_energy_predictor = true;
    if (dirty) cfg.finalize();

    if (args.cache_dir.empty()) {
        const char* env = std::getenv("LIPSYNTH_CACHE");
        args.cache_dir = env && *env ? env : "./cache";
    }
    return cfg;
}

std::set<std::string> parse_metric_list(const std::string& csv) {
    std::set<std::string> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lip-to-speech pipeline"};
    app.require_subcommand(1);

    CommonArgs prep_args;
    CLI::App* prepare = app.add_subcommand("prepare", "extract features into the cache");
    add_common(prepare, prep_args);

    CommonArgs units_args;
    CLI::App* train_units = app.add_subcommand("train-units", "fit the unit codebook");
    add_common(train_units, units_args);

    CommonArgs train_args;
    std::string train_out, train_resume;
    CLI::App* train = app.add_subcommand("train", "train the model");
    add_common(train, train_args);
    add_ablations(train, train_args);
    train->add_option("--out", train_out, "run directory for checkpoints and logs")->required();
    train->add_option("--resume", train_resume, "checkpoint to resume from");

    CommonArgs synth_args;
    std::string synth_ckpt, synth_out, synth_split = "test", synth_prompt;
    CLI::App* synth = app.add_subcommand("synth", "synthesize waveforms from a checkpoint");
    add_common(synth, synth_args);
    add_ablations(synth, synth_args);
    synth->add_option("--checkpoint", synth_ckpt, "trained checkpoint")->required();
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--split", synth_split, "manifest split to synthesize (train|val|test|all)");
    synth->add_option("--prompt-source", synth_prompt,
                      "utterance id supplying the prompt and timbre (default: each utterance)");

    CommonArgs eval_args;
    std::string eval_synth_dir, eval_out, eval_split = "test", eval_metrics;
    CLI::App* eval = app.add_subcommand("eval", "score synthesized audio against references");
    add_common(eval, eval_args);
    eval->add_option("--synth", eval_synth_dir, "directory of synthesized wavs")->required();
    eval->add_option("--out", eval_out, "report directory")->required();
    eval->add_option("--split", eval_split, "manifest split to evaluate");
    eval->add_option("--metrics", eval_metrics, "comma-separated metric subset");

    CLI11_PARSE(app, argc, argv);

    try {
        namespace pl = lipsynth::pipeline;
        if (prepare->parsed()) {
            RunConfig cfg = resolve_config(prep_args);
            return pl::cmd_prepare(prep_args.manifest_path, cfg, prep_args.cache_dir);
        }
        if (train_units->parsed()) {
            RunConfig cfg = resolve_config(units_args);
            return pl::cmd_train_units(units_args.manifest_path, cfg, units_args.cache_dir);
        }
        if (train->parsed()) {
            RunConfig cfg = resolve_config(train_args);
            pl::TrainOptions opts;
            opts.resume = train_resume;
            return pl::cmd_train(train_args.manifest_path, cfg, train_args.cache_dir, train_out, opts);
        }
        if (synth->parsed()) {
            RunConfig cfg = resolve_config(synth_args);
            pl::SynthOptions opts;
            opts.split = synth_split;
            opts.prompt_source = synth_prompt;
            return pl::cmd_synth(synth_ckpt, synth_args.manifest_path, cfg, synth_args.cache_dir,
                                 synth_out, opts);
        }
        if (eval->parsed()) {
            RunConfig cfg = resolve_config(eval_args);
            pl::EvalOptions opts;
            opts.split = eval_split;
            opts.metrics = parse_metric_list(eval_metrics);
            return pl::cmd_eval(eval_args.manifest_path, eval_synth_dir, cfg, eval_out, opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
