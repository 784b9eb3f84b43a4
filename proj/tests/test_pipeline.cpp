#include "lipsynth/dsp/audio.hpp"
#include "lipsynth/io/array_container.hpp"
#include "lipsynth/io/run_config.hpp"
#include "lipsynth/pipeline/commands.hpp"
#include "lipsynth/toy/toy_corpus.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace lipsynth;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("pipeline: prepare -> units -> train -> synth -> eval on the toy corpus") {
    const std::string dir = temp_dir("lipsynth_pipeline_e2e");
    toy::ToyCorpus corpus = toy::make_toy_corpus(dir + "/corpus");
    io::RunConfig cfg = io::load_run_config(corpus.config_path);
    cfg.train.epochs = 3;  // keep the library test quick; descent is checked elsewhere
    cfg.finalize();
    const std::string cache = dir + "/cache";

    // prepare: everything processed, then everything up-to-date
    pipeline::PrepareStats stats;
    CHECK(pipeline::cmd_prepare(corpus.manifest_path, cfg, cache, &stats) == pipeline::exit_ok);
    CHECK(stats.processed == 2);
    CHECK(stats.skipped == 0);
    CHECK(stats.failed == 0);
    for (const auto& id : corpus.ids) CHECK(fs::exists(cache + "/" + id + ".arr"));

    auto mtime0 = fs::last_write_time(cache + "/" + corpus.ids[0] + ".arr");
    pipeline::PrepareStats stats2;
    CHECK(pipeline::cmd_prepare(corpus.manifest_path, cfg, cache, &stats2) == pipeline::exit_ok);
    CHECK(stats2.processed == 0);
    CHECK(stats2.skipped == 2);
    CHECK(fs::last_write_time(cache + "/" + corpus.ids[0] + ".arr") == mtime0);

    // unit quantizer: codebook on disk, ids in every entry
    CHECK(pipeline::cmd_train_units(corpus.manifest_path, cfg, cache) == pipeline::exit_ok);
    CHECK(fs::exists(cache + "/units.codebook"));
    for (const auto& id : corpus.ids) {
        io::ArrayMap arrays = io::read_arrays(cache + "/" + id + ".arr");
        REQUIRE(arrays.count("units") == 1);
        auto ids = io::ids_from_array(arrays.at("units"));
        CHECK(!ids.empty());
        for (int u : ids) {
            CHECK(u >= 0);
            CHECK(u < cfg.units.clusters);
        }
    }

    // a short training run leaves a checkpoint behind
    const std::string run_dir = dir + "/run";
    CHECK(pipeline::cmd_train(corpus.manifest_path, cfg, cache, run_dir) == pipeline::exit_ok);
    const std::string ckpt = run_dir + "/model.ckpt";
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(run_dir + "/train_log.jsonl"));

    // synthesis is deterministic: two runs give bit-identical audio
    pipeline::SynthOptions sopts;
    sopts.split = "train";
    const std::string synth1 = dir + "/synth1";
    const std::string synth2 = dir + "/synth2";
    CHECK(pipeline::cmd_synth(ckpt, corpus.manifest_path, cfg, cache, synth1, sopts) ==
          pipeline::exit_ok);
    CHECK(pipeline::cmd_synth(ckpt, corpus.manifest_path, cfg, cache, synth2, sopts) ==
          pipeline::exit_ok);
    for (const auto& id : corpus.ids) {
        CHECK(fs::exists(synth1 + "/" + id + ".wav"));
        CHECK(fs::exists(synth1 + "/" + id + ".txt"));
        CHECK(slurp(synth1 + "/" + id + ".wav") == slurp(synth2 + "/" + id + ".wav"));
    }
    CHECK(fs::exists(synth1 + "/rtf.tsv"));
    {
        std::string rtf_text = slurp(synth1 + "/rtf.tsv");
        for (const auto& id : corpus.ids) CHECK(rtf_text.find(id) != std::string::npos);
    }

    // prompting from the other utterance changes the output
    pipeline::SynthOptions cross = sopts;
    cross.prompt_source = corpus.ids[0];
    const std::string synth3 = dir + "/synth3";
    CHECK(pipeline::cmd_synth(ckpt, corpus.manifest_path, cfg, cache, synth3, cross) ==
          pipeline::exit_ok);
    CHECK(slurp(synth3 + "/" + corpus.ids[1] + ".wav") !=
          slurp(synth1 + "/" + corpus.ids[1] + ".wav"));

    // eval on the model output: table + jsonl written, exit 0
    pipeline::EvalOptions eopts;
    eopts.split = "train";
    const std::string eval_dir = dir + "/eval";
    CHECK(pipeline::cmd_eval(corpus.manifest_path, synth1, cfg, eval_dir, eopts) ==
          pipeline::exit_ok);
    CHECK(fs::exists(eval_dir + "/report.txt"));
    CHECK(fs::exists(eval_dir + "/report.jsonl"));
    {
        std::string table = slurp(eval_dir + "/report.txt");
        CHECK(table.find("mean") != std::string::npos);
        CHECK(table.find("estoi") != std::string::npos);
    }

    // identity sanity: evaluating the references against themselves is perfect
    const std::string self_dir = dir + "/self";
    fs::create_directories(self_dir);
    const auto records = io::parse_manifest(corpus.manifest_path);
    for (const auto& rec : records) {
        fs::copy_file(rec.audio_path, self_dir + "/" + rec.id + ".wav");
        std::ofstream txt(self_dir + "/" + rec.id + ".txt");
        txt << rec.transcript << "\n";
    }
    {
        std::ofstream rtf_file(self_dir + "/rtf.tsv");
        rtf_file << "# id\taudio_seconds\twall_seconds\trtf\n";
        for (const auto& rec : records) rtf_file << rec.id << "\t1.0\t0.5\t0.5\n";
    }
    const std::string self_eval = dir + "/self_eval";
    CHECK(pipeline::cmd_eval(corpus.manifest_path, self_dir, cfg, self_eval, eopts) ==
          pipeline::exit_ok);
    {
        std::string jsonl = slurp(self_eval + "/report.jsonl");
        CHECK(jsonl.find("\"estoi\"") != std::string::npos);
        CHECK(jsonl.find("\"wer\":0") != std::string::npos);
    }

    fs::remove_all(dir);
}

TEST_CASE("pipeline: configuration errors speak up early") {
    const std::string dir = temp_dir("lipsynth_pipeline_errs");
    toy::ToyCorpus corpus = toy::make_toy_corpus(dir + "/corpus");
    io::RunConfig cfg = io::load_run_config(corpus.config_path);
    const std::string cache = dir + "/cache";

    SUBCASE("g2p table unset") {
        io::RunConfig bad = cfg;
        bad.providers.g2p_table = "";
        CHECK_THROWS_WITH_AS(pipeline::cmd_prepare(corpus.manifest_path, bad, cache),
                             doctest::Contains("g2p_table"), std::runtime_error);
    }

    SUBCASE("g2p inventory larger than the model embedding table") {
        io::RunConfig bad = cfg;
        bad.model.phoneme_inventory = 8;  // toy table holds sil + 14 phones
        CHECK_THROWS_WITH_AS(pipeline::cmd_prepare(corpus.manifest_path, bad, cache),
                             doctest::Contains("inventory"), std::runtime_error);
    }

    SUBCASE("unknown vocoder") {
        io::RunConfig bad = cfg;
        bad.vocoder.kind = "wavenet";
        CHECK_THROWS_WITH_AS(
            pipeline::cmd_synth(dir + "/none.ckpt", corpus.manifest_path, bad, cache, dir + "/s"),
            doctest::Contains("unknown vocoder"), std::runtime_error);
    }

    SUBCASE("synth without prepare") {
        // train a checkpoint is overkill here; a fabricated cache-less synth run
        // must fail before it needs one, so point at a missing checkpoint first
        CHECK_THROWS(pipeline::cmd_synth(dir + "/none.ckpt", corpus.manifest_path, cfg, cache,
                                         dir + "/s"));
    }

    SUBCASE("empty split") {
        pipeline::PrepareStats stats;
        pipeline::cmd_prepare(corpus.manifest_path, cfg, cache, &stats);
        pipeline::cmd_train_units(corpus.manifest_path, cfg, cache);
        io::RunConfig quick = cfg;
        quick.train.epochs = 1;
        quick.finalize();
        const std::string run_dir = dir + "/run";
        pipeline::cmd_train(corpus.manifest_path, quick, cache, run_dir);
        pipeline::SynthOptions sopts;  // default split "test"; toy corpus is all train
        CHECK_THROWS_WITH_AS(pipeline::cmd_synth(run_dir + "/model.ckpt", corpus.manifest_path,
                                                 quick, cache, dir + "/s", sopts),
                             doctest::Contains("split"), std::runtime_error);
    }

    fs::remove_all(dir);
}
