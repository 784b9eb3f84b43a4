#include "lipsynth/io/array_container.hpp"
#include "lipsynth/io/manifest.hpp"
#include "lipsynth/io/run_config.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace lipsynth;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("arrays: all dtypes round-trip bit-exactly") {
    io::ArrayMap arrays;
    {
        io::Array a;
        a.dtype = io::Dtype::f64;
        a.shape = {2, 3};
        a.f64 = {1.0, -2.5, 3.25, 1e-300, -0.0, 7.0};
        arrays["mat"] = a;
    }
    {
        io::Array a;
        a.dtype = io::Dtype::f32;
        a.shape = {4};
        a.f32 = {0.5f, -1.25f, 3e-30f, 9.0f};
        arrays["floats"] = a;
    }
    {
        io::Array a;
        a.dtype = io::Dtype::i32;
        a.shape = {3};
        a.i32 = {-7, 0, 2147483647};
        arrays["ids"] = a;
    }
    const std::string path = temp_path("lipsynth_arrays.arr");
    io::write_arrays(path, arrays);
    io::ArrayMap back = io::read_arrays(path);
    REQUIRE(back.size() == 3);
    CHECK(back["mat"].f64 == arrays["mat"].f64);
    CHECK(back["mat"].shape == arrays["mat"].shape);
    CHECK(back["floats"].f32 == arrays["floats"].f32);
    CHECK(back["ids"].i32 == arrays["ids"].i32);
    std::filesystem::remove(path);
}

TEST_CASE("arrays: converters round-trip") {
    Mat m(2, 2);
    m << 1.5, -2.0, 0.25, 9.0;
    CHECK(io::mat_from_array(io::array_from_mat(m)) == m);

    std::vector<double> v{0.1, 0.2, -3.0};
    CHECK(io::doubles_from_array(io::array_from_doubles(v)) == v);

    std::vector<int> ids{5, 0, 199};
    CHECK(io::ids_from_array(io::array_from_ids(ids)) == ids);
}

TEST_CASE("arrays: corrupt files are rejected") {
    const std::string path = temp_path("lipsynth_bad.arr");

    write_text(path, "NOTMAGIC");
    CHECK_THROWS_WITH_AS(io::read_arrays(path), doctest::Contains("magic"), std::runtime_error);

    // valid header then truncation mid-payload
    io::ArrayMap arrays;
    io::Array a;
    a.dtype = io::Dtype::f64;
    a.shape = {128};
    a.f64.assign(128, 1.0);
    arrays["x"] = a;
    io::write_arrays(path, arrays);
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 64);
    CHECK_THROWS(io::read_arrays(path));

    CHECK_THROWS(io::read_arrays("/nonexistent/file.arr"));
    std::filesystem::remove(path);
}

TEST_CASE("arrays: shape/payload mismatch is rejected on write") {
    io::Array a;
    a.dtype = io::Dtype::f64;
    a.shape = {4};
    a.f64 = {1.0, 2.0};  // too short
    io::ArrayMap arrays{{"x", a}};
    CHECK_THROWS(io::write_arrays(temp_path("lipsynth_mismatch.arr"), arrays));
}

TEST_CASE("manifest: parses records and optional fields") {
    const std::string path = temp_path("lipsynth_manifest.tsv");
    write_text(path,
               "utt1\t/a/utt1.wav\t-\ttrain\thello world\n"
               "\n"
               "utt2\t/a/utt2.wav\t/v/utt2.arr\tval\n"
               "utt3\t/a/utt3.wav\t-\ttest\tmulti\tword\ttail\n");
    auto records = io::parse_manifest(path);
    REQUIRE(records.size() == 3);
    CHECK(records[0].id == "utt1");
    CHECK(records[0].visual_feature_path.empty());
    CHECK(records[0].split == "train");
    CHECK(records[0].transcript == "hello world");
    CHECK(records[1].visual_feature_path == "/v/utt2.arr");
    CHECK(records[1].transcript.empty());
    CHECK(records[2].transcript == "multi word tail");
    std::filesystem::remove(path);
}

TEST_CASE("manifest: malformed lines cite their line number") {
    const std::string path = temp_path("lipsynth_manifest_bad.tsv");
    write_text(path, "utt1\t/a.wav\t-\ttrain\n" "utt2\tonly_two\n");
    CHECK_THROWS_WITH_AS(io::parse_manifest(path), doctest::Contains("line 2"), std::runtime_error);

    write_text(path, "utt1\t/a.wav\t-\tnotasplit\n");
    CHECK_THROWS(io::parse_manifest(path));

    write_text(path, "utt1\t/a.wav\t-\ttrain\nutt1\t/b.wav\t-\ttest\n");
    CHECK_THROWS_WITH_AS(io::parse_manifest(path), doctest::Contains("duplicate"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("manifest: write/parse round trip") {
    const std::string path = temp_path("lipsynth_manifest_rt.tsv");
    std::vector<io::UtteranceRecord> records{
        {"a", "/x/a.wav", "", "train", "one two"},
        {"b", "/x/b.wav", "/v/b.arr", "test", ""},
    };
    io::write_manifest(path, records);
    auto back = io::parse_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == records[0]);
    CHECK(back[1] == records[1]);
    std::filesystem::remove(path);
}

TEST_CASE("run config: defaults carry the paper architecture") {
    io::RunConfig cfg;
    cfg.finalize();
    CHECK(cfg.spectrogram.sample_rate == 16000);
    CHECK(cfg.spectrogram.hop == 160);
    CHECK(cfg.spectrogram.n_mels == 80);
    CHECK(cfg.model.block.hidden_dim == 512);
    CHECK(cfg.model.block.heads == 8);
    CHECK(cfg.model.block.fft_blocks_per_generator == 3);
    CHECK(cfg.model.block.conformer_layers == 8);
    CHECK(cfg.model.unit_clusters == 200);
    CHECK(cfg.model.length_factor == 4);
    CHECK(cfg.loss.lambda_m == 100.0);
    CHECK(cfg.loss.lambda_p == 0.1);
    CHECK(cfg.loss.lambda_e == 0.1);
    CHECK(cfg.loss.lambda_u == 0.01);
    CHECK(cfg.loss.label_smoothing == 0.1);
    CHECK(cfg.train.warmup_steps == 1000);
    CHECK(cfg.units.clusters == 200);
}

TEST_CASE("run config: serialize/parse round trip") {
    io::RunConfig cfg;
    cfg.seed = 99;
    cfg.spectrogram.n_mels = 64;
    cfg.model.block.hidden_dim = 128;
    cfg.loss.lambda_m = 12.5;
    cfg.train.epochs = 3;
    cfg.providers.g2p_table = "/tmp/table.tsv";
    cfg.prompt_seconds = 0.25;
    cfg.finalize();

    std::string text = serialize_run_config(cfg);
    io::RunConfig back = io::parse_run_config_text(text);
    CHECK(io::config_key_values(back) == io::config_key_values(cfg));
    CHECK(back.model.n_mels == 64);  // finalize re-derives coupled fields
    CHECK(back.prompt_seconds == 0.25);
}

TEST_CASE("run config: errors cite line and key") {
    CHECK_THROWS_WITH_AS(io::parse_run_config_text("bogus.key = 1\n"),
                         doctest::Contains("unknown key"), std::runtime_error);
    CHECK_THROWS_WITH_AS(io::parse_run_config_text("seed = 1\nseed = 2\n"),
                         doctest::Contains("duplicate"), std::runtime_error);
    CHECK_THROWS_WITH_AS(io::parse_run_config_text("train.epochs = banana\n"),
                         doctest::Contains("line 1"), std::runtime_error);
    CHECK_THROWS(io::parse_run_config_text("model.hidden_dim = 15\n"));  // not divisible by heads
    CHECK_THROWS(io::parse_run_config_text("synth.prompt_seconds = 0\n"));
    // comments and blanks are fine
    io::RunConfig ok = io::parse_run_config_text("# comment\n\nseed = 5\n");
    CHECK(ok.seed == 5);
}

TEST_CASE("run config: overrides apply on a base") {
    io::RunConfig base;
    base.train.epochs = 77;
    base.finalize();
    io::RunConfig merged = io::parse_run_config_text("train.lr = 0.5\n", base);
    CHECK(merged.train.epochs == 77);
    CHECK(merged.train.lr == 0.5);
}

TEST_CASE("run config: doubles survive the shortest-representation writer") {
    io::RunConfig cfg;
    cfg.train.lr = 1.0 / 3.0;
    cfg.loss.lambda_u = 1e-5;
    cfg.finalize();
    io::RunConfig back = io::parse_run_config_text(io::serialize_run_config(cfg));
    CHECK(back.train.lr == cfg.train.lr);
    CHECK(back.loss.lambda_u == cfg.loss.lambda_u);
}

TEST_CASE("run config: finalize derives coupled knobs") {
    io::RunConfig cfg = io::parse_run_config_text(
        "spectrogram.n_mels = 40\n"
        "units.clusters = 17\n"
        "model.conformer_layers = 3\n"
        "seed = 4242\n");
    CHECK(cfg.model.n_mels == 40);
    CHECK(cfg.model.unit_clusters == 17);
    CHECK(cfg.model.sra.conformer_layers == 3);
    CHECK(cfg.pitch.hop_seconds == doctest::Approx(0.010));
    CHECK(cfg.train.seed == 4242);
}
