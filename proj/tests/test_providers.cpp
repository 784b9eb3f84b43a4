#include "lipsynth/providers/g2p.hpp"
#include "lipsynth/providers/timbre.hpp"
#include "lipsynth/providers/units.hpp"
#include "lipsynth/providers/visual.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace lipsynth;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Mat randn(long r, long c, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Mat m(r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

// brute-force nearest centroid, lowest index on ties
int nearest_brute(const Mat& centroids, const Eigen::RowVectorXd& frame) {
    int best = 0;
    double best_d = (centroids.row(0) - frame).squaredNorm();
    for (long k = 1; k < centroids.rows(); ++k) {
        double d = (centroids.row(k) - frame).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("g2p: words map through the table with separators") {
    // toy table {"ba": [3, 11]} -> "ba ba" = [3, 11, 0, 3, 11]
    std::vector<std::string> inventory(12);
    inventory[0] = "sil";
    for (int i = 1; i < 12; ++i) inventory[i] = "p" + std::to_string(i);
    providers::G2p g2p(inventory, {{"ba", {3, 11}}});
    auto seq = g2p.to_phonemes("ba ba");
    CHECK(seq.ids == std::vector<int>{3, 11, 0, 3, 11});
}

TEST_CASE("g2p: empty transcript yields the silence token") {
    providers::G2p g2p({"sil", "a"}, {{"x", {1}}});
    CHECK(g2p.to_phonemes("").ids == std::vector<int>{0});
    CHECK(g2p.to_phonemes("   ").ids == std::vector<int>{0});
}

TEST_CASE("g2p: unknown words raise OOV") {
    providers::G2p g2p({"sil", "a"}, {{"x", {1}}});
    CHECK_THROWS_WITH_AS(g2p.to_phonemes("x zzz"), doctest::Contains("OOV: zzz"),
                         std::runtime_error);
}

TEST_CASE("g2p: table files parse into a sorted inventory") {
    const std::string path = temp_path("lipsynth_g2p.tsv");
    {
        std::ofstream out(path, std::ios::trunc);
        out << "# comment line\n";
        out << "ba\tb a\n";
        out << "do\td o\n";
        out << "ad\ta d\n";
    }
    providers::G2p g2p = providers::G2p::from_file(path);
    // inventory: sil + sorted {a, b, d, o}
    REQUIRE(g2p.inventory_size() == 5);
    CHECK(g2p.inventory()[0] == "sil");
    CHECK(g2p.inventory()[1] == "a");
    CHECK(g2p.inventory()[2] == "b");
    CHECK(g2p.inventory()[3] == "d");
    CHECK(g2p.inventory()[4] == "o");
    CHECK(g2p.knows("ba"));
    CHECK(g2p.knows("BA"));  // case-folded
    auto ids = g2p.to_phonemes("ba do").ids;
    CHECK(ids == std::vector<int>{2, 1, 0, 3, 4});
    CHECK(g2p.decode(ids) == std::vector<std::string>{"b", "a", "sil", "d", "o"});

    {
        std::ofstream out(path, std::ios::trunc);
        out << "ba\tb a\nba\tb a\n";
    }
    CHECK_THROWS_WITH_AS(providers::G2p::from_file(path), doctest::Contains("duplicate"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("visual: synthetic features are deterministic per (seed, id)") {
    auto a1 = providers::synthetic_visual("utt1", 9, 30, 16);
    auto a2 = providers::synthetic_visual("utt1", 9, 30, 16);
    auto b = providers::synthetic_visual("utt2", 9, 30, 16);
    auto c = providers::synthetic_visual("utt1", 10, 30, 16);
    CHECK(a1.matrix == a2.matrix);
    CHECK((a1.matrix - b.matrix).cwiseAbs().maxCoeff() > 0.0);
    CHECK((a1.matrix - c.matrix).cwiseAbs().maxCoeff() > 0.0);
    CHECK(a1.matrix.rows() == 30);
    CHECK(a1.matrix.cols() == 16);
    CHECK(a1.fps == 25.0);
}

TEST_CASE("visual: file round trip enforces the configured width") {
    const std::string path = temp_path("lipsynth_visual.arr");
    providers::VisualFeatures vis;
    vis.matrix = randn(7, 16, 77);
    providers::save_visual_file(path, vis);
    auto back = providers::load_visual_file(path, 16);
    CHECK(back.matrix == vis.matrix);
    CHECK_THROWS_WITH_AS(providers::load_visual_file(path, 32), doctest::Contains("16"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("units: k-means recovers separated blobs") {
    // two tight blobs far apart; k=2 must place one centroid per blob
    Mat frames(8, 2);
    frames << 0.0, 0.1, 0.1, 0.0, -0.1, 0.0, 0.0, -0.1,
              10.0, 10.1, 10.1, 10.0, 9.9, 10.0, 10.0, 9.9;
    auto codebook = providers::train_unit_quantizer({frames}, 2, 5);
    REQUIRE(codebook.clusters() == 2);
    Eigen::RowVector2d lo = frames.topRows(4).colwise().mean();
    Eigen::RowVector2d hi = frames.bottomRows(4).colwise().mean();
    double d00 = (codebook.centroids.row(0) - lo).norm() + (codebook.centroids.row(1) - hi).norm();
    double d01 = (codebook.centroids.row(0) - hi).norm() + (codebook.centroids.row(1) - lo).norm();
    CHECK(std::min(d00, d01) < 1e-9);

    auto units = providers::quantize_units(frames, codebook);
    REQUIRE(units.ids.size() == 8);
    CHECK(units.ids[0] == units.ids[1]);
    CHECK(units.ids[4] == units.ids[5]);
    CHECK(units.ids[0] != units.ids[4]);
    CHECK(units.rate == 50.0);
}

TEST_CASE("units: assignment matches the brute-force oracle") {
    Mat frames = randn(40, 5, 81);
    auto codebook = providers::train_unit_quantizer({frames}, 6, 82);
    auto units = providers::quantize_units(frames, codebook);
    for (long t = 0; t < frames.rows(); ++t)
        CHECK(units.ids[t] == nearest_brute(codebook.centroids, frames.row(t)));
}

TEST_CASE("units: equidistant frames pick the lowest centroid index") {
    providers::UnitCodebook cb;
    cb.centroids = Mat(2, 1);
    cb.centroids << -1.0, 1.0;
    Mat frame(1, 1);
    frame << 0.0;  // exactly between
    auto units = providers::quantize_units(frame, cb);
    CHECK(units.ids[0] == 0);
}

TEST_CASE("units: determinism and distortion sanity") {
    Mat frames = randn(60, 4, 91);
    auto cb1 = providers::train_unit_quantizer({frames}, 8, 92);
    auto cb2 = providers::train_unit_quantizer({frames}, 8, 92);
    CHECK(cb1.centroids == cb2.centroids);

    double trained = providers::quantization_distortion(frames, cb1);
    providers::UnitCodebook random_cb;
    random_cb.centroids = randn(8, 4, 93);
    CHECK(trained < providers::quantization_distortion(frames, random_cb));
}

TEST_CASE("units: too few frames for k errors") {
    Mat frames = randn(3, 4, 95);
    CHECK_THROWS_WITH_AS(providers::train_unit_quantizer({frames}, 5, 1),
                         doctest::Contains("3 frames < k = 5"), std::invalid_argument);
}

TEST_CASE("units: codebook round trip and dim check") {
    const std::string path = temp_path("lipsynth_codebook.arr");
    providers::UnitCodebook cb;
    cb.centroids = randn(4, 3, 97);
    providers::save_codebook(path, cb);
    auto back = providers::load_codebook(path);
    CHECK(back.centroids == cb.centroids);

    Mat wrong = randn(5, 7, 98);
    CHECK_THROWS(providers::quantize_units(wrong, cb));
    std::filesystem::remove(path);
}

TEST_CASE("timbre: stub embeddings are unit-norm and deterministic") {
    dsp::MelSpectrogram mel;
    mel.frames = randn(20, 80, 101);
    auto e1 = providers::timbre_stub(mel, 5, 32);
    auto e2 = providers::timbre_stub(mel, 5, 32);
    CHECK(e1.vector == e2.vector);
    CHECK(e1.dim() == 32);
    CHECK(e1.vector.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(providers::cosine_similarity(e1, e2) == doctest::Approx(1.0));

    auto e3 = providers::timbre_stub(mel, 6, 32);
    CHECK(providers::cosine_similarity(e1, e3) < 0.999);
}

TEST_CASE("timbre: file round trip enforces dimension") {
    const std::string path = temp_path("lipsynth_timbre.arr");
    dsp::MelSpectrogram mel;
    mel.frames = randn(10, 80, 103);
    auto emb = providers::timbre_stub(mel, 1, 16);
    providers::save_timbre_file(path, emb);
    auto back = providers::load_timbre_file(path, 16);
    CHECK(back.vector == emb.vector);
    CHECK_THROWS(providers::load_timbre_file(path, 8));
    std::filesystem::remove(path);
}

TEST_CASE("timbre: empty mel is rejected") {
    dsp::MelSpectrogram mel;
    CHECK_THROWS(providers::timbre_stub(mel, 1, 8));
}
