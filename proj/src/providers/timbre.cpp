#include "lipsynth/providers/timbre.hpp"

#include "lipsynth/io/array_container.hpp"

#include <random>
#include <stdexcept>

namespace lipsynth::providers {

TimbreEmbedding timbre_stub(const dsp::MelSpectrogram& mel, uint64_t seed, long dim) {
    if (mel.frames.rows() < 1 || mel.frames.cols() < 1)
        throw std::invalid_argument("timbre stub: empty mel");
    if (dim < 1) throw std::invalid_argument("timbre stub: dim must be >= 1");

    const Eigen::RowVectorXd mean = mel.frames.colwise().mean();

    // Projection depends only on (seed, mel band count, dim) so one run maps
    // every utterance through the same matrix.
    Rng rng(seed ^ 0x7e3a9c15b4d2f081ull);
    std::normal_distribution<double> dist(0.0, 1.0);
    const long bands = mel.frames.cols();
    Mat proj(bands, dim);
    for (long i = 0; i < bands; ++i)
        for (long j = 0; j < dim; ++j) proj(i, j) = dist(rng) / std::sqrt(static_cast<double>(bands));

    TimbreEmbedding emb;
    emb.vector = (mean * proj).transpose();
    const double norm = emb.vector.norm();
    if (norm < 1e-12) throw std::runtime_error("timbre stub: degenerate embedding");
    emb.vector /= norm;
    return emb;
}

TimbreEmbedding load_timbre_file(const std::string& path, long expect_dim) {
    const auto arrays = io::read_arrays(path);
    const auto it = arrays.find("timbre");
    if (it == arrays.end()) throw std::runtime_error("timbre: no 'timbre' array in " + path);
    const auto v = io::doubles_from_array(it->second);
    if (static_cast<long>(v.size()) != expect_dim)
        throw std::runtime_error("timbre: dimension mismatch in " + path + ": got " +
                                 std::to_string(v.size()) + ", configured " +
                                 std::to_string(expect_dim));
    TimbreEmbedding emb;
    emb.vector = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
    const double norm = emb.vector.norm();
    if (norm < 1e-12) throw std::runtime_error("timbre: zero vector in " + path);
    emb.vector /= norm;
    return emb;
}

void save_timbre_file(const std::string& path, const TimbreEmbedding& emb) {
    io::ArrayMap arrays;
    arrays["timbre"] = io::array_from_doubles(
        std::vector<double>(emb.vector.data(), emb.vector.data() + emb.vector.size()));
    io::write_arrays(path, arrays);
}

double cosine_similarity(const TimbreEmbedding& a, const TimbreEmbedding& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("timbre cosine: dimension mismatch");
    const double na = a.vector.norm();
    const double nb = b.vector.norm();
    if (na < 1e-12 || nb < 1e-12) throw std::invalid_argument("timbre cosine: zero vector");
    return a.vector.dot(b.vector) / (na * nb);
}

}  // namespace lipsynth::providers
