#include "lipsynth/providers/visual.hpp"

#include "lipsynth/io/array_container.hpp"

#include <random>
#include <stdexcept>

namespace lipsynth::providers {

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

VisualFeatures load_visual_file(const std::string& path, long expect_dim) {
    const auto arrays = io::read_arrays(path);
    const auto it = arrays.find("visual");
    if (it == arrays.end())
        throw std::runtime_error("visual provider: no 'visual' array in " + path);
    VisualFeatures vis;
    vis.matrix = io::mat_from_array(it->second);
    if (vis.matrix.rows() < 1)
        throw std::runtime_error("visual provider: empty feature matrix in " + path);
    if (vis.matrix.cols() != expect_dim)
        throw std::runtime_error("visual provider: dimension mismatch in " + path + ": got " +
                                 std::to_string(vis.matrix.cols()) + ", configured " +
                                 std::to_string(expect_dim));
    return vis;
}

void save_visual_file(const std::string& path, const VisualFeatures& vis) {
    io::ArrayMap arrays;
    arrays["visual"] = io::array_from_mat(vis.matrix);
    io::write_arrays(path, arrays);
}

VisualFeatures synthetic_visual(const std::string& utterance_id, uint64_t seed, long t_v, long d_v) {
    if (t_v < 1 || d_v < 1)
        throw std::invalid_argument("visual provider: t_v and d_v must be >= 1");
    Rng rng(seed ^ fnv1a(utterance_id));
    std::normal_distribution<double> dist(0.0, 1.0);
    VisualFeatures vis;
    vis.matrix = Mat(t_v, d_v);
    for (long t = 0; t < t_v; ++t)
        for (long d = 0; d < d_v; ++d) vis.matrix(t, d) = dist(rng);
    return vis;
}

}  // namespace lipsynth::providers
