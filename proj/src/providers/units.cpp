#include "lipsynth/providers/units.hpp"

#include "lipsynth/io/array_container.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace lipsynth::providers {

namespace {

Mat pool_frames(const std::vector<Mat>& features) {
    long total = 0;
    long dim = -1;
    for (const Mat& m : features) {
        if (m.rows() == 0) continue;
        if (dim < 0) dim = m.cols();
        else if (m.cols() != dim)
            throw std::invalid_argument("unit quantizer: inconsistent feature dims");
        total += m.rows();
    }
    if (dim < 0) throw std::invalid_argument("unit quantizer: no frames");
    Mat pooled(total, dim);
    long row = 0;
    for (const Mat& m : features) {
        if (m.rows() == 0) continue;
        pooled.middleRows(row, m.rows()) = m;
        row += m.rows();
    }
    return pooled;
}

long nearest_centroid(const Mat& centroids, const Eigen::RowVectorXd& frame) {
    long best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (long c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - frame).squaredNorm();
        if (d < best_d) {  // strict: ties keep the lowest index
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

UnitCodebook train_unit_quantizer(const std::vector<Mat>& features, long k, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("unit quantizer: k must be >= 1");
    const Mat frames = pool_frames(features);
    const long n = frames.rows();
    if (n < k)
        throw std::invalid_argument("unit quantizer: " + std::to_string(n) + " frames < k = " +
                                    std::to_string(k));

    Rng rng(seed);

    // k-means++ seeding.
    Mat centroids(k, frames.cols());
    std::vector<double> d2(static_cast<size_t>(n), 0.0);
    {
        std::uniform_int_distribution<long> first(0, n - 1);
        centroids.row(0) = frames.row(first(rng));
        for (long c = 1; c < k; ++c) {
            double sum = 0.0;
            for (long i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (long j = 0; j < c; ++j)
                    best = std::min(best, (frames.row(i) - centroids.row(j)).squaredNorm());
                d2[static_cast<size_t>(i)] = best;
                sum += best;
            }
            long pick = 0;
            if (sum > 0.0) {
                std::uniform_real_distribution<double> u(0.0, sum);
                double r = u(rng);
                for (long i = 0; i < n; ++i) {
                    r -= d2[static_cast<size_t>(i)];
                    if (r <= 0.0) { pick = i; break; }
                    pick = i;
                }
            } else {
                std::uniform_int_distribution<long> any(0, n - 1);
                pick = any(rng);
            }
            centroids.row(c) = frames.row(pick);
        }
    }

    std::vector<long> assign(static_cast<size_t>(n), 0);
    for (int iter = 0; iter < 100; ++iter) {
        for (long i = 0; i < n; ++i)
            assign[static_cast<size_t>(i)] = nearest_centroid(centroids, frames.row(i));

        Mat next = Mat::Zero(k, frames.cols());
        std::vector<long> count(static_cast<size_t>(k), 0);
        for (long i = 0; i < n; ++i) {
            next.row(assign[static_cast<size_t>(i)]) += frames.row(i);
            ++count[static_cast<size_t>(assign[static_cast<size_t>(i)])];
        }
        for (long c = 0; c < k; ++c) {
            if (count[static_cast<size_t>(c)] > 0) {
                next.row(c) /= static_cast<double>(count[static_cast<size_t>(c)]);
            } else {
                // Re-seed an empty cluster with the frame farthest from its
                // assigned centroid (deterministic scan).
                long far = 0;
                double far_d = -1.0;
                for (long i = 0; i < n; ++i) {
                    const double d =
                        (frames.row(i) - centroids.row(assign[static_cast<size_t>(i)])).squaredNorm();
                    if (d > far_d) { far_d = d; far = i; }
                }
                next.row(c) = frames.row(far);
            }
        }
        const double shift = (next - centroids).rowwise().norm().maxCoeff();
        centroids = next;
        if (shift < 1e-6) break;
    }
    return UnitCodebook{centroids};
}

SpeechUnits quantize_units(const Mat& features, const UnitCodebook& codebook) {
    if (features.cols() != codebook.feature_dim())
        throw std::invalid_argument("quantize_units: feature dim " + std::to_string(features.cols()) +
                                    " != codebook dim " + std::to_string(codebook.feature_dim()));
    SpeechUnits units;
    units.ids.reserve(static_cast<size_t>(features.rows()));
    for (long t = 0; t < features.rows(); ++t)
        units.ids.push_back(static_cast<int>(nearest_centroid(codebook.centroids, features.row(t))));
    return units;
}

double quantization_distortion(const Mat& features, const UnitCodebook& codebook) {
    if (features.rows() == 0) return 0.0;
    double sum = 0.0;
    for (long t = 0; t < features.rows(); ++t) {
        const long c = nearest_centroid(codebook.centroids, features.row(t));
        sum += (features.row(t) - codebook.centroids.row(c)).squaredNorm();
    }
    return sum / static_cast<double>(features.rows());
}

void save_codebook(const std::string& path, const UnitCodebook& codebook) {
    io::ArrayMap arrays;
    arrays["centroids"] = io::array_from_mat(codebook.centroids);
    io::write_arrays(path, arrays);
}

UnitCodebook load_codebook(const std::string& path) {
    const auto arrays = io::read_arrays(path);
    const auto it = arrays.find("centroids");
    if (it == arrays.end())
        throw std::runtime_error("unit codebook: no 'centroids' array in " + path);
    return UnitCodebook{io::mat_from_array(it->second)};
}

}  // namespace lipsynth::providers
