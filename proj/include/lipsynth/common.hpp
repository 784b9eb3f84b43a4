#pragma once

#include <Eigen/Dense>

#include <random>

namespace lipsynth {

// Row-major (time x feature) double matrix used across the project.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Rng = std::mt19937_64;

}  // namespace lipsynth
