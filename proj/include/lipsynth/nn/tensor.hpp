#pragma once

#include "lipsynth/common.hpp"

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace lipsynth::nn {

// All model math runs in double precision, row-major (time x feature).
using Mat = lipsynth::Mat;

using Rng = std::mt19937_64;

struct Node {
    Mat value;
    Mat grad;  // empty until backward touches this node
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;  // pushes this->grad into parents

    bool has_grad() const { return grad.size() != 0; }
    void ensure_grad() {
        if (!has_grad()) grad = Mat::Zero(value.rows(), value.cols());
    }
};

// Value-semantics handle onto an autodiff graph node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Mat value, bool requires_grad = false);

    static Tensor scalar(double v);

    bool defined() const { return node_ != nullptr; }
    const Mat& value() const { return node_->value; }
    Mat& value() { return node_->value; }
    const Mat& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    long rows() const { return node_->value.rows(); }
    long cols() const { return node_->value.cols(); }
    double item() const;

    void zero_grad() {
        if (node_) node_->grad.resize(0, 0);
    }

    // Reverse-mode sweep from a 1x1 node. Seeds d(this)/d(this) = 1.
    void backward() const;

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
    friend Tensor make_op(Mat value, std::vector<Tensor> parents,
                          std::function<void(Node&)> backward);
};

Tensor make_op(Mat value, std::vector<Tensor> parents,
               std::function<void(Node&)> backward);

// ---- primitive ops -------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, long start, long n);
Tensor slice_rows(const Tensor& a, long start, long n);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);

// `row` is 1 x D, added to every row of `a`.
Tensor add_row_broadcast(const Tensor& a, const Tensor& row);

Tensor softmax_rows(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor swish(const Tensor& a);  // x * sigmoid(x)
Tensor tanh_t(const Tensor& a);
Tensor log1p_t(const Tensor& a);

// Per-row normalization with learnable gain/bias (both 1 x D).
Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       double eps = 1e-5);

// 1D convolution over time with zero same-padding. x: T x Cin,
// w: (k*Cin) x Cout laid out tap-major (tap 0 channels, tap 1 channels, ...).
Tensor conv1d_same(const Tensor& x, const Tensor& w, const Tensor& bias, int kernel);

// Depthwise variant: w is k x C, each channel convolved with its own taps.
Tensor depthwise_conv1d_same(const Tensor& x, const Tensor& w, int kernel);

// Row gather from an embedding table (K x D). Backward scatter-adds.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

// Inverted dropout; identity when `training` is false.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

// Each row repeated `factor` consecutive times.
Tensor repeat_rows(const Tensor& x, int factor);

// Mean over consecutive groups of `group` rows; T must be divisible.
Tensor mean_pool_rows(const Tensor& x, int group);

// Reductions to 1x1 scalars.
Tensor mean_abs_error(const Tensor& pred, const Mat& target);
Tensor label_smoothed_cross_entropy(const Tensor& logits, const std::vector<int>& ids,
                                    double alpha);

// ---- init helpers --------------------------------------------------------

// Scaled uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Mat uniform_fan_in(long rows, long cols, long fan_in, Rng& rng);

}  // namespace lipsynth::nn
