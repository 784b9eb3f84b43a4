#pragma once

#include "lipsynth/nn/layers.hpp"

#include <cstdint>

namespace lipsynth::train {

// Adaptive-moment gradient descent with linear LR warmup and global
// gradient-norm clipping.
class Adam {
public:
    Adam() = default;
    Adam(nn::ParamSet params, double base_lr, long warmup_steps = 1000, double grad_clip = 1.0,
         double beta1 = 0.9, double beta2 = 0.98, double eps = 1e-9);

    // Applies one update from the gradients currently on the parameters.
    // Returns the pre-clip global gradient norm.
    double step();
    void zero_grad();

    uint64_t step_count() const { return t_; }
    void set_step_count(uint64_t t) { t_ = t; }
    void set_base_lr(double lr) { base_lr_ = lr; }
    double base_lr() const { return base_lr_; }
    double lr_at(uint64_t t) const;

    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }
    std::vector<Mat>& moment1() { return m_; }
    std::vector<Mat>& moment2() { return v_; }
    const std::vector<Mat>& moment1() const { return m_; }
    const std::vector<Mat>& moment2() const { return v_; }

private:
    nn::ParamSet params_;
    std::vector<Mat> m_, v_;
    double base_lr_ = 1e-3;
    long warmup_steps_ = 1000;
    double grad_clip_ = 1.0;
    double beta1_ = 0.9, beta2_ = 0.98, eps_ = 1e-9;
    uint64_t t_ = 0;
};

}  // namespace lipsynth::train
