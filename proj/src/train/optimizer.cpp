#include "lipsynth/train/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace lipsynth::train {

Adam::Adam(nn::ParamSet params, double base_lr, long warmup_steps, double grad_clip, double beta1,
           double beta2, double eps)
    : params_(std::move(params)),
      base_lr_(base_lr),
      warmup_steps_(warmup_steps),
      grad_clip_(grad_clip),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    if (base_lr <= 0) throw std::invalid_argument("adam: lr must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& [name, p] : params_) {
        m_.push_back(Mat::Zero(p.value().rows(), p.value().cols()));
        v_.push_back(Mat::Zero(p.value().rows(), p.value().cols()));
    }
}

double Adam::lr_at(uint64_t t) const {
    if (warmup_steps_ <= 0) return base_lr_;
    const double warm = std::min(1.0, static_cast<double>(t) / static_cast<double>(warmup_steps_));
    return base_lr_ * warm;
}

void Adam::zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
}

double Adam::step() {
    // Global norm over every parameter gradient (missing = zero).
    double sq = 0.0;
    for (auto& [name, p] : params_) {
        if (p.node() && p.node()->has_grad()) sq += p.node()->grad.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    const double clip_scale = (grad_clip_ > 0 && norm > grad_clip_) ? grad_clip_ / norm : 1.0;

    ++t_;
    const double lr = lr_at(t_);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i].second;
        Mat g = (p.node() && p.node()->has_grad()) ? Mat(p.node()->grad * clip_scale)
                                                   : Mat(Mat::Zero(p.rows(), p.cols()));
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        const Mat m_hat = m_[i] / bc1;
        const Mat v_hat = v_[i] / bc2;
        p.value() -= lr * (m_hat.array() / (v_hat.array().sqrt() + eps_)).matrix();
    }
    return norm;
}

}  // namespace lipsynth::train
