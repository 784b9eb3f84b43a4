#include "lipsynth/train/loss.hpp"

#include <stdexcept>

namespace lipsynth::train {

using nn::Tensor;

void LossWeights::validate() const {
    if (lambda_m < 0 || lambda_p < 0 || lambda_e < 0 || lambda_u < 0)
        throw std::invalid_argument("loss weights must be >= 0");
    if (label_smoothing < 0 || label_smoothing >= 1)
        throw std::invalid_argument("label_smoothing must be in [0, 1)");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
    if (lr <= 0) throw std::invalid_argument("train config: lr must be positive");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (warmup_steps < 0) throw std::invalid_argument("train config: warmup_steps must be >= 0");
    if (grad_clip <= 0) throw std::invalid_argument("train config: grad_clip must be positive");
    if (lr_decay_epochs < 1)
        throw std::invalid_argument("train config: lr_decay_epochs must be >= 1");
    if (lr_decay_factor <= 0 || lr_decay_factor > 1)
        throw std::invalid_argument("train config: lr_decay_factor must be in (0, 1]");
}

LossBreakdown weighted_total(double l_m, double l_p, double l_e, double l_u,
                             const LossWeights& w) {
    LossBreakdown b;
    b.l_m = l_m;
    b.l_p = l_p;
    b.l_e = l_e;
    b.l_u = l_u;
    b.l_total = w.lambda_m * l_m + w.lambda_p * l_p + w.lambda_e * l_e + w.lambda_u * l_u;
    return b;
}

LossResult compute_loss(const model::DecoderOutput& out, const Targets& targets,
                        const LossWeights& weights, const model::AblationFlags& flags) {
    weights.validate();
    if (!out.mel_coarse.defined() || !out.mel_fine.defined() || !out.unit_logits.defined())
        throw std::invalid_argument("compute_loss: decoder output incomplete");
    if (out.mel_fine.rows() != targets.mel.rows() || out.mel_fine.cols() != targets.mel.cols())
        throw std::invalid_argument("compute_loss: mel target shape mismatch: output " +
                                    std::to_string(out.mel_fine.rows()) + "x" +
                                    std::to_string(out.mel_fine.cols()) + ", target " +
                                    std::to_string(targets.mel.rows()) + "x" +
                                    std::to_string(targets.mel.cols()));
    if (static_cast<long>(targets.units.size()) != out.unit_logits.rows())
        throw std::invalid_argument("compute_loss: unit target length mismatch: logits " +
                                    std::to_string(out.unit_logits.rows()) + ", target " +
                                    std::to_string(targets.units.size()));

    // Mel term supervises both the coarse fusion and the refined output.
    const Tensor l_m = nn::scale(nn::add(nn::mean_abs_error(out.mel_coarse, targets.mel),
                                         nn::mean_abs_error(out.mel_fine, targets.mel)),
                                 0.5);

    Tensor l_p = Tensor::scalar(0.0);
    if (!flags.no_acoustic_branch) {
        if (!out.pitch_pred.defined())
            throw std::invalid_argument("compute_loss: pitch prediction missing");
        if (out.pitch_pred.rows() != targets.f0.size())
            throw std::invalid_argument("compute_loss: f0 target length mismatch");
        Mat f0(targets.f0.size(), 1);
        f0.col(0) = targets.f0;
        l_p = nn::mean_abs_error(out.pitch_pred, f0);
    }

    Tensor l_e = Tensor::scalar(0.0);
    if (!flags.no_acoustic_branch && !flags.no_energy_predictor) {
        if (!out.energy_pred.defined())
            throw std::invalid_argument("compute_loss: energy prediction missing");
        if (out.energy_pred.rows() != targets.energy.size())
            throw std::invalid_argument("compute_loss: energy target length mismatch");
        Mat en(targets.energy.size(), 1);
        en.col(0) = targets.energy;
        l_e = nn::mean_abs_error(out.energy_pred, en);
    }

    const Tensor l_u =
        nn::label_smoothed_cross_entropy(out.unit_logits, targets.units, weights.label_smoothing);

    Tensor total = nn::scale(l_m, weights.lambda_m);
    total = nn::add(total, nn::scale(l_p, weights.lambda_p));
    total = nn::add(total, nn::scale(l_e, weights.lambda_e));
    total = nn::add(total, nn::scale(l_u, weights.lambda_u));

    LossResult res;
    res.total = total;
    res.breakdown = weighted_total(l_m.item(), l_p.item(), l_e.item(), l_u.item(), weights);
    return res;
}

}  // namespace lipsynth::train
