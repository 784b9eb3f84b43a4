#include "lipsynth/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lipsynth::train {

namespace {

struct BatchLoss {
    nn::Tensor total;
    LossBreakdown mean;
};

BatchLoss batch_loss(const model::Model& m, nn::Ctx& ctx, const std::vector<Example>& batch,
                     const io::RunConfig& cfg, Rng* prompt_rng) {
    if (batch.empty()) throw std::invalid_argument("train: empty batch");
    nn::Tensor total;
    LossBreakdown mean;
    for (const auto& ex : batch) {
        const auto inputs = make_inputs(ex, cfg, prompt_rng);
        const auto teacher = pool_prosody(ex, cfg.model.length_factor);
        const auto targets = make_targets(ex, cfg.model.length_factor);
        const auto out = m.forward(ctx, inputs, cfg.train.flags, &teacher);
        auto res = compute_loss(out, targets, cfg.loss, cfg.train.flags);
        total = total.defined() ? nn::add(total, res.total) : res.total;
        mean.l_m += res.breakdown.l_m;
        mean.l_p += res.breakdown.l_p;
        mean.l_e += res.breakdown.l_e;
        mean.l_u += res.breakdown.l_u;
        mean.l_total += res.breakdown.l_total;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    BatchLoss bl;
    bl.total = nn::scale(total, inv);
    bl.mean.l_m = mean.l_m * inv;
    bl.mean.l_p = mean.l_p * inv;
    bl.mean.l_e = mean.l_e * inv;
    bl.mean.l_u = mean.l_u * inv;
    bl.mean.l_total = mean.l_total * inv;
    return bl;
}

void check_finite(const LossBreakdown& b) {
    if (std::isfinite(b.l_total)) return;
    std::ostringstream msg;
    msg << "training aborted: non-finite loss (l_m=" << b.l_m << " l_p=" << b.l_p
        << " l_e=" << b.l_e << " l_u=" << b.l_u << ")";
    throw std::runtime_error(msg.str());
}

void log_record(std::ofstream& log, uint64_t step, const LossBreakdown& b, const char* split,
                long epoch) {
    log << "{\"step\":" << step << ",\"l_m\":" << b.l_m << ",\"l_p\":" << b.l_p
        << ",\"l_e\":" << b.l_e << ",\"l_u\":" << b.l_u << ",\"l_total\":" << b.l_total;
    if (split) log << ",\"split\":\"" << split << "\",\"epoch\":" << epoch;
    log << "}\n";
    log.flush();
}

}  // namespace

LossBreakdown train_step(model::Model& m, Adam& opt, const std::vector<Example>& batch,
                         const io::RunConfig& cfg, Rng& rng) {
    nn::Ctx ctx{true, &rng};
    opt.zero_grad();
    const auto bl = batch_loss(m, ctx, batch, cfg, &rng);
    check_finite(bl.mean);
    bl.total.backward();
    opt.step();
    return bl.mean;
}

LossBreakdown eval_loss(const model::Model& m, const std::vector<Example>& batch,
                        const io::RunConfig& cfg) {
    nn::Ctx ctx = nn::eval_ctx();
    return batch_loss(m, ctx, batch, cfg, nullptr).mean;
}

TrainingOutcome run_training(const Dataset& train_set, const Dataset* val_set, io::RunConfig cfg,
                             const std::string& out_dir, const std::string& resume_path) {
    if (train_set.size() == 0) throw std::invalid_argument("training: empty manifest");
    std::filesystem::create_directories(out_dir);

    model::Model m(cfg.model, cfg.seed);
    Adam opt(m.params(), cfg.train.lr, cfg.train.warmup_steps, cfg.train.grad_clip);
    uint64_t step = 0;
    if (!resume_path.empty()) {
        const auto lc = load_checkpoint(resume_path);
        check_config_compatible(cfg, lc.raw.config_text);
        restore_params(m, lc.raw);
        restore_optimizer(opt, lc.raw);
        step = lc.step;
    }

    const std::string ckpt_path = out_dir + "/model.ckpt";
    std::ofstream log(out_dir + "/train_log.jsonl", std::ios::app);
    if (!log) throw std::runtime_error("training: cannot open metric log in " + out_dir);

    // Preload once: desk-scale corpora fit in memory.
    std::vector<Example> examples;
    examples.reserve(train_set.size());
    for (size_t i = 0; i < train_set.size(); ++i) examples.push_back(train_set.load(i));
    std::vector<Example> val_examples;
    if (val_set)
        for (size_t i = 0; i < val_set->size(); ++i) val_examples.push_back(val_set->load(i));

    Rng rng(cfg.seed);
    TrainingOutcome outcome;
    bool have_first = false;

    for (long epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        const double decay =
            std::pow(cfg.train.lr_decay_factor, static_cast<double>(epoch / cfg.train.lr_decay_epochs));
        opt.set_base_lr(cfg.train.lr * decay);

        std::vector<size_t> order(examples.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.train.batch_size)) {
            std::vector<Example> batch;
            for (size_t j = start;
                 j < std::min(order.size(), start + static_cast<size_t>(cfg.train.batch_size)); ++j)
                batch.push_back(examples[order[j]]);
            const auto b = train_step(m, opt, batch, cfg, rng);
            ++step;
            log_record(log, step, b, nullptr, epoch);
            if (!have_first) {
                outcome.first = b;
                have_first = true;
            }
            outcome.last = b;
        }

        if (!val_examples.empty()) {
            const auto vb = eval_loss(m, val_examples, cfg);
            log_record(log, step, vb, "val", epoch);
        }
        save_checkpoint(ckpt_path, m, &opt, step, cfg);
    }

    if (cfg.train.epochs == 0) save_checkpoint(ckpt_path, m, &opt, step, cfg);
    outcome.steps = step;
    outcome.checkpoint_path = ckpt_path;
    return outcome;
}

}  // namespace lipsynth::train
