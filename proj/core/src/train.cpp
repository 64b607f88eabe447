#include "xlskd/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "xlskd/error.hpp"
#include "xlskd/rng.hpp"

namespace xlskd {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
  return OptimizerState{std::vector<double>(params.num_values(), 0.0),
                        std::vector<double>(params.num_values(), 0.0), 0};
}

void adam_step(ModelParams& params, const Gradients& grads, OptimizerState& state,
               const AdamConfig& cfg) {
  const auto g = grads.values();
  auto p = params.values();
  if (g.size() != p.size() || state.m.size() != p.size() || state.v.size() != p.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw Error("adam_step: non-finite gradient at flat index " + std::to_string(i) +
                  " (step " + std::to_string(state.step + 1) + ")");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be a positive finite number");
  }
  adam.validate();
  weights.validate();
  if (uses_mapk(weights.mode)) mapk.validate();
}

LossConfig TrainConfig::loss_config() const {
  LossConfig lc;
  lc.weights = weights;
  if (uses_mapk(weights.mode)) lc.mapk = mapk;
  lc.temperature = temperature;
  lc.scale_kl_by_t2 = scale_kl_by_t2;
  return lc;
}

void write_trace_csv(std::ostream& out, const AlphaTrace& trace) {
  out << "step,epoch,alpha_kl,ce,kl,total\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : trace) {
    out << r.step << ',' << r.epoch << ',' << r.alpha_kl << ',' << r.ce << ',' << r.kl << ','
        << r.total << '\n';
  }
  out.precision(old_precision);
}

std::size_t select_best(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("select_best: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

TrainResult train_selfdistill(const ModelParams& student_init,
                              std::span<const TokenizedFeature> data, const TrainConfig& cfg,
                              const TrainHooks& hooks) {
  cfg.validate();
  TrainResult result;
  std::vector<const TokenizedFeature*> usable;
  for (const auto& f : data) {
    if (f.has_gold()) {
      usable.push_back(&f);
    } else {
      ++result.dropped_examples;
    }
  }
  if (cfg.epochs > 0 && usable.empty()) {
    throw Error("train_selfdistill: no training example carries a gold span");
  }

  ModelParams student = clone_params(student_init);
  ModelParams teacher = clone_params(student_init);
  OptimizerState opt = OptimizerState::for_params(student);
  const LossConfig loss_cfg = cfg.loss_config();
  const bool with_teacher = needs_teacher(cfg.weights.mode);
  Rng shuffle_rng(cfg.rng_seed, "train.shuffle");

  std::vector<double> dev_f1;
  auto finish_epoch = [&](EpochMetrics m) {
    if (hooks.evaluate_dev) {
      m.dev = hooks.evaluate_dev(student);
      dev_f1.push_back(m.dev->gxlt_f1);
      if (select_best(dev_f1) == dev_f1.size() - 1) {
        result.best_epoch = m.epoch;
        result.best_params = student;
      }
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(m.epoch, student);
    result.epochs.push_back(std::move(m));
  };
  finish_epoch(EpochMetrics{});

  std::vector<std::size_t> order(usable.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t global_step = 0;
  Gradients grads(student);
  std::vector<SpanLogits> student_logits;
  std::vector<ForwardCache> caches;
  std::vector<SpanDistribution> teacher_dists;
  std::vector<GoldSpan> golds;
  std::vector<SpanLogits> logit_grads;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    overwrite_params(teacher, student);
    if (hooks.on_epoch_start) hooks.on_epoch_start(epoch, teacher, student);
    if (cfg.shuffle) shuffle_rng.shuffle(std::span(order));

    EpochMetrics em;
    em.epoch = epoch;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::size_t n = end - begin;
      student_logits.resize(n);
      caches.resize(n);
      golds.resize(n);
      teacher_dists.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const TokenizedFeature& f = *usable[order[begin + i]];
        student_logits[i] = forward_logits(student, f, &caches[i]);
        golds[i] = GoldSpan{*f.gold_start, *f.gold_end};
        if (with_teacher) teacher_dists.push_back(forward(teacher, f, cfg.temperature));
      }
      const BatchLossReport report =
          combined_loss(student_logits, teacher_dists, golds, loss_cfg, &logit_grads);
      if (!std::isfinite(report.total)) {
        throw Error("train_selfdistill: non-finite loss at step " +
                    std::to_string(global_step + 1));
      }
      grads.fill(0.0);
      for (std::size_t i = 0; i < n; ++i) {
        backward(student, *usable[order[begin + i]], logit_grads[i], grads, &caches[i]);
      }
      adam_step(student, grads, opt, cfg.adam);

      ++global_step;
      result.trace.push_back(TraceRecord{global_step, epoch, begin == 0, report.alpha_kl_effective,
                                         report.ce_term, report.kl_term, report.total});
      ++em.steps;
      em.mean_total += report.total;
      em.mean_ce += report.ce_term;
      em.mean_kl += report.kl_term;
      em.mean_alpha_kl += report.alpha_kl_effective;
    }
    if (em.steps > 0) {
      const double s = static_cast<double>(em.steps);
      em.mean_total /= s;
      em.mean_ce /= s;
      em.mean_kl /= s;
      em.mean_alpha_kl /= s;
    }
    finish_epoch(std::move(em));
  }
  result.params = std::move(student);
  return result;
}

}  // namespace xlskd
