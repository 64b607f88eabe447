#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "xlskd/losses.hpp"
#include "xlskd/model.hpp"
#include "xlskd/textproc.hpp"

namespace xlskd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  static OptimizerState for_params(const ModelParams& params);
};

// Bias-corrected Adam. Throws on non-finite gradients before touching
// params or state.
void adam_step(ModelParams& params, const Gradients& grads, OptimizerState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  int epochs = 3;
  std::size_t batch_size = 12;
  AdamConfig adam;
  // Distillation temperature for teacher and student in the KL term.
  double temperature = 2.0;
  LossWeights weights;
  MapkConfig mapk;
  bool scale_kl_by_t2 = false;
  std::uint64_t rng_seed = 0;
  bool shuffle = true;

  void validate() const;
  LossConfig loss_config() const;
};

struct TraceRecord {
  std::size_t step = 0;  // 1-based global step
  int epoch = 0;         // 1-based
  bool epoch_start = false;
  double alpha_kl = 0.0;
  double ce = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

using AlphaTrace = std::vector<TraceRecord>;

// Header: step,epoch,alpha_kl,ce,kl,total
void write_trace_csv(std::ostream& out, const AlphaTrace& trace);

struct DevScore {
  double gxlt_f1 = 0.0;
  double gxlt_em = 0.0;
  double xlt_f1 = 0.0;
  double xlt_em = 0.0;
};

struct EpochMetrics {
  int epoch = 0;  // 0 = before training
  std::size_t steps = 0;
  double mean_total = 0.0;
  double mean_ce = 0.0;
  double mean_kl = 0.0;
  double mean_alpha_kl = 0.0;
  std::optional<DevScore> dev;
};

struct TrainHooks {
  // Called right after the teacher is synchronized, before the epoch's
  // first batch.
  std::function<void(int epoch, const ModelParams& teacher, const ModelParams& student)>
      on_epoch_start;
  // Called after each epoch (and once with epoch 0 on the initial params).
  std::function<void(int epoch, const ModelParams& student)> on_epoch_end;
  // Dev evaluation for model selection; run on epoch 0 and after each epoch.
  std::function<DevScore(const ModelParams& student)> evaluate_dev;
};

struct TrainResult {
  ModelParams params;
  AlphaTrace trace;
  std::vector<EpochMetrics> epochs;
  std::size_t dropped_examples = 0;
  // Epoch with the highest dev G-XLT F1 (earliest on ties); empty without
  // a dev evaluator.
  std::optional<int> best_epoch;
  std::optional<ModelParams> best_params;
};

// Self-distillation in generations: the teacher starts as student_init and
// is overwritten with the student at every epoch boundary.
TrainResult train_selfdistill(const ModelParams& student_init,
                              std::span<const TokenizedFeature> data, const TrainConfig& cfg,
                              const TrainHooks& hooks = {});

// Index of the maximum; ties go to the earliest index.
std::size_t select_best(std::span<const double> scores);

}  // namespace xlskd
