#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlskd/model.hpp"

namespace xlskd {

enum class LossMode {
  kCeOnly,     // alpha_ce * CE
  kSkdFixed,   // alpha_ce * CE + alpha_kl * KL
  kSkdMapk,    // CE + alpha_mapk * KL
  kKlOnly,     // alpha_kl * KL
  kKlOnlyMapk  // alpha_mapk * KL
};

std::string_view to_string(LossMode mode);
LossMode parse_loss_mode(std::string_view name);
bool needs_teacher(LossMode mode);
bool uses_mapk(LossMode mode);

struct LossWeights {
  double alpha_ce = 1.0;
  double alpha_kl = 1.0;
  LossMode mode = LossMode::kSkdMapk;

  void validate() const;
};

// Rank cutoff k and half-window delta (in tokens) around the gold position.
// k <= 2 * delta keeps the coefficient inside [0, 1].
struct MapkConfig {
  std::size_t k = 10;
  std::size_t delta = 5;

  void validate() const;
};

struct GoldSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

// -log p_start[gold.start] - log p_end[gold.end].
double cross_entropy(const SpanDistribution& dist, GoldSpan gold);

// Sum over start and end of sum_i t_i * log(t_i / s_i).
double kl_divergence(const SpanDistribution& teacher, const SpanDistribution& student);

// Context positions sorted by descending probability; ties by lower index.
std::vector<std::size_t> rank_positions(std::span<const double> probs);

// AP@k of a ranking against the window [gold - delta, gold + delta],
// normalized by 2 * delta.
double average_precision_at_k(std::span<const std::size_t> ranked, std::size_t gold,
                              const MapkConfig& cfg);

struct MapkCoefficients {
  double start = 0.0;
  double end = 0.0;
  // (start + end) / 2 clamped to [0, 1].
  double combined = 0.0;
};

// Batch-level mAP@k of the teacher's start and end rankings.
MapkCoefficients mapk_coefficient(std::span<const SpanDistribution> teachers,
                                  std::span<const GoldSpan> golds, const MapkConfig& cfg);

struct BatchLossReport {
  double total = 0.0;
  double ce_term = 0.0;
  double kl_term = 0.0;
  double alpha_ce_effective = 0.0;
  double alpha_kl_effective = 0.0;
  // Per-position coefficients; equal to alpha_kl_effective outside *_mapk modes.
  double alpha_start = 0.0;
  double alpha_end = 0.0;
};

struct LossConfig {
  LossWeights weights;
  std::optional<MapkConfig> mapk;
  // Distillation temperature for the KL term. CE always uses t = 1.
  double temperature = 1.0;
  // Multiplies KL by t^2. Off by default.
  bool scale_kl_by_t2 = false;
};

// Batch loss from student logits. CE and KL terms are means over the batch.
// `teachers` holds the teacher distributions at the distillation temperature
// and may be empty in ce_only mode. When `logit_grads` is non-null it
// receives d(total)/d(raw logits) per example; teachers are constants.
BatchLossReport combined_loss(std::span<const SpanLogits> students,
                              std::span<const SpanDistribution> teachers,
                              std::span<const GoldSpan> golds, const LossConfig& cfg,
                              std::vector<SpanLogits>* logit_grads = nullptr);

// Single example over precomputed distributions: CE and KL both read
// `student`. `teacher` may be null in ce_only mode.
BatchLossReport combined_loss(const SpanDistribution& student, const SpanDistribution* teacher,
                              GoldSpan gold, const LossWeights& weights,
                              const std::optional<MapkConfig>& mapk);

}  // namespace xlskd
