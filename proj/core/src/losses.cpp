#include "xlskd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "xlskd/error.hpp"

namespace xlskd {
namespace {

double floored_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

double kl_one_side(std::span<const double> teacher, std::span<const double> student) {
  double sum = 0.0;
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    if (teacher[i] > 0.0) sum += teacher[i] * (floored_log(teacher[i]) - floored_log(student[i]));
  }
  return sum;
}

void check_gold(const SpanDistribution& dist, GoldSpan gold) {
  if (gold.start >= dist.start_probs.size() || gold.end >= dist.end_probs.size()) {
    throw std::out_of_range("gold span outside the context");
  }
}

}  // namespace

std::string_view to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kCeOnly: return "ce_only";
    case LossMode::kSkdFixed: return "skd_fixed";
    case LossMode::kSkdMapk: return "skd_mapk";
    case LossMode::kKlOnly: return "kl_only";
    case LossMode::kKlOnlyMapk: return "kl_only_mapk";
  }
  return "?";
}

LossMode parse_loss_mode(std::string_view name) {
  for (auto m : {LossMode::kCeOnly, LossMode::kSkdFixed, LossMode::kSkdMapk, LossMode::kKlOnly,
                 LossMode::kKlOnlyMapk}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown loss mode '" + std::string(name) +
                    "' (expected ce_only, skd_fixed, skd_mapk, kl_only or kl_only_mapk)");
}

bool needs_teacher(LossMode mode) { return mode != LossMode::kCeOnly; }

bool uses_mapk(LossMode mode) {
  return mode == LossMode::kSkdMapk || mode == LossMode::kKlOnlyMapk;
}

void LossWeights::validate() const {
  if (!std::isfinite(alpha_ce) || !std::isfinite(alpha_kl) || alpha_ce < 0 || alpha_kl < 0) {
    throw ConfigError("loss weights must be finite and non-negative");
  }
}

void MapkConfig::validate() const {
  if (k == 0 || delta == 0) throw ConfigError("mAP@k needs k >= 1 and delta >= 1");
  if (k > 2 * delta) {
    throw ConfigError("mAP@k needs k <= 2*delta (k=" + std::to_string(k) +
                      ", delta=" + std::to_string(delta) + ")");
  }
}

double cross_entropy(const SpanDistribution& dist, GoldSpan gold) {
  check_gold(dist, gold);
  return -floored_log(dist.start_probs[gold.start]) - floored_log(dist.end_probs[gold.end]);
}

double kl_divergence(const SpanDistribution& teacher, const SpanDistribution& student) {
  if (teacher.start_probs.size() != student.start_probs.size() ||
      teacher.end_probs.size() != student.end_probs.size()) {
    throw std::invalid_argument("kl_divergence: context length mismatch");
  }
  return kl_one_side(teacher.start_probs, student.start_probs) +
         kl_one_side(teacher.end_probs, student.end_probs);
}

std::vector<std::size_t> rank_positions(std::span<const double> probs) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return idx;
}

double average_precision_at_k(std::span<const std::size_t> ranked, std::size_t gold,
                              const MapkConfig& cfg) {
  const std::size_t lo = gold >= cfg.delta ? gold - cfg.delta : 0;
  const std::size_t hi = gold + cfg.delta;
  const std::size_t cutoff = std::min(cfg.k, ranked.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t j = 0; j < cutoff; ++j) {
    if (ranked[j] >= lo && ranked[j] <= hi) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(j + 1);
    }
  }
  return sum / static_cast<double>(2 * cfg.delta);
}

MapkCoefficients mapk_coefficient(std::span<const SpanDistribution> teachers,
                                  std::span<const GoldSpan> golds, const MapkConfig& cfg) {
  cfg.validate();
  if (teachers.empty()) throw std::invalid_argument("mapk_coefficient: empty batch");
  if (teachers.size() != golds.size()) {
    throw std::invalid_argument("mapk_coefficient: teacher/gold count mismatch");
  }
  MapkCoefficients c;
  for (std::size_t b = 0; b < teachers.size(); ++b) {
    check_gold(teachers[b], golds[b]);
    c.start += average_precision_at_k(rank_positions(teachers[b].start_probs), golds[b].start, cfg);
    c.end += average_precision_at_k(rank_positions(teachers[b].end_probs), golds[b].end, cfg);
  }
  const double n = static_cast<double>(teachers.size());
  c.start /= n;
  c.end /= n;
  c.combined = std::clamp((c.start + c.end) / 2.0, 0.0, 1.0);
  return c;
}

BatchLossReport combined_loss(std::span<const SpanLogits> students,
                              std::span<const SpanDistribution> teachers,
                              std::span<const GoldSpan> golds, const LossConfig& cfg,
                              std::vector<SpanLogits>* logit_grads) {
  const LossMode mode = cfg.weights.mode;
  cfg.weights.validate();
  if (!(cfg.temperature > 0.0)) throw std::invalid_argument("combined_loss: temperature <= 0");
  if (students.empty()) throw std::invalid_argument("combined_loss: empty batch");
  if (golds.size() != students.size()) {
    throw std::invalid_argument("combined_loss: gold count mismatch");
  }
  if (needs_teacher(mode) && teachers.size() != students.size()) {
    throw Error(std::string("combined_loss: mode ") + std::string(to_string(mode)) +
                " requires a teacher distribution per example");
  }
  if (uses_mapk(mode) && !cfg.mapk) {
    throw Error(std::string("combined_loss: mode ") + std::string(to_string(mode)) +
                " requires a mAP@k config");
  }

  BatchLossReport r;
  switch (mode) {
    case LossMode::kCeOnly:
      r.alpha_ce_effective = cfg.weights.alpha_ce;
      break;
    case LossMode::kSkdFixed:
      r.alpha_ce_effective = cfg.weights.alpha_ce;
      r.alpha_kl_effective = r.alpha_start = r.alpha_end = cfg.weights.alpha_kl;
      break;
    case LossMode::kSkdMapk:
    case LossMode::kKlOnlyMapk: {
      const auto c = mapk_coefficient(teachers, golds, *cfg.mapk);
      r.alpha_ce_effective = mode == LossMode::kSkdMapk ? 1.0 : 0.0;
      r.alpha_kl_effective = c.combined;
      r.alpha_start = c.start;
      r.alpha_end = c.end;
      break;
    }
    case LossMode::kKlOnly:
      r.alpha_kl_effective = r.alpha_start = r.alpha_end = cfg.weights.alpha_kl;
      break;
  }

  const double t = cfg.temperature;
  const double kl_scale = cfg.scale_kl_by_t2 ? t * t : 1.0;
  const double inv_batch = 1.0 / static_cast<double>(students.size());
  if (logit_grads) logit_grads->assign(students.size(), SpanLogits{});

  for (std::size_t b = 0; b < students.size(); ++b) {
    const SpanLogits& z = students[b];
    const SpanDistribution p1 = to_distribution(z, 1.0);
    r.ce_term += cross_entropy(p1, golds[b]);

    SpanDistribution pt;
    if (needs_teacher(mode)) {
      pt = t == 1.0 ? p1 : to_distribution(z, t);
      r.kl_term += kl_scale * kl_divergence(teachers[b], pt);
    }
    if (!logit_grads) continue;

    SpanLogits& g = (*logit_grads)[b];
    g.start.assign(z.start.size(), 0.0);
    g.end.assign(z.end.size(), 0.0);
    // d CE / dz = p - onehot(gold).
    const double wce = r.alpha_ce_effective * inv_batch;
    if (wce != 0.0) {
      for (std::size_t i = 0; i < g.start.size(); ++i) g.start[i] += wce * p1.start_probs[i];
      for (std::size_t i = 0; i < g.end.size(); ++i) g.end[i] += wce * p1.end_probs[i];
      g.start[golds[b].start] -= wce;
      g.end[golds[b].end] -= wce;
    }
    // d KL(teacher || softmax(z / t)) / dz = (p_t - teacher) / t.
    const double wkl = r.alpha_kl_effective * kl_scale * inv_batch / t;
    if (wkl != 0.0) {
      const auto& tq = teachers[b];
      for (std::size_t i = 0; i < g.start.size(); ++i) {
        g.start[i] += wkl * (pt.start_probs[i] - tq.start_probs[i]);
      }
      for (std::size_t i = 0; i < g.end.size(); ++i) {
        g.end[i] += wkl * (pt.end_probs[i] - tq.end_probs[i]);
      }
    }
  }
  r.ce_term *= inv_batch;
  r.kl_term *= inv_batch;
  r.total = r.alpha_ce_effective * r.ce_term + r.alpha_kl_effective * r.kl_term;
  return r;
}

BatchLossReport combined_loss(const SpanDistribution& student, const SpanDistribution* teacher,
                              GoldSpan gold, const LossWeights& weights,
                              const std::optional<MapkConfig>& mapk) {
  weights.validate();
  const LossMode mode = weights.mode;
  if (needs_teacher(mode) && !teacher) {
    throw Error(std::string("combined_loss: mode ") + std::string(to_string(mode)) +
                " requires a teacher distribution");
  }
  if (uses_mapk(mode) && !mapk) {
    throw Error(std::string("combined_loss: mode ") + std::string(to_string(mode)) +
                " requires a mAP@k config");
  }
  BatchLossReport r;
  r.ce_term = cross_entropy(student, gold);
  if (needs_teacher(mode)) r.kl_term = kl_divergence(*teacher, student);
  switch (mode) {
    case LossMode::kCeOnly:
      r.alpha_ce_effective = weights.alpha_ce;
      break;
    case LossMode::kSkdFixed:
      r.alpha_ce_effective = weights.alpha_ce;
      r.alpha_kl_effective = r.alpha_start = r.alpha_end = weights.alpha_kl;
      break;
    case LossMode::kSkdMapk:
    case LossMode::kKlOnlyMapk: {
      const auto c = mapk_coefficient(std::span(teacher, 1), std::span(&gold, 1), *mapk);
      r.alpha_ce_effective = mode == LossMode::kSkdMapk ? 1.0 : 0.0;
      r.alpha_kl_effective = c.combined;
      r.alpha_start = c.start;
      r.alpha_end = c.end;
      break;
    }
    case LossMode::kKlOnly:
      r.alpha_kl_effective = r.alpha_start = r.alpha_end = weights.alpha_kl;
      break;
  }
  r.total = r.alpha_ce_effective * r.ce_term + r.alpha_kl_effective * r.kl_term;
  return r;
}

}  // namespace xlskd
