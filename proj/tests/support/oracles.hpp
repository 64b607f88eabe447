#pragma once

// Reference implementations used only by tests. They are written from the
// definitions with plain loops and share no code with the library beyond
// its data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xlskd/model.hpp"

namespace xlskd::oracle {

// AP@k straight from the definition: precision at each cutoff j counted by
// re-scanning the prefix, summed only at relevant cutoffs, over 2 * delta.
inline double average_precision(const std::vector<std::size_t>& ranking, std::size_t gold,
                                std::size_t delta, std::size_t k) {
  const auto relevant = [&](std::size_t pos) {
    const long long diff = static_cast<long long>(pos) - static_cast<long long>(gold);
    return (diff < 0 ? -diff : diff) <= static_cast<long long>(delta);
  };
  double sum = 0.0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t j = 1; j <= depth; ++j) {
    if (!relevant(ranking[j - 1])) continue;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < j; ++i) hits += relevant(ranking[i]) ? 1 : 0;
    sum += static_cast<double>(hits) / static_cast<double>(j);
  }
  return sum / (2.0 * static_cast<double>(delta));
}

// Ranking by selection: repeatedly take the highest remaining probability,
// preferring the lowest index among equals.
inline std::vector<std::size_t> rank_by_selection(const std::vector<double>& probs) {
  std::vector<bool> taken(probs.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t round = 0; round < probs.size(); ++round) {
    std::size_t best = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (taken[i]) continue;
      if (best == probs.size() || probs[i] > probs[best]) best = i;
    }
    taken[best] = true;
    out.push_back(best);
  }
  return out;
}

struct Span {
  std::size_t start;
  std::size_t end;
  double score;
};

// Every valid (start, end) pair, scored and fully sorted.
inline std::vector<Span> enumerate_spans(const SpanDistribution& dist, std::size_t top_k,
                                         std::size_t max_answer_len) {
  std::vector<Span> all;
  const std::size_t n = dist.start_probs.size();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t e = s; e < n && e - s < max_answer_len; ++e) {
      all.push_back(Span{s, e, dist.start_probs[s] * dist.end_probs[e]});
    }
  }
  std::sort(all.begin(), all.end(), [](const Span& a, const Span& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  });
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

// Softmax via the textbook formula in long double.
inline std::vector<double> softmax(const std::vector<double>& logits, double t) {
  long double z = 0.0L;
  long double mx = logits.empty() ? 0.0L : logits[0];
  for (double v : logits) mx = std::max<long double>(mx, v);
  for (double v : logits) z += std::exp((static_cast<long double>(v) - mx) / t);
  std::vector<double> out;
  for (double v : logits) {
    out.push_back(static_cast<double>(std::exp((static_cast<long double>(v) - mx) / t) / z));
  }
  return out;
}

// Central differences of f over every parameter value.
inline std::vector<double> numeric_gradient(ModelParams params,
                                            const std::function<double(const ModelParams&)>& f,
                                            double h) {
  std::vector<double> grad(params.num_values());
  auto values = params.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    values[i] = orig + h;
    const double up = f(params);
    values[i] = orig - h;
    const double down = f(params);
    values[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Expected example count for the cross-lingual sampler.
inline std::size_t crosslingual_count(std::size_t seeds, std::size_t ntl) {
  return seeds * (1 + ntl) * (1 + ntl);
}

}  // namespace xlskd::oracle
