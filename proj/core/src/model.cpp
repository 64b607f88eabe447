#include "xlskd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xlskd/error.hpp"
#include "xlskd/rng.hpp"

namespace xlskd {
namespace {

void check_feature(const ModelParams& params, const TokenizedFeature& feature) {
  if (feature.context_end <= feature.context_begin ||
      feature.context_end > feature.token_ids.size()) {
    throw Error("forward: feature has an empty context range [seed_id=" + feature.seed_id +
                "]");
  }
  if (feature.question_length > feature.context_begin) {
    throw Error("forward: malformed feature layout [seed_id=" + feature.seed_id + "]");
  }
  const std::size_t vocab = params.dims().vocab_size;
  for (TokenId id : feature.token_ids) {
    if (id >= vocab) {
      throw Error("forward: token id " + std::to_string(id) + " outside vocabulary of size " +
                  std::to_string(vocab) + " [seed_id=" + feature.seed_id + "]");
    }
  }
}

std::vector<double> question_mean(const ModelParams& params, const TokenizedFeature& f) {
  const std::size_t d = params.dims().embed_dim;
  std::vector<double> q(d, 0.0);
  if (f.question_length == 0) return q;
  const auto emb = params.tensor(TensorSet::kEmbedding);
  for (std::size_t t = 0; t < f.question_length; ++t) {
    const double* row = emb.data() + static_cast<std::size_t>(f.token_ids[t]) * d;
    for (std::size_t i = 0; i < d; ++i) q[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(f.question_length);
  for (auto& v : q) v *= inv;
  return q;
}

}  // namespace

TensorSet::TensorSet(const ModelDims& dims) : dims_(dims) {
  const std::size_t v = dims.vocab_size;
  const std::size_t d = dims.embed_dim;
  const std::size_t h = dims.hidden_dim;
  if (v == 0 || d == 0 || h == 0) throw std::invalid_argument("ModelDims must be positive");
  const std::vector<std::pair<std::string, std::vector<std::size_t>>> shapes = {
      {"embedding", {v, d}},
      {"hidden_weight", {h, 3 * d}},
      {"hidden_bias", {h}},
      {"start_vector", {h}},
      {"end_vector", {h}},
  };
  std::size_t offset = 0;
  for (const auto& [name, shape] : shapes) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    layout_.push_back(TensorInfo{name, shape, offset, n});
    offset += n;
  }
  data_.assign(offset, 0.0);
}

void TensorSet::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

ModelParams ModelParams::random_uniform(const ModelDims& dims, std::uint64_t seed,
                                        double scale) {
  ModelParams p(dims);
  Rng rng(seed, "model.init");
  for (auto& v : p.data_) v = rng.uniform(-scale, scale);
  return p;
}

void ModelParams::restore(std::span<const double> flat) {
  if (flat.size() != data_.size()) {
    throw std::invalid_argument("ModelParams::restore: expected " +
                                std::to_string(data_.size()) + " values, got " +
                                std::to_string(flat.size()));
  }
  std::copy(flat.begin(), flat.end(), data_.begin());
}

bool ModelParams::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ModelParams clone_params(const ModelParams& params) { return params; }

void overwrite_params(ModelParams& dst, const ModelParams& src) {
  if (!dst.same_shape(src)) throw std::invalid_argument("overwrite_params: shape mismatch");
  dst.restore(src.values());
}

SpanLogits forward_logits(const ModelParams& params, const TokenizedFeature& feature,
                          ForwardCache* cache) {
  check_feature(params, feature);
  const std::size_t d = params.dims().embed_dim;
  const std::size_t h = params.dims().hidden_dim;
  const std::size_t n = feature.context_length();
  const auto emb = params.tensor(TensorSet::kEmbedding);
  const auto w = params.tensor(TensorSet::kHiddenWeight);
  const auto b = params.tensor(TensorSet::kHiddenBias);
  const auto s_vec = params.tensor(TensorSet::kStartVector);
  const auto e_vec = params.tensor(TensorSet::kEndVector);

  const std::vector<double> q = question_mean(params, feature);

  // Row j of W splits into [W1 | W2 | W3]; W1 e + W2 q + W3 (e * q) equals
  // base_j + (W1_j + W3_j * q) . e with base_j = b_j + W2_j . q.
  std::vector<double> base(h);
  std::vector<double> mixed(h * d);
  for (std::size_t j = 0; j < h; ++j) {
    const double* row = w.data() + j * 3 * d;
    double acc = b[j];
    for (std::size_t i = 0; i < d; ++i) {
      acc += row[d + i] * q[i];
      mixed[j * d + i] = row[i] + row[2 * d + i] * q[i];
    }
    base[j] = acc;
  }

  SpanLogits out;
  out.start.resize(n);
  out.end.resize(n);
  std::vector<double> hidden_local;
  std::vector<double>& hidden = cache ? cache->hidden : hidden_local;
  hidden.assign(n * h, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* e = emb.data() +
                      static_cast<std::size_t>(feature.token_ids[feature.context_begin + k]) * d;
    double* hk = hidden.data() + k * h;
    double zs = 0.0;
    double ze = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      const double* m = mixed.data() + j * d;
      double a = base[j];
      for (std::size_t i = 0; i < d; ++i) a += m[i] * e[i];
      const double t = std::tanh(a);
      hk[j] = t;
      zs += s_vec[j] * t;
      ze += e_vec[j] * t;
    }
    out.start[k] = zs;
    out.end[k] = ze;
  }
  if (cache) cache->question_mean = q;
  return out;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax: temperature must be > 0");
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - max) / temperature);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

SpanDistribution to_distribution(const SpanLogits& logits, double temperature) {
  return SpanDistribution{softmax(logits.start, temperature), softmax(logits.end, temperature),
                          temperature};
}

SpanDistribution forward(const ModelParams& params, const TokenizedFeature& feature,
                         double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("forward: temperature must be > 0");
  return to_distribution(forward_logits(params, feature), temperature);
}

void backward(const ModelParams& params, const TokenizedFeature& feature,
              const SpanLogits& logit_grads, Gradients& grads, const ForwardCache* cache) {
  const std::size_t n = feature.context_length();
  if (logit_grads.start.size() != n || logit_grads.end.size() != n) {
    throw std::invalid_argument("backward: logit gradient shape does not match the " +
                                std::to_string(n) + " context tokens");
  }
  if (!grads.same_shape(params)) throw std::invalid_argument("backward: gradient shape mismatch");
  ForwardCache local;
  if (!cache) {
    forward_logits(params, feature, &local);
    cache = &local;
  }
  const std::size_t d = params.dims().embed_dim;
  const std::size_t h = params.dims().hidden_dim;
  const auto emb = params.tensor(TensorSet::kEmbedding);
  const auto w = params.tensor(TensorSet::kHiddenWeight);
  const auto s_vec = params.tensor(TensorSet::kStartVector);
  const auto e_vec = params.tensor(TensorSet::kEndVector);
  auto g_emb = grads.tensor(TensorSet::kEmbedding);
  auto g_w = grads.tensor(TensorSet::kHiddenWeight);
  auto g_b = grads.tensor(TensorSet::kHiddenBias);
  auto g_s = grads.tensor(TensorSet::kStartVector);
  auto g_e = grads.tensor(TensorSet::kEndVector);
  const std::vector<double>& q = cache->question_mean;

  std::vector<double> da(h);
  std::vector<double> da_sum(h, 0.0);
  std::vector<double> dq(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double gs = logit_grads.start[k];
    const double ge = logit_grads.end[k];
    if (gs == 0.0 && ge == 0.0) continue;
    const TokenId id = feature.token_ids[feature.context_begin + k];
    const double* e = emb.data() + static_cast<std::size_t>(id) * d;
    double* g_ek = g_emb.data() + static_cast<std::size_t>(id) * d;
    const double* hk = cache->hidden.data() + k * h;
    for (std::size_t j = 0; j < h; ++j) {
      g_s[j] += gs * hk[j];
      g_e[j] += ge * hk[j];
      da[j] = (gs * s_vec[j] + ge * e_vec[j]) * (1.0 - hk[j] * hk[j]);
      da_sum[j] += da[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double dj = da[j];
      const double* row = w.data() + j * 3 * d;
      double* g_row = g_w.data() + j * 3 * d;
      for (std::size_t i = 0; i < d; ++i) {
        g_row[i] += dj * e[i];
        g_row[2 * d + i] += dj * e[i] * q[i];
        g_ek[i] += dj * (row[i] + row[2 * d + i] * q[i]);
        dq[i] += dj * row[2 * d + i] * e[i];
      }
    }
  }
  // Terms shared by every context token: bias and the W2 . q slab.
  for (std::size_t j = 0; j < h; ++j) {
    g_b[j] += da_sum[j];
    const double* row = w.data() + j * 3 * d;
    double* g_row = g_w.data() + j * 3 * d;
    for (std::size_t i = 0; i < d; ++i) {
      g_row[d + i] += da_sum[j] * q[i];
      dq[i] += da_sum[j] * row[d + i];
    }
  }
  if (feature.question_length > 0) {
    const double inv = 1.0 / static_cast<double>(feature.question_length);
    for (std::size_t t = 0; t < feature.question_length; ++t) {
      double* g_row = g_emb.data() + static_cast<std::size_t>(feature.token_ids[t]) * d;
      for (std::size_t i = 0; i < d; ++i) g_row[i] += dq[i] * inv;
    }
  }
}

std::vector<ScoredSpan> decode_spans(const SpanDistribution& dist, std::size_t top_k,
                                     std::size_t max_answer_len) {
  if (top_k == 0) throw std::invalid_argument("decode_spans: top_k must be >= 1");
  const std::size_t n = dist.start_probs.size();
  if (n == 0) throw Error("decode_spans: empty context");
  if (dist.end_probs.size() != n) throw std::invalid_argument("decode_spans: size mismatch");
  std::vector<ScoredSpan> candidates;
  candidates.reserve(n * std::min(n, max_answer_len));
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t last = std::min(n, s + max_answer_len);
    for (std::size_t e = s; e < last; ++e) {
      candidates.push_back(ScoredSpan{s, e, dist.start_probs[s] * dist.end_probs[e]});
    }
  }
  auto better = [](const ScoredSpan& a, const ScoredSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  };
  const std::size_t k = std::min(top_k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);
  candidates.resize(k);
  return candidates;
}

}  // namespace xlskd
