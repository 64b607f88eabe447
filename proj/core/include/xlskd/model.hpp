#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlskd/textproc.hpp"

namespace xlskd {

struct ModelDims {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;

  bool operator==(const ModelDims&) const = default;
};

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Named tensors packed into one contiguous buffer. Shared layout for
// parameters, gradients and optimizer moments.
class TensorSet {
 public:
  enum Index : std::size_t {
    kEmbedding = 0,     // [vocab, embed]
    kHiddenWeight = 1,  // [hidden, 3 * embed], acts on [e, q, e * q]
    kHiddenBias = 2,    // [hidden]
    kStartVector = 3,   // [hidden]
    kEndVector = 4,     // [hidden]
    kNumTensors = 5,
  };

  const ModelDims& dims() const { return dims_; }
  const std::vector<TensorInfo>& layout() const { return layout_; }

  std::span<double> tensor(Index i) {
    return std::span<double>(data_).subspan(layout_[i].offset, layout_[i].size);
  }
  std::span<const double> tensor(Index i) const {
    return std::span<const double>(data_).subspan(layout_[i].offset, layout_[i].size);
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::size_t num_values() const { return data_.size(); }

  bool same_shape(const TensorSet& other) const { return dims_ == other.dims_; }
  void fill(double v);

 protected:
  TensorSet() = default;
  explicit TensorSet(const ModelDims& dims);

  ModelDims dims_;
  std::vector<TensorInfo> layout_;
  std::vector<double> data_;
};

class ModelParams : public TensorSet {
 public:
  ModelParams() = default;
  // All-zero parameters.
  explicit ModelParams(const ModelDims& dims) : TensorSet(dims) {}

  // Uniform in [-scale, scale] from the "model.init" sub-stream of `seed`.
  static ModelParams random_uniform(const ModelDims& dims, std::uint64_t seed,
                                    double scale = 0.1);

  std::vector<double> flatten() const { return data_; }
  // Inverse of flatten; the size must match.
  void restore(std::span<const double> flat);
  bool all_finite() const;

  bool operator==(const ModelParams& other) const {
    return dims_ == other.dims_ && data_ == other.data_;
  }
};

class Gradients : public TensorSet {
 public:
  Gradients() = default;
  explicit Gradients(const ModelDims& dims) : TensorSet(dims) {}
  explicit Gradients(const TensorSet& like) : TensorSet(like.dims()) {}
};

ModelParams clone_params(const ModelParams& params);
// dst := src; throws on shape mismatch.
void overwrite_params(ModelParams& dst, const ModelParams& src);

// Raw per-context-token logits (before temperature).
struct SpanLogits {
  std::vector<double> start;
  std::vector<double> end;
};

struct SpanDistribution {
  std::vector<double> start_probs;
  std::vector<double> end_probs;
  double temperature_used = 1.0;

  std::size_t size() const { return start_probs.size(); }
};

// Activations kept by forward_logits for a subsequent backward.
struct ForwardCache {
  std::vector<double> question_mean;  // [embed]
  std::vector<double> hidden;         // [context x hidden], post-tanh
};

// Mean-pools the question embeddings into q, builds [e_k, q, e_k * q] for
// each context token k, applies tanh(W x + b) and scores with the start/end
// vectors.
SpanLogits forward_logits(const ModelParams& params, const TokenizedFeature& feature,
                          ForwardCache* cache = nullptr);

// Max-subtracted softmax of logits / temperature.
std::vector<double> softmax(std::span<const double> logits, double temperature);
SpanDistribution to_distribution(const SpanLogits& logits, double temperature);

SpanDistribution forward(const ModelParams& params, const TokenizedFeature& feature,
                         double temperature);

// Accumulates into `grads` the gradient of a scalar loss whose derivative
// with respect to the raw logits is `logit_grads`. Recomputes activations
// when `cache` is null.
void backward(const ModelParams& params, const TokenizedFeature& feature,
              const SpanLogits& logit_grads, Gradients& grads,
              const ForwardCache* cache = nullptr);

inline constexpr std::size_t kDefaultMaxAnswerLen = 30;

struct ScoredSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;

  bool operator==(const ScoredSpan&) const = default;
};

// Top-k spans with start <= end and end - start < max_answer_len, scored by
// start_prob * end_prob; ties go to the smaller start, then smaller end.
std::vector<ScoredSpan> decode_spans(const SpanDistribution& dist, std::size_t top_k,
                                     std::size_t max_answer_len = kDefaultMaxAnswerLen);

}  // namespace xlskd
