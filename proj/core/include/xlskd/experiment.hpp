#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlskd/corpus.hpp"
#include "xlskd/eval.hpp"
#include "xlskd/model.hpp"
#include "xlskd/synthetic.hpp"
#include "xlskd/train.hpp"

namespace xlskd {

// One experiment, read from a `key = value` file ('#' starts a comment).
// XLSKD_OUTPUT_DIR and XLSKD_SEED override output_dir and seed.
struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::filesystem::path corpus;
  std::filesystem::path dev_corpus;  // optional
  std::filesystem::path output_dir = "runs/experiment";
  std::uint64_t seed = 0;
  LangCode source_lang = "en";
  std::size_t ntl = 0;
  // Source-language-only ce_only epochs run before cross-lingual training
  // when no init checkpoint is given.
  int phase1_epochs = 0;
  TrainConfig train;
  std::size_t max_seq_len = 128;
  std::size_t max_answer_len = kDefaultMaxAnswerLen;
  bool gxlt_include_diagonal = true;
  std::size_t topk = 10;
  int min_freq = 1;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  double init_scale = 0.1;
  std::filesystem::path init_checkpoint;  // optional, requires init_vocab
  std::filesystem::path init_vocab;

  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
  static ExperimentConfig from_file(const std::filesystem::path& path,
                                    bool apply_env_overrides = true);
  std::map<std::string, std::string> to_kv() const;
  // Makes relative input paths relative to `base` instead of the cwd.
  void resolve_paths(const std::filesystem::path& base);
  void write(const std::filesystem::path& path) const;

  // Cheap checks that need no data: ids, paths, ranges, k <= 2*delta.
  void validate() const;
  // Same, plus ntl against the corpus language count.
  void validate_against(const ParallelCorpus& corpus) const;

  // Hex digest of the canonical config (output_dir excluded) and the bytes
  // of every referenced input file.
  std::string hash() const;

  EvalOptions eval_options() const;
  SamplingConfig sampling() const;
};

bool is_filesystem_safe_id(const std::string& id);

// Parses a `key = value` file; duplicate keys and malformed lines throw
// ConfigError. Environment overrides are applied when requested.
std::map<std::string, std::string> read_config_kv(const std::filesystem::path& path,
                                                  bool apply_env_overrides);

struct SampleOutcome {
  std::filesystem::path dataset;
  std::filesystem::path manifest;
  std::size_t count = 0;
  std::vector<LangCode> target_languages;
};

// Writes sample.json and sample_manifest.json under output_dir.
SampleOutcome cmd_sample(const ExperimentConfig& cfg);

struct TrainOutcome {
  bool skipped = false;  // an up-to-date run with the same config hash exists
  std::filesystem::path metrics;
  std::filesystem::path best_checkpoint;
  std::filesystem::path vocab;
  std::optional<DevScore> best_dev;
  TrainResult result;
};

// Artifacts: vocab.txt, checkpoints/epoch_<n>.ckpt, best.ckpt,
// alpha_trace.csv, sample_manifest.json, metrics.json.
TrainOutcome cmd_train(const ExperimentConfig& cfg, bool force = false);

struct EvalRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path vocab;
  std::filesystem::path dataset;
  // Treat the dataset as a parallel corpus and expand every language pair.
  bool all_pairs = false;
  std::filesystem::path output_dir;
  EvalOptions options;
  std::size_t topk = 10;
  Correctness correctness;
};

struct EvalOutcome {
  EvalResult result;
  TopKReport topk;
  std::filesystem::path metrics;
  std::filesystem::path pair_matrix;
  std::filesystem::path topk_csv;
};

// Artifacts: eval_metrics.json, pair_matrix.csv, topk.csv.
EvalOutcome cmd_eval(const EvalRequest& request);

// Only the top-k report (topk.csv plus a JSON summary).
TopKReport cmd_topk(const EvalRequest& request);

// Writes b - a as a pair matrix CSV.
PairMatrix cmd_delta(const std::filesystem::path& a_csv, const std::filesystem::path& b_csv,
                     const std::filesystem::path& out_csv);

void cmd_gen_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out);

// Loads either a parallel corpus (all_pairs) or a generic QA file.
ExampleSet load_eval_examples(const std::filesystem::path& path, bool all_pairs);

}  // namespace xlskd
