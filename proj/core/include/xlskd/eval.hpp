#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlskd/corpus.hpp"
#include "xlskd/model.hpp"
#include "xlskd/textproc.hpp"

namespace xlskd {

// Token-overlap F1 in [0, 1] after normalize_answer.
double squad_f1(std::string_view prediction, std::string_view gold, const LangCode& lang,
                const ArticleTable& articles = ArticleTable::defaults());
// 1 iff the normalized strings are equal.
int squad_em(std::string_view prediction, std::string_view gold, const LangCode& lang,
             const ArticleTable& articles = ArticleTable::defaults());

struct PairCell {
  double f1 = 0.0;  // percent
  double em = 0.0;  // percent
  std::size_t count = 0;

  bool operator==(const PairCell&) const = default;
};

// Rows are question languages, columns context languages.
class PairMatrix {
 public:
  PairMatrix() = default;
  explicit PairMatrix(std::vector<LangCode> languages);

  const std::vector<LangCode>& languages() const { return languages_; }
  std::size_t index_of(const LangCode& lang) const;
  PairCell& cell(const LangCode& q, const LangCode& c);
  const PairCell& cell(const LangCode& q, const LangCode& c) const;
  PairCell& cell(std::size_t q, std::size_t c) { return cells_[q * languages_.size() + c]; }
  const PairCell& cell(std::size_t q, std::size_t c) const {
    return cells_[q * languages_.size() + c];
  }

  bool operator==(const PairMatrix&) const = default;

 private:
  std::vector<LangCode> languages_;
  std::vector<PairCell> cells_;
};

struct Aggregate {
  double f1 = 0.0;  // percent
  double em = 0.0;  // percent
  std::size_t count = 0;
};

struct EvalOptions {
  std::size_t max_seq_len = 128;
  std::size_t max_answer_len = kDefaultMaxAnswerLen;
  // G-XLT over every pair including same-language ones.
  bool gxlt_include_diagonal = true;
  ArticleTable articles = ArticleTable::defaults();
  // Matrix language order; defaults to the sorted languages seen.
  std::vector<LangCode> languages;
};

struct ExampleScore {
  double f1 = 0.0;  // [0, 1]
  int em = 0;
};

struct EvalResult {
  PairMatrix matrix;
  Aggregate xlt;
  Aggregate gxlt;
  std::vector<std::string> predictions;
  std::vector<ExampleScore> scores;
};

// Scores given predictions against the examples' gold answers. Independent
// of the model so predictors can be swapped in tests.
EvalResult score_predictions(std::span<const QAExample> examples,
                             std::span<const std::string> predictions,
                             const EvalOptions& options);

// Rank-1 span prediction for one example.
std::string predict_answer(const ModelParams& params, const Vocabulary& vocab,
                           const QAExample& example, const EvalOptions& options);

EvalResult evaluate(const ModelParams& params, const Vocabulary& vocab,
                    std::span<const QAExample> examples, const EvalOptions& options);

struct Correctness {
  enum class Rule { kExactMatch, kF1Threshold };
  Rule rule = Rule::kExactMatch;
  double f1_threshold = 0.5;

  bool accepts(std::string_view prediction, std::string_view gold, const LangCode& lang,
               const ArticleTable& articles) const;
};

struct TopKReport {
  std::size_t k = 0;
  std::vector<LangCode> languages;
  // counts[lang][r] = examples whose first correct prediction sits at rank r+1.
  std::map<LangCode, std::vector<std::size_t>> counts;
  // Examples without any correct prediction in the top k.
  std::map<LangCode, std::size_t> misses;
  std::map<LangCode, std::size_t> totals;

  bool operator==(const TopKReport&) const = default;
};

// `candidates[i]` are the ranked answer strings for examples[i].
TopKReport topk_from_candidates(std::span<const QAExample> examples,
                                std::span<const std::vector<std::string>> candidates,
                                std::size_t k, const Correctness& rule,
                                const EvalOptions& options);

TopKReport topk_analysis(const ModelParams& params, const Vocabulary& vocab,
                         std::span<const QAExample> examples, std::size_t k,
                         const Correctness& rule, const EvalOptions& options);

// Cellwise b - a on F1 and EM; counts taken from b.
PairMatrix matrix_delta(const PairMatrix& a, const PairMatrix& b);

// Long CSV: metric,question_lang,<context langs...> with rows for f1, em, count.
void write_pair_matrix_csv(std::ostream& out, const PairMatrix& m);
PairMatrix read_pair_matrix_csv(std::istream& in);

// Table layout: top_k,<question langs...>, one row per rank.
void write_topk_csv(std::ostream& out, const TopKReport& report);

// Percent score rounded to one decimal, as reported in tables.
double round1(double percent);

}  // namespace xlskd
