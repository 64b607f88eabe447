#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xlskd {

using LangCode = std::string;

// Dataset files carry this string in their top-level "version" field.
inline constexpr const char* kDatasetVersion = "xlskd-qa-1";

// One question/context/answer triple. The question may be in a different
// language than the context; the answer always comes from the context.
struct QAExample {
  std::string seed_id;
  LangCode question_lang;
  LangCode context_lang;
  std::string question;
  std::string context;
  std::string answer_text;
  // Offset in Unicode scalar values, not bytes.
  std::size_t answer_char_start = 0;

  bool operator==(const QAExample&) const = default;
};

// Per-language content of one seed example.
struct QARecord {
  std::string question;
  std::string context;
  std::string answer_text;
  std::size_t answer_char_start = 0;

  bool operator==(const QARecord&) const = default;
};

// Seed examples aligned across every language of the corpus.
class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  explicit ParallelCorpus(std::vector<LangCode> languages);

  const std::vector<LangCode>& languages() const { return languages_; }
  const std::map<std::string, std::map<LangCode, QARecord>>& records() const {
    return records_;
  }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool has_language(const LangCode& lang) const;
  const QARecord& at(const std::string& seed_id, const LangCode& lang) const;

  // Adds one record; rejects unknown languages, duplicates and bad offsets.
  void add(const std::string& seed_id, const LangCode& lang, QARecord record);

  // Full-alignment check: every seed has a non-empty answer in every
  // language. Throws CorpusError naming the first violation.
  void validate() const;

 private:
  std::vector<LangCode> languages_;
  std::map<std::string, std::map<LangCode, QARecord>> records_;
};

struct SamplingConfig {
  LangCode source_lang = "en";
  std::size_t ntl = 0;
  std::uint64_t rng_seed = 0;
};

// Throws CorpusError if context[answer_char_start..] does not spell
// answer_text.
void check_answer_offset(const std::string& context, const std::string& answer,
                         std::size_t char_start, const std::string& seed_id,
                         const LangCode& lang);

ParallelCorpus load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const ParallelCorpus& corpus);

// Generic QA files, possibly holding mixed-language pairs. `languages` is
// the declared language list of the file.
struct ExampleSet {
  std::vector<LangCode> languages;
  std::vector<QAExample> examples;
};
ExampleSet load_examples(const std::filesystem::path& path);
void save_examples(const std::filesystem::path& path, const ExampleSet& set);

// The ntl target languages drawn for `cfg`, in corpus language order.
std::vector<LangCode> sample_target_languages(const ParallelCorpus& corpus,
                                              const SamplingConfig& cfg);

// Materializes N_seed * (1 + ntl)^2 examples: every ordered
// (question_lang, context_lang) pair over {source} + sampled targets, for
// every seed. One language draw per call.
std::vector<QAExample> sample_crosslingual(const ParallelCorpus& corpus,
                                           const SamplingConfig& cfg);

// Every ordered pair over all corpus languages (the G-XLT evaluation set).
std::vector<QAExample> expand_all_pairs(const ParallelCorpus& corpus);

// Every pair restricted to `langs` (used by sample_crosslingual).
std::vector<QAExample> expand_pairs(const ParallelCorpus& corpus,
                                    const std::vector<LangCode>& langs);

struct CorpusStats {
  std::vector<LangCode> languages;
  std::map<LangCode, std::size_t> records_per_language;
  std::size_t num_seeds = 0;
  double mean_context_tokens = 0.0;
};

CorpusStats corpus_stats(const ParallelCorpus& corpus);

}  // namespace xlskd
