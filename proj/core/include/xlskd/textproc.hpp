#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlskd/corpus.hpp"

namespace xlskd {

using TokenId = std::uint32_t;

// A token and its half-open [char_begin, char_end) span in code points.
struct Token {
  std::string text;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

// Splits on whitespace, emits each punctuation mark and each CJK character
// as its own token. Total over any input; malformed UTF-8 decodes to U+FFFD.
std::vector<Token> tokenize(std::string_view text);

// Lowercased token form used as the vocabulary key.
std::string fold_case(std::string_view text);

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kSep = 2;
  static constexpr std::size_t kNumReserved = 3;

  // Only the reserved entries.
  Vocabulary();

  // Appends `token` if absent; returns its id.
  TokenId add(const std::string& token);
  // kUnk for unknown tokens. Expects case-folded input.
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

  // Plain text, one token per line, line number == id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Case-folded tokens of every question and context with frequency >=
// min_freq, ordered by frequency desc then lexicographically.
Vocabulary build_vocab(const ParallelCorpus& corpus, int min_freq);

// Layout: question tokens, [SEP], kept context tokens, [SEP].
struct TokenizedFeature {
  std::string seed_id;
  LangCode question_lang;
  LangCode context_lang;
  std::vector<TokenId> token_ids;
  std::size_t question_length = 0;
  // Half-open range of context tokens inside token_ids.
  std::size_t context_begin = 0;
  std::size_t context_end = 0;
  // Per kept context token, [begin, end) offsets into `context`.
  std::vector<std::pair<std::size_t, std::size_t>> token_char_offsets;
  std::u32string context;
  // Indices into the context tokens (0 = first context token).
  std::optional<std::size_t> gold_start;
  std::optional<std::size_t> gold_end;

  std::size_t context_length() const { return context_end - context_begin; }
  bool has_gold() const { return gold_start.has_value() && gold_end.has_value(); }
};

// Truncates the context (never the question) to fit max_seq_len. Gold span
// is set only when the whole answer survives truncation.
TokenizedFeature featurize(const QAExample& example, const Vocabulary& vocab,
                           std::size_t max_seq_len);

// Original context substring covering context tokens [start_tok, end_tok].
std::string detokenize_span(const TokenizedFeature& feature, std::size_t start_tok,
                            std::size_t end_tok);

// Per-language article lists used by normalize_answer.
class ArticleTable {
 public:
  // English "a", "an", "the"; no articles for other languages.
  static ArticleTable defaults();

  void set(const LangCode& lang, std::vector<std::string> articles);
  bool is_article(const LangCode& lang, std::string_view word) const;

 private:
  std::map<LangCode, std::vector<std::string>> articles_;
};

// Lowercase, delete punctuation, drop articles, collapse whitespace.
std::string normalize_answer(std::string_view text, const LangCode& lang,
                             const ArticleTable& articles = ArticleTable::defaults());

// Whitespace split of an already-normalized answer, with each CJK
// character as a separate token.
std::vector<std::string> answer_tokens(std::string_view normalized);

}  // namespace xlskd
