#include "xlskd/textproc.hpp"

#include <algorithm>
#include <fstream>

#include "xlskd/error.hpp"
#include "xlskd/utf8.hpp"

namespace xlskd {

std::vector<Token> tokenize(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  std::vector<Token> tokens;
  std::size_t word_begin = 0;
  bool in_word = false;
  auto flush = [&](std::size_t end) {
    if (in_word) {
      tokens.push_back(
          Token{utf8::encode(std::u32string_view(cps).substr(word_begin, end - word_begin)),
                word_begin, end});
      in_word = false;
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (utf8::is_whitespace(cp)) {
      flush(i);
    } else if (utf8::is_punctuation(cp) || utf8::is_cjk(cp)) {
      flush(i);
      tokens.push_back(Token{utf8::encode(std::u32string(1, cp)), i, i + 1});
    } else if (!in_word) {
      in_word = true;
      word_begin = i;
    }
  }
  flush(cps.size());
  return tokens;
}

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : utf8::decode(text)) utf8::append(out, utf8::to_lower(cp));
  return out;
}

Vocabulary::Vocabulary() {
  add("[PAD]");
  add("[UNK]");
  add("[SEP]");
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (lineno < kNumReserved) {
      if (line != vocab.tokens_[lineno]) {
        throw Error("vocabulary " + path.string() + ": reserved token mismatch at line " +
                    std::to_string(lineno + 1));
      }
    } else {
      if (line.empty() || vocab.contains(line)) {
        throw Error("vocabulary " + path.string() + ": empty or duplicate token at line " +
                    std::to_string(lineno + 1));
      }
      vocab.add(line);
    }
    ++lineno;
  }
  if (lineno < kNumReserved) throw Error("vocabulary " + path.string() + " is truncated");
  return vocab;
}

Vocabulary build_vocab(const ParallelCorpus& corpus, int min_freq) {
  if (min_freq < 1) throw std::invalid_argument("build_vocab: min_freq must be >= 1");
  if (corpus.empty()) throw Error("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& [seed_id, by_lang] : corpus.records()) {
    for (const auto& [lang, rec] : by_lang) {
      for (const auto* text : {&rec.question, &rec.context}) {
        for (const auto& tok : tokenize(*text)) ++counts[fold_case(tok.text)];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_freq)) entries.emplace_back(tok, n);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [tok, n] : entries) vocab.add(tok);
  return vocab;
}

TokenizedFeature featurize(const QAExample& example, const Vocabulary& vocab,
                           std::size_t max_seq_len) {
  const auto q_tokens = tokenize(example.question);
  if (max_seq_len <= q_tokens.size() + 2) {
    throw Error("featurize: question of " + std::to_string(q_tokens.size()) +
                " tokens does not fit max_seq_len=" + std::to_string(max_seq_len) +
                " [seed_id=" + example.seed_id + "]");
  }
  const auto c_tokens = tokenize(example.context);
  const std::size_t keep = std::min(c_tokens.size(), max_seq_len - q_tokens.size() - 2);

  TokenizedFeature f;
  f.seed_id = example.seed_id;
  f.question_lang = example.question_lang;
  f.context_lang = example.context_lang;
  f.context = utf8::decode(example.context);
  f.question_length = q_tokens.size();
  f.token_ids.reserve(q_tokens.size() + keep + 2);
  for (const auto& t : q_tokens) f.token_ids.push_back(vocab.id_of(fold_case(t.text)));
  f.token_ids.push_back(Vocabulary::kSep);
  f.context_begin = f.token_ids.size();
  for (std::size_t i = 0; i < keep; ++i) {
    f.token_ids.push_back(vocab.id_of(fold_case(c_tokens[i].text)));
    f.token_char_offsets.emplace_back(c_tokens[i].char_begin, c_tokens[i].char_end);
  }
  f.context_end = f.token_ids.size();
  f.token_ids.push_back(Vocabulary::kSep);

  const std::size_t answer_len = utf8::decode(example.answer_text).size();
  const std::size_t a_begin = example.answer_char_start;
  const std::size_t a_end = a_begin + answer_len;
  std::optional<std::size_t> first;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < c_tokens.size(); ++i) {
    if (c_tokens[i].char_end > a_begin && c_tokens[i].char_begin < a_end) {
      if (!first) first = i;
      last = i;
    }
  }
  if (first && *last < keep) {
    f.gold_start = first;
    f.gold_end = last;
  }
  return f;
}

std::string detokenize_span(const TokenizedFeature& feature, std::size_t start_tok,
                            std::size_t end_tok) {
  if (start_tok > end_tok || end_tok >= feature.token_char_offsets.size()) {
    throw std::out_of_range("detokenize_span: span (" + std::to_string(start_tok) + ", " +
                            std::to_string(end_tok) + ") outside " +
                            std::to_string(feature.token_char_offsets.size()) +
                            " context tokens");
  }
  const std::size_t b = feature.token_char_offsets[start_tok].first;
  const std::size_t e = feature.token_char_offsets[end_tok].second;
  return utf8::encode(std::u32string_view(feature.context).substr(b, e - b));
}

ArticleTable ArticleTable::defaults() {
  ArticleTable t;
  t.set("en", {"a", "an", "the"});
  return t;
}

void ArticleTable::set(const LangCode& lang, std::vector<std::string> articles) {
  articles_[lang] = std::move(articles);
}

bool ArticleTable::is_article(const LangCode& lang, std::string_view word) const {
  auto it = articles_.find(lang);
  if (it == articles_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), word) != it->second.end();
}

std::string normalize_answer(std::string_view text, const LangCode& lang,
                             const ArticleTable& articles) {
  std::vector<std::string> words;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_whitespace(cp)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (!utf8::is_punctuation(cp)) {
      utf8::append(current, utf8::to_lower(cp));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::string out;
  for (const auto& w : words) {
    if (articles.is_article(lang, w)) continue;
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::vector<std::string> answer_tokens(std::string_view normalized) {
  std::vector<std::string> out;
  std::string current;
  for (char32_t cp : utf8::decode(normalized)) {
    if (utf8::is_whitespace(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else if (utf8::is_cjk(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      out.push_back(utf8::encode(std::u32string(1, cp)));
    } else {
      utf8::append(current, cp);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace xlskd
