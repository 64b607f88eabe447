#include "xlskd/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "xlskd/error.hpp"
#include "xlskd/rng.hpp"
#include "xlskd/textproc.hpp"
#include "xlskd/utf8.hpp"

namespace xlskd {
namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open dataset file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CorpusError("parse error in " + path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw CorpusError(std::string("missing field '") + key + "' in " + where);
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CorpusError(std::string("field '") + key + "' has wrong type in " + where);
  }
}

std::vector<LangCode> read_languages(const json& root) {
  const auto version = field<std::string>(root, "version", "dataset root");
  if (version != kDatasetVersion) {
    throw CorpusError("unsupported dataset version '" + version + "' (expected " +
                      kDatasetVersion + ")");
  }
  auto langs = field<std::vector<std::string>>(root, "languages", "dataset root");
  std::set<std::string> seen;
  for (const auto& l : langs) {
    if (l.empty()) throw CorpusError("empty language code in 'languages'");
    if (!seen.insert(l).second) throw CorpusError("duplicate language '" + l + "'");
  }
  return langs;
}

// Visits every qa entry as (paragraph lang, context, qa json).
template <typename Fn>
void for_each_qa(const json& root, Fn&& fn) {
  const auto& data = root.find("data");
  if (data == root.end() || !data->is_array()) {
    throw CorpusError("missing 'data' array in dataset root");
  }
  for (const auto& article : *data) {
    const auto paragraphs = article.find("paragraphs");
    if (paragraphs == article.end() || !paragraphs->is_array()) {
      throw CorpusError("article without 'paragraphs' array");
    }
    for (const auto& para : *paragraphs) {
      const auto lang = field<std::string>(para, "lang", "paragraph");
      const auto context = field<std::string>(para, "context", "paragraph");
      const auto qas = para.find("qas");
      if (qas == para.end() || !qas->is_array()) {
        throw CorpusError("paragraph without 'qas' array", {}, lang);
      }
      for (const auto& qa : *qas) fn(lang, context, qa);
    }
  }
}

struct ParsedQa {
  std::string seed_id;
  std::string lang;
  std::string question;
  std::string answer_text;
  std::size_t answer_start = 0;
};

ParsedQa parse_qa(const json& qa) {
  ParsedQa out;
  out.seed_id = field<std::string>(qa, "seed_id", "qa entry");
  out.lang = field<std::string>(qa, "lang", "qa entry " + out.seed_id);
  out.question = field<std::string>(qa, "question", "qa entry " + out.seed_id);
  const auto answers = qa.find("answers");
  if (answers == qa.end() || !answers->is_array() || answers->empty()) {
    throw CorpusError("qa entry has no answers", out.seed_id, out.lang);
  }
  const auto& first = answers->front();
  out.answer_text = field<std::string>(first, "text", "answer of " + out.seed_id);
  const auto start = field<long long>(first, "answer_start", "answer of " + out.seed_id);
  if (start < 0) throw CorpusError("negative answer_start", out.seed_id, out.lang);
  out.answer_start = static_cast<std::size_t>(start);
  return out;
}

json qa_entry(const std::string& id, const std::string& seed_id, const LangCode& lang,
              const std::string& question, const std::string& answer,
              std::size_t answer_start) {
  return json{{"id", id},
              {"seed_id", seed_id},
              {"lang", lang},
              {"question", question},
              {"answers", json::array({json{{"text", answer},
                                            {"answer_start", answer_start}}})}};
}

void write_json(const std::filesystem::path& path, const json& root) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << root.dump(1) << '\n';
}

}  // namespace

ParallelCorpus::ParallelCorpus(std::vector<LangCode> languages)
    : languages_(std::move(languages)) {
  std::set<LangCode> seen;
  for (const auto& l : languages_) {
    if (!seen.insert(l).second) throw CorpusError("duplicate language '" + l + "'");
  }
}

bool ParallelCorpus::has_language(const LangCode& lang) const {
  return std::find(languages_.begin(), languages_.end(), lang) != languages_.end();
}

const QARecord& ParallelCorpus::at(const std::string& seed_id, const LangCode& lang) const {
  auto it = records_.find(seed_id);
  if (it == records_.end()) throw CorpusError("unknown seed", seed_id);
  auto jt = it->second.find(lang);
  if (jt == it->second.end()) throw CorpusError("missing language", seed_id, lang);
  return jt->second;
}

void ParallelCorpus::add(const std::string& seed_id, const LangCode& lang, QARecord record) {
  if (!has_language(lang)) {
    throw CorpusError("language not declared in corpus", seed_id, lang);
  }
  if (record.answer_text.empty()) throw CorpusError("empty answer", seed_id, lang);
  check_answer_offset(record.context, record.answer_text, record.answer_char_start,
                      seed_id, lang);
  auto [it, inserted] = records_[seed_id].emplace(lang, std::move(record));
  if (!inserted) throw CorpusError("duplicate record", seed_id, lang);
}

void ParallelCorpus::validate() const {
  for (const auto& [seed_id, by_lang] : records_) {
    for (const auto& lang : languages_) {
      auto it = by_lang.find(lang);
      if (it == by_lang.end()) {
        throw CorpusError("alignment violation: seed lacks language", seed_id, lang);
      }
      if (it->second.answer_text.empty()) throw CorpusError("empty answer", seed_id, lang);
    }
  }
}

void check_answer_offset(const std::string& context, const std::string& answer,
                         std::size_t char_start, const std::string& seed_id,
                         const LangCode& lang) {
  const auto ctx = utf8::decode(context);
  const auto ans = utf8::decode(answer);
  if (char_start > ctx.size() || ans.size() > ctx.size() - char_start ||
      ctx.compare(char_start, ans.size(), ans) != 0) {
    throw CorpusError("answer offset mismatch: context at " + std::to_string(char_start) +
                          " does not spell the answer text",
                      seed_id, lang);
  }
}

ParallelCorpus load_corpus(const std::filesystem::path& path) {
  const json root = read_json(path);
  ParallelCorpus corpus(read_languages(root));
  for_each_qa(root, [&](const std::string& lang, const std::string& context, const json& qa) {
    auto parsed = parse_qa(qa);
    if (parsed.lang != lang) {
      throw CorpusError("parallel corpus entries must share the paragraph language",
                        parsed.seed_id, parsed.lang);
    }
    corpus.add(parsed.seed_id, lang,
               QARecord{std::move(parsed.question), context, std::move(parsed.answer_text),
                        parsed.answer_start});
  });
  corpus.validate();
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const ParallelCorpus& corpus) {
  json data = json::array();
  for (const auto& [seed_id, by_lang] : corpus.records()) {
    json paragraphs = json::array();
    for (const auto& lang : corpus.languages()) {
      auto it = by_lang.find(lang);
      if (it == by_lang.end()) continue;
      const auto& r = it->second;
      paragraphs.push_back(json{
          {"lang", lang},
          {"context", r.context},
          {"qas", json::array({qa_entry(seed_id + "-" + lang, seed_id, lang, r.question,
                                        r.answer_text, r.answer_char_start)})}});
    }
    data.push_back(json{{"title", seed_id}, {"paragraphs", std::move(paragraphs)}});
  }
  write_json(path, json{{"version", kDatasetVersion},
                        {"languages", corpus.languages()},
                        {"data", std::move(data)}});
}

ExampleSet load_examples(const std::filesystem::path& path) {
  const json root = read_json(path);
  ExampleSet set;
  set.languages = read_languages(root);
  const std::set<std::string> declared(set.languages.begin(), set.languages.end());
  for_each_qa(root, [&](const std::string& lang, const std::string& context, const json& qa) {
    auto parsed = parse_qa(qa);
    if (!declared.count(lang) || !declared.count(parsed.lang)) {
      throw CorpusError("language not declared in dataset", parsed.seed_id,
                        declared.count(lang) ? parsed.lang : lang);
    }
    check_answer_offset(context, parsed.answer_text, parsed.answer_start, parsed.seed_id,
                        lang);
    set.examples.push_back(QAExample{std::move(parsed.seed_id), std::move(parsed.lang), lang,
                                     std::move(parsed.question), context,
                                     std::move(parsed.answer_text), parsed.answer_start});
  });
  return set;
}

void save_examples(const std::filesystem::path& path, const ExampleSet& set) {
  // Written by hand one paragraph per line. Sampled sets repeat each context
  // and question several times, so escaped strings are cached.
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  std::unordered_map<std::string, std::string> escaped;
  auto quoted = [&](const std::string& text) -> const std::string& {
    auto it = escaped.find(text);
    if (it == escaped.end()) it = escaped.emplace(text, json(text).dump()).first;
    return it->second;
  };
  out << "{\"version\": " << json(kDatasetVersion).dump()
      << ", \"languages\": " << json(set.languages).dump()
      << ",\n \"data\": [{\"title\": \"examples\", \"paragraphs\": [\n";
  std::string line;
  for (std::size_t i = 0; i < set.examples.size(); ++i) {
    const QAExample& ex = set.examples[i];
    line.clear();
    line += i == 0 ? "{\"lang\":" : ",\n{\"lang\":";
    line += quoted(ex.context_lang);
    line += ",\"context\":";
    line += quoted(ex.context);
    line += ",\"qas\":[{\"id\":";
    line += json(ex.seed_id + "-" + ex.question_lang + "-" + ex.context_lang).dump();
    line += ",\"seed_id\":";
    line += quoted(ex.seed_id);
    line += ",\"lang\":";
    line += quoted(ex.question_lang);
    line += ",\"question\":";
    line += quoted(ex.question);
    line += ",\"answers\":[{\"text\":";
    line += quoted(ex.answer_text);
    line += ",\"answer_start\":";
    line += std::to_string(ex.answer_char_start);
    line += "}]}]}";
    out << line;
  }
  out << "\n]}]}\n";
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<LangCode> sample_target_languages(const ParallelCorpus& corpus,
                                              const SamplingConfig& cfg) {
  if (!corpus.has_language(cfg.source_lang)) {
    throw CorpusError("source language not in corpus", {}, cfg.source_lang);
  }
  std::vector<LangCode> candidates;
  for (const auto& l : corpus.languages()) {
    if (l != cfg.source_lang) candidates.push_back(l);
  }
  if (cfg.ntl > candidates.size()) {
    throw CorpusError("ntl=" + std::to_string(cfg.ntl) + " exceeds the " +
                      std::to_string(candidates.size()) + " available target languages");
  }
  // Partial Fisher-Yates: the first ntl slots are a uniform draw without
  // replacement.
  Rng rng(cfg.rng_seed, "sampling.languages");
  for (std::size_t i = 0; i < cfg.ntl; ++i) {
    std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
  }
  std::set<LangCode> chosen(candidates.begin(), candidates.begin() + cfg.ntl);
  std::vector<LangCode> out;
  for (const auto& l : corpus.languages()) {
    if (chosen.count(l)) out.push_back(l);
  }
  return out;
}

std::vector<QAExample> expand_pairs(const ParallelCorpus& corpus,
                                    const std::vector<LangCode>& langs) {
  std::vector<QAExample> out;
  out.reserve(corpus.size() * langs.size() * langs.size());
  for (const auto& [seed_id, by_lang] : corpus.records()) {
    for (const auto& q : langs) {
      const QARecord& qrec = by_lang.at(q);
      for (const auto& c : langs) {
        const QARecord& crec = by_lang.at(c);
        out.push_back(QAExample{seed_id, q, c, qrec.question, crec.context, crec.answer_text,
                                crec.answer_char_start});
      }
    }
  }
  return out;
}

std::vector<QAExample> sample_crosslingual(const ParallelCorpus& corpus,
                                           const SamplingConfig& cfg) {
  std::vector<LangCode> langs{cfg.source_lang};
  for (auto& l : sample_target_languages(corpus, cfg)) langs.push_back(std::move(l));
  return expand_pairs(corpus, langs);
}

std::vector<QAExample> expand_all_pairs(const ParallelCorpus& corpus) {
  return expand_pairs(corpus, corpus.languages());
}

CorpusStats corpus_stats(const ParallelCorpus& corpus) {
  CorpusStats stats;
  stats.languages = corpus.languages();
  stats.num_seeds = corpus.size();
  for (const auto& l : corpus.languages()) stats.records_per_language[l] = 0;
  std::size_t contexts = 0;
  std::size_t tokens = 0;
  for (const auto& [seed_id, by_lang] : corpus.records()) {
    for (const auto& [lang, rec] : by_lang) {
      ++stats.records_per_language[lang];
      ++contexts;
      tokens += tokenize(rec.context).size();
    }
  }
  stats.mean_context_tokens =
      contexts == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(contexts);
  return stats;
}

}  // namespace xlskd
