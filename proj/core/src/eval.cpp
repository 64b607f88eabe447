#include "xlskd/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "xlskd/error.hpp"

namespace xlskd {
namespace {

// Sums after sorting so the result does not depend on example order.
double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

std::vector<LangCode> matrix_languages(std::span<const QAExample> examples,
                                       const EvalOptions& options) {
  if (!options.languages.empty()) return options.languages;
  std::set<LangCode> seen;
  for (const auto& ex : examples) {
    seen.insert(ex.question_lang);
    seen.insert(ex.context_lang);
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("pair matrix CSV: bad number '" + s + "'");
  }
  return v;
}

void write_number(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

double squad_f1(std::string_view prediction, std::string_view gold, const LangCode& lang,
                const ArticleTable& articles) {
  const auto pred = answer_tokens(normalize_answer(prediction, lang, articles));
  const auto ref = answer_tokens(normalize_answer(gold, lang, articles));
  if (pred.empty() || ref.empty()) return pred.empty() && ref.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string, std::size_t> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::size_t same = 0;
  for (const auto& t : pred) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  // Harmonic mean of precision and recall, reduced to one division.
  return static_cast<double>(2 * same) / static_cast<double>(pred.size() + ref.size());
}

int squad_em(std::string_view prediction, std::string_view gold, const LangCode& lang,
             const ArticleTable& articles) {
  return normalize_answer(prediction, lang, articles) == normalize_answer(gold, lang, articles)
             ? 1
             : 0;
}

PairMatrix::PairMatrix(std::vector<LangCode> languages)
    : languages_(std::move(languages)), cells_(languages_.size() * languages_.size()) {}

std::size_t PairMatrix::index_of(const LangCode& lang) const {
  auto it = std::find(languages_.begin(), languages_.end(), lang);
  if (it == languages_.end()) throw Error("pair matrix has no language '" + lang + "'");
  return static_cast<std::size_t>(it - languages_.begin());
}

PairCell& PairMatrix::cell(const LangCode& q, const LangCode& c) {
  return cell(index_of(q), index_of(c));
}

const PairCell& PairMatrix::cell(const LangCode& q, const LangCode& c) const {
  return cell(index_of(q), index_of(c));
}

EvalResult score_predictions(std::span<const QAExample> examples,
                             std::span<const std::string> predictions,
                             const EvalOptions& options) {
  if (examples.empty()) throw Error("evaluate: no examples");
  if (predictions.size() != examples.size()) {
    throw std::invalid_argument("score_predictions: prediction count mismatch");
  }
  EvalResult r;
  r.matrix = PairMatrix(matrix_languages(examples, options));
  const std::size_t nl = r.matrix.languages().size();
  std::vector<std::vector<double>> cell_f1(nl * nl), cell_em(nl * nl);
  std::vector<double> xlt_f1, xlt_em, gxlt_f1, gxlt_em;
  r.predictions.assign(predictions.begin(), predictions.end());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    ExampleScore s;
    s.f1 = squad_f1(predictions[i], ex.answer_text, ex.context_lang, options.articles);
    s.em = squad_em(predictions[i], ex.answer_text, ex.context_lang, options.articles);
    r.scores.push_back(s);
    const std::size_t q = r.matrix.index_of(ex.question_lang);
    const std::size_t c = r.matrix.index_of(ex.context_lang);
    cell_f1[q * nl + c].push_back(s.f1);
    cell_em[q * nl + c].push_back(s.em);
    const bool diagonal = ex.question_lang == ex.context_lang;
    if (diagonal) {
      xlt_f1.push_back(s.f1);
      xlt_em.push_back(s.em);
    }
    if (!diagonal || options.gxlt_include_diagonal) {
      gxlt_f1.push_back(s.f1);
      gxlt_em.push_back(s.em);
    }
  }
  for (std::size_t q = 0; q < nl; ++q) {
    for (std::size_t c = 0; c < nl; ++c) {
      auto& cell = r.matrix.cell(q, c);
      const auto& f = cell_f1[q * nl + c];
      cell.count = f.size();
      if (cell.count == 0) continue;
      cell.f1 = 100.0 * stable_sum(f) / static_cast<double>(cell.count);
      cell.em = 100.0 * stable_sum(cell_em[q * nl + c]) / static_cast<double>(cell.count);
    }
  }
  auto aggregate = [](const std::vector<double>& f1, const std::vector<double>& em) {
    Aggregate a;
    a.count = f1.size();
    if (a.count == 0) return a;
    a.f1 = 100.0 * stable_sum(f1) / static_cast<double>(a.count);
    a.em = 100.0 * stable_sum(em) / static_cast<double>(a.count);
    return a;
  };
  r.xlt = aggregate(xlt_f1, xlt_em);
  r.gxlt = aggregate(gxlt_f1, gxlt_em);
  return r;
}

std::string predict_answer(const ModelParams& params, const Vocabulary& vocab,
                           const QAExample& example, const EvalOptions& options) {
  const TokenizedFeature f = featurize(example, vocab, options.max_seq_len);
  if (f.context_length() == 0) return {};
  const auto spans = decode_spans(forward(params, f, 1.0), 1, options.max_answer_len);
  return detokenize_span(f, spans.front().start, spans.front().end);
}

EvalResult evaluate(const ModelParams& params, const Vocabulary& vocab,
                    std::span<const QAExample> examples, const EvalOptions& options) {
  if (examples.empty()) throw Error("evaluate: no examples");
  if (params.dims().vocab_size != vocab.size()) {
    throw Error("evaluate: checkpoint vocabulary size " +
                std::to_string(params.dims().vocab_size) + " does not match vocabulary of " +
                std::to_string(vocab.size()) + " entries");
  }
  std::vector<std::string> predictions;
  predictions.reserve(examples.size());
  for (const auto& ex : examples) predictions.push_back(predict_answer(params, vocab, ex, options));
  return score_predictions(examples, predictions, options);
}

bool Correctness::accepts(std::string_view prediction, std::string_view gold,
                          const LangCode& lang, const ArticleTable& articles) const {
  if (rule == Rule::kExactMatch) return squad_em(prediction, gold, lang, articles) == 1;
  return squad_f1(prediction, gold, lang, articles) >= f1_threshold;
}

TopKReport topk_from_candidates(std::span<const QAExample> examples,
                                std::span<const std::vector<std::string>> candidates,
                                std::size_t k, const Correctness& rule,
                                const EvalOptions& options) {
  if (k == 0) throw std::invalid_argument("topk: K must be >= 1");
  if (candidates.size() != examples.size()) {
    throw std::invalid_argument("topk: candidate list count mismatch");
  }
  TopKReport report;
  report.k = k;
  if (!options.languages.empty()) {
    report.languages = options.languages;
  } else {
    std::set<LangCode> seen;
    for (const auto& ex : examples) seen.insert(ex.question_lang);
    report.languages.assign(seen.begin(), seen.end());
  }
  for (const auto& l : report.languages) {
    report.counts[l].assign(k, 0);
    report.misses[l] = 0;
    report.totals[l] = 0;
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    auto it = report.counts.find(ex.question_lang);
    if (it == report.counts.end()) {
      throw Error("topk: question language '" + ex.question_lang + "' not in report languages");
    }
    ++report.totals[ex.question_lang];
    const std::size_t limit = std::min(k, candidates[i].size());
    std::optional<std::size_t> rank;
    for (std::size_t r = 0; r < limit; ++r) {
      if (rule.accepts(candidates[i][r], ex.answer_text, ex.context_lang, options.articles)) {
        rank = r;
        break;
      }
    }
    if (rank) {
      ++it->second[*rank];
    } else {
      ++report.misses[ex.question_lang];
    }
  }
  return report;
}

TopKReport topk_analysis(const ModelParams& params, const Vocabulary& vocab,
                         std::span<const QAExample> examples, std::size_t k,
                         const Correctness& rule, const EvalOptions& options) {
  if (k == 0) throw std::invalid_argument("topk: K must be >= 1");
  std::vector<std::vector<std::string>> candidates;
  candidates.reserve(examples.size());
  for (const auto& ex : examples) {
    const TokenizedFeature f = featurize(ex, vocab, options.max_seq_len);
    std::vector<std::string> ranked;
    if (f.context_length() > 0) {
      for (const auto& s : decode_spans(forward(params, f, 1.0), k, options.max_answer_len)) {
        ranked.push_back(detokenize_span(f, s.start, s.end));
      }
    }
    candidates.push_back(std::move(ranked));
  }
  return topk_from_candidates(examples, candidates, k, rule, options);
}

PairMatrix matrix_delta(const PairMatrix& a, const PairMatrix& b) {
  if (a.languages() != b.languages()) {
    throw Error("matrix_delta: language sets differ");
  }
  PairMatrix out(b.languages());
  const std::size_t n = b.languages().size();
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t c = 0; c < n; ++c) {
      auto& d = out.cell(q, c);
      d.f1 = b.cell(q, c).f1 - a.cell(q, c).f1;
      d.em = b.cell(q, c).em - a.cell(q, c).em;
      d.count = b.cell(q, c).count;
    }
  }
  return out;
}

void write_pair_matrix_csv(std::ostream& out, const PairMatrix& m) {
  out << "metric,question_lang";
  for (const auto& l : m.languages()) out << ',' << l;
  out << '\n';
  const std::size_t n = m.languages().size();
  for (const char* metric : {"f1", "em", "count"}) {
    for (std::size_t q = 0; q < n; ++q) {
      out << metric << ',' << m.languages()[q];
      for (std::size_t c = 0; c < n; ++c) {
        out << ',';
        const auto& cell = m.cell(q, c);
        if (metric[0] == 'f') {
          write_number(out, cell.f1);
        } else if (metric[0] == 'e') {
          write_number(out, cell.em);
        } else {
          out << cell.count;
        }
      }
      out << '\n';
    }
  }
}

PairMatrix read_pair_matrix_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 3 || header[0] != "metric" || header[1] != "question_lang") {
    throw Error("pair matrix CSV: missing or malformed header");
  }
  PairMatrix m(std::vector<LangCode>(header.begin() + 2, header.end()));
  const std::size_t n = m.languages().size();
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n + 2) throw Error("pair matrix CSV: wrong column count");
    const std::string& metric = fields[0];
    if (metric != "f1" && metric != "em" && metric != "count") {
      throw Error("pair matrix CSV: unknown metric '" + metric + "'");
    }
    const std::size_t q = m.index_of(fields[1]);
    seen.emplace(metric, fields[1]);
    for (std::size_t c = 0; c < n; ++c) {
      const double v = parse_double(fields[c + 2]);
      auto& cell = m.cell(q, c);
      if (metric == "f1") {
        cell.f1 = v;
      } else if (metric == "em") {
        cell.em = v;
      } else {
        cell.count = static_cast<std::size_t>(v);
      }
    }
  }
  if (seen.size() != 3 * n) throw Error("pair matrix CSV: incomplete matrix");
  return m;
}

void write_topk_csv(std::ostream& out, const TopKReport& report) {
  out << "top_k";
  for (const auto& l : report.languages) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < report.k; ++r) {
    out << (r + 1);
    for (const auto& l : report.languages) out << ',' << report.counts.at(l)[r];
    out << '\n';
  }
}

double round1(double percent) { return std::round(percent * 10.0) / 10.0; }

}  // namespace xlskd
