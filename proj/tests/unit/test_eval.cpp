#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/metric_fixtures.hpp"
#include "xlskd/error.hpp"
#include "xlskd/eval.hpp"
#include "xlskd/rng.hpp"
#include "xlskd/synthetic.hpp"

using namespace xlskd;

namespace {

QAExample ex(std::string q, std::string c, std::string answer) {
  return QAExample{"s", std::move(q), std::move(c), "question", "context " + answer,
                   std::move(answer), 8};
}

}  // namespace

TEST_CASE("squad metrics on the hand-scored fixture table") {
  for (const auto& c : fixtures::metric_cases()) {
    CAPTURE(c.prediction);
    CAPTURE(c.gold);
    const double want =
        static_cast<double>(c.f1_num) / static_cast<double>(c.f1_den);
    CHECK(squad_f1(c.prediction, c.gold, c.lang) == want);
    CHECK(squad_em(c.prediction, c.gold, c.lang) == c.em);
  }
}

TEST_CASE("custom article lists change normalization") {
  ArticleTable t = ArticleTable::defaults();
  t.set("es", {"el", "la", "los", "las"});
  CHECK(squad_em("la casa", "casa", "es", t) == 1);
  CHECK(squad_em("la casa", "casa", "es") == 0);
}

TEST_CASE("pair matrix aggregates XLT on the diagonal and G-XLT over all pairs") {
  const std::vector<QAExample> examples{ex("en", "en", "a1"), ex("en", "de", "b1"),
                                        ex("de", "en", "c1"), ex("de", "de", "d1")};
  const std::vector<std::string> preds{"a1", "wrong", "c1", "d1 extra"};
  EvalOptions opts;
  const auto r = score_predictions(examples, preds, opts);
  CHECK(r.matrix.languages() == std::vector<LangCode>{"de", "en"});
  CHECK(r.matrix.cell("en", "en").f1 == 100.0);
  CHECK(r.matrix.cell("en", "de").f1 == 0.0);
  CHECK(r.matrix.cell("de", "de").f1 == doctest::Approx(100.0 * 2.0 / 3.0));
  CHECK(r.matrix.cell("de", "de").em == 0.0);
  CHECK(r.xlt.count == 2);
  CHECK(r.xlt.em == 50.0);
  CHECK(r.gxlt.count == 4);
  CHECK(r.gxlt.em == 50.0);

  opts.gxlt_include_diagonal = false;
  const auto off = score_predictions(examples, preds, opts);
  CHECK(off.gxlt.count == 2);
  CHECK(off.gxlt.f1 == 50.0);
}

TEST_CASE("XLT equals G-XLT on a single-language set") {
  Rng rng(1);
  std::vector<QAExample> examples;
  std::vector<std::string> preds;
  for (int i = 0; i < 30; ++i) {
    examples.push_back(ex("vi", "vi", "w" + std::to_string(i) + " x"));
    preds.push_back(rng.below(2) ? examples.back().answer_text : "w" + std::to_string(i));
  }
  const auto r = score_predictions(examples, preds, EvalOptions{});
  CHECK(r.xlt.f1 == r.gxlt.f1);
  CHECK(r.xlt.em == r.gxlt.em);
}

TEST_CASE("aggregates do not depend on example order") {
  Rng rng(9);
  std::vector<QAExample> examples;
  std::vector<std::string> preds;
  for (int i = 0; i < 50; ++i) {
    examples.push_back(ex(rng.below(2) ? "en" : "es", "en", "a b c d e f g"));
    std::string p;
    for (int w = 0, n = 1 + static_cast<int>(rng.below(7)); w < n; ++w) p += "a b c x y z q"[2 * rng.below(7)] + std::string(" ");
    preds.push_back(p);
  }
  const auto a = score_predictions(examples, preds, EvalOptions{});
  std::vector<std::size_t> perm(examples.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(std::span(perm));
  std::vector<QAExample> ex2;
  std::vector<std::string> p2;
  for (auto i : perm) {
    ex2.push_back(examples[i]);
    p2.push_back(preds[i]);
  }
  const auto b = score_predictions(ex2, p2, EvalOptions{});
  CHECK(a.matrix == b.matrix);
  CHECK(a.gxlt.f1 == b.gxlt.f1);
}

TEST_CASE("pair matrix CSV round trip and delta") {
  PairMatrix a({"en", "de"});
  a.cell("en", "en") = PairCell{70.125, 60.0, 10};
  a.cell("en", "de") = PairCell{1.0 / 3.0, 0.0, 4};
  PairMatrix b = a;
  b.cell("en", "de").f1 = 5.5;
  std::stringstream ss;
  ss << "# experiment_id=x config_hash=y\n";
  write_pair_matrix_csv(ss, a);
  CHECK(read_pair_matrix_csv(ss) == a);

  const auto d = matrix_delta(a, b);
  CHECK(d.cell("en", "de").f1 == 5.5 - 1.0 / 3.0);
  CHECK(d.cell("en", "en").f1 == 0.0);
  CHECK(d.cell("en", "en").count == 10);
  CHECK_THROWS_AS(matrix_delta(a, PairMatrix({"en"})), Error);

  std::stringstream bad("metric,question_lang,en\nf1,en,1\n");
  CHECK_THROWS_AS(read_pair_matrix_csv(bad), Error);
}

TEST_CASE("top-k report bins the first correct rank per question language") {
  const std::vector<QAExample> examples{ex("en", "en", "Rome"), ex("en", "de", "Rom"),
                                        ex("de", "de", "Rom"), ex("de", "en", "Rome")};
  const std::vector<std::vector<std::string>> cands{
      {"Rome", "x"}, {"x", "y", "Rom"}, {"a", "b", "c", "Rom"}, {"in Rome"}};
  const auto em = topk_from_candidates(examples, cands, 3, Correctness{}, EvalOptions{});
  CHECK(em.languages == std::vector<LangCode>{"de", "en"});
  CHECK(em.counts.at("en") == std::vector<std::size_t>{1, 0, 1});
  CHECK(em.counts.at("de") == std::vector<std::size_t>{0, 0, 0});
  CHECK(em.misses.at("de") == 2);
  CHECK(em.totals.at("en") == 2);

  Correctness loose;
  loose.rule = Correctness::Rule::kF1Threshold;
  loose.f1_threshold = 0.5;
  const auto f1 = topk_from_candidates(examples, cands, 3, loose, EvalOptions{});
  CHECK(f1.counts.at("de") == std::vector<std::size_t>{1, 0, 0});
  CHECK(f1.misses.at("de") == 1);

  std::ostringstream out;
  write_topk_csv(out, em);
  CHECK(out.str() == "top_k,de,en\n1,0,1\n2,0,0\n3,0,1\n");
}

TEST_CASE("model-based evaluation checks vocabulary size") {
  SyntheticSpec spec;
  spec.num_seeds = 5;
  const auto corpus = generate_synthetic(spec);
  const auto vocab = build_vocab(corpus, 1);
  const auto params = ModelParams::random_uniform(ModelDims{vocab.size(), 4, 4}, 1);
  const auto examples = expand_all_pairs(corpus);
  const auto r = evaluate(params, vocab, examples, EvalOptions{});
  CHECK(r.gxlt.count == examples.size());
  CHECK(r.predictions.size() == examples.size());
  for (const auto& p : r.predictions) CHECK_FALSE(p.empty());

  const auto wrong = ModelParams::random_uniform(ModelDims{vocab.size() + 1, 4, 4}, 1);
  CHECK_THROWS_AS(evaluate(wrong, vocab, examples, EvalOptions{}), Error);
  CHECK_THROWS_AS(evaluate(params, vocab, {}, EvalOptions{}), Error);

  const auto report = topk_analysis(params, vocab, examples, 5, Correctness{}, EvalOptions{});
  std::size_t binned = 0;
  for (const auto& l : report.languages) {
    for (auto n : report.counts.at(l)) binned += n;
    binned += report.misses.at(l);
  }
  CHECK(binned == examples.size());
}

TEST_CASE("round1 rounds half away from zero at one decimal") {
  CHECK(round1(33.25) == 33.3);
  CHECK(round1(66.66666) == 66.7);
  CHECK(round1(0.04) == 0.0);
}
