#include <benchmark/benchmark.h>

#include <vector>

#include "xlskd/corpus.hpp"
#include "xlskd/eval.hpp"
#include "xlskd/losses.hpp"
#include "xlskd/model.hpp"
#include "xlskd/rng.hpp"
#include "xlskd/synthetic.hpp"
#include "xlskd/textproc.hpp"
#include "xlskd/train.hpp"

namespace {

using namespace xlskd;

struct Workload {
  ParallelCorpus corpus;
  Vocabulary vocab;
  std::vector<TokenizedFeature> features;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload out;
    SyntheticSpec spec;
    spec.num_seeds = 100;
    out.corpus = generate_synthetic(spec);
    out.vocab = build_vocab(out.corpus, 1);
    for (const auto& ex : expand_all_pairs(out.corpus)) {
      out.features.push_back(featurize(ex, out.vocab, 128));
    }
    return out;
  }();
  return w;
}

void BM_ForwardLogits(benchmark::State& state) {
  const auto& w = workload();
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = ModelParams::random_uniform(ModelDims{w.vocab.size(), dim, dim}, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_logits(params, w.features[i++ % w.features.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardLogits)->Arg(16)->Arg(64)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const auto& w = workload();
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = ModelParams::random_uniform(ModelDims{w.vocab.size(), dim, dim}, 1);
  Gradients grads(params);
  ForwardCache cache;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& f = w.features[i++ % w.features.size()];
    const auto logits = forward_logits(params, f, &cache);
    backward(params, f, logits, grads, &cache);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(64)->Arg(128);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& w = workload();
  const auto params = ModelParams::random_uniform(ModelDims{w.vocab.size(), 32, 32}, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.weights.mode = static_cast<LossMode>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_selfdistill(params, w.features, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(w.features.size()));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(LossMode::kCeOnly))
    ->Arg(static_cast<int>(LossMode::kSkdMapk))
    ->Unit(benchmark::kMillisecond);

void BM_MapkCoefficient(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<SpanDistribution> teachers;
  std::vector<GoldSpan> golds;
  for (int b = 0; b < 12; ++b) {
    SpanLogits z;
    for (std::size_t i = 0; i < n; ++i) {
      z.start.push_back(rng.uniform(-3, 3));
      z.end.push_back(rng.uniform(-3, 3));
    }
    teachers.push_back(to_distribution(z, 2.0));
    golds.push_back(GoldSpan{rng.below(n), rng.below(n)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mapk_coefficient(teachers, golds, MapkConfig{}));
  }
}
BENCHMARK(BM_MapkCoefficient)->Arg(32)->Arg(128)->Arg(512);

void BM_DecodeSpans(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  SpanLogits z;
  for (std::size_t i = 0; i < n; ++i) {
    z.start.push_back(rng.uniform(-3, 3));
    z.end.push_back(rng.uniform(-3, 3));
  }
  const auto dist = to_distribution(z, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_spans(dist, 10));
  }
}
BENCHMARK(BM_DecodeSpans)->Arg(32)->Arg(128)->Arg(512);

void BM_SampleCrosslingual(benchmark::State& state) {
  SyntheticSpec spec;
  spec.num_seeds = 500;
  spec.languages = {"en", "de", "es", "ar", "hi", "vi", "zh"};
  const auto corpus = generate_synthetic(spec);
  const auto ntl = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_crosslingual(corpus, SamplingConfig{"en", ntl, seed++}));
  }
}
BENCHMARK(BM_SampleCrosslingual)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto& w = workload();
  const auto params = ModelParams::random_uniform(ModelDims{w.vocab.size(), 32, 32}, 1);
  const auto examples = expand_all_pairs(w.corpus);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(params, w.vocab, examples, EvalOptions{}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(examples.size()));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
