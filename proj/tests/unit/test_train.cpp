#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "xlskd/error.hpp"
#include "xlskd/synthetic.hpp"
#include "xlskd/train.hpp"

using namespace xlskd;

namespace {

struct Fixture {
  Vocabulary vocab;
  std::vector<TokenizedFeature> features;
  ModelParams init;
};

Fixture make_fixture(std::size_t seeds = 24, std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.num_seeds = seeds;
  spec.seed = seed;
  const auto corpus = generate_synthetic(spec);
  Fixture fx;
  fx.vocab = build_vocab(corpus, 1);
  for (const auto& ex : expand_all_pairs(corpus)) fx.features.push_back(featurize(ex, fx.vocab, 96));
  fx.init = ModelParams::random_uniform(ModelDims{fx.vocab.size(), 8, 8}, seed);
  return fx;
}

TrainConfig small_config(LossMode mode) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.adam.learning_rate = 0.01;
  cfg.weights.mode = mode;
  cfg.mapk = MapkConfig{4, 2};
  cfg.rng_seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("adam first step moves each weight by the learning rate against the gradient") {
  ModelParams p(ModelDims{4, 1, 1});
  Gradients g(p);
  g.values()[0] = 3.0;
  g.values()[1] = -0.5;
  auto state = OptimizerState::for_params(p);
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  adam_step(p, g, state, cfg);
  CHECK(p.values()[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(p.values()[1] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(p.values()[2] == 0.0);
  CHECK(state.step == 1);
}

TEST_CASE("adam refuses non-finite gradients without touching state") {
  ModelParams p(ModelDims{4, 1, 1});
  Gradients g(p);
  g.values()[3] = std::nan("");
  auto state = OptimizerState::for_params(p);
  CHECK_THROWS_AS(adam_step(p, g, state, AdamConfig{}), Error);
  CHECK(state.step == 0);
  CHECK(p == ModelParams(ModelDims{4, 1, 1}));
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.temperature = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.mapk = MapkConfig{11, 5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.weights.mode = LossMode::kSkdFixed;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("select_best prefers the earliest maximum") {
  const std::vector<double> s{1.0, 3.0, 2.0, 3.0};
  CHECK(select_best(s) == 1);
}

TEST_CASE("teacher equals student at every epoch boundary") {
  const auto fx = make_fixture();
  auto cfg = small_config(LossMode::kSkdMapk);
  cfg.epochs = 3;
  int syncs = 0;
  TrainHooks hooks;
  hooks.on_epoch_start = [&](int, const ModelParams& teacher, const ModelParams& student) {
    ++syncs;
    CHECK(teacher == student);
    for (std::size_t i = 0; i < 5; ++i) {
      const auto a = forward_logits(teacher, fx.features[i]);
      const auto b = forward_logits(student, fx.features[i]);
      CHECK(a.start == b.start);
      CHECK(a.end == b.end);
    }
  };
  const auto result = train_selfdistill(fx.init, fx.features, cfg, hooks);
  CHECK(syncs == 3);
  for (const auto& r : result.trace) {
    if (r.epoch_start) CHECK(r.kl < 1e-10);
  }
  // Later batches see a teacher that lags behind.
  bool any_positive = false;
  for (const auto& r : result.trace) any_positive = any_positive || r.kl > 1e-8;
  CHECK(any_positive);
}

TEST_CASE("training is reproducible and lowers the loss") {
  const auto fx = make_fixture();
  const auto cfg = small_config(LossMode::kSkdMapk);
  const auto a = train_selfdistill(fx.init, fx.features, cfg);
  const auto b = train_selfdistill(fx.init, fx.features, cfg);
  CHECK(a.params == b.params);
  REQUIRE(a.epochs.size() == 3);
  CHECK(a.epochs[0].epoch == 0);
  CHECK(a.epochs[0].steps == 0);
  CHECK(a.epochs[2].mean_ce < a.epochs[1].mean_ce);
  const std::size_t batches = (fx.features.size() + 7) / 8;
  CHECK(a.trace.size() == 2 * batches);

  auto other = cfg;
  other.rng_seed = 18;
  CHECK_FALSE(train_selfdistill(fx.init, fx.features, other).params == a.params);
}

TEST_CASE("ce_only training never consults the teacher and reports zero KL") {
  const auto fx = make_fixture(10);
  const auto result = train_selfdistill(fx.init, fx.features, small_config(LossMode::kCeOnly));
  for (const auto& r : result.trace) {
    CHECK(r.kl == 0.0);
    CHECK(r.alpha_kl == 0.0);
  }
}

TEST_CASE("kl_only without stochasticity leaves the student unchanged") {
  const auto fx = make_fixture(10);
  const auto result = train_selfdistill(fx.init, fx.features, small_config(LossMode::kKlOnly));
  CHECK(result.params == fx.init);
}

TEST_CASE("examples without a gold span are dropped and counted") {
  auto fx = make_fixture(6);
  fx.features[0].gold_start.reset();
  fx.features[3].gold_end.reset();
  const auto result = train_selfdistill(fx.init, fx.features, small_config(LossMode::kCeOnly));
  CHECK(result.dropped_examples == 2);
  for (auto& f : fx.features) f.gold_start.reset();
  CHECK_THROWS_AS(train_selfdistill(fx.init, fx.features, small_config(LossMode::kCeOnly)),
                  Error);
}

TEST_CASE("dev hook drives best-epoch selection") {
  const auto fx = make_fixture(10);
  auto cfg = small_config(LossMode::kSkdFixed);
  cfg.epochs = 3;
  const std::vector<double> scores{10.0, 30.0, 30.0, 20.0};
  std::size_t call = 0;
  std::vector<ModelParams> snapshots;
  TrainHooks hooks;
  hooks.evaluate_dev = [&](const ModelParams& p) {
    snapshots.push_back(p);
    return DevScore{scores[call++], 0, 0, 0};
  };
  const auto result = train_selfdistill(fx.init, fx.features, cfg, hooks);
  REQUIRE(result.best_epoch.has_value());
  CHECK(*result.best_epoch == 1);
  CHECK(*result.best_params == snapshots[1]);
}

TEST_CASE("alpha trace CSV has a header and one row per step") {
  AlphaTrace trace{{1, 1, true, 0.25, 1.5, 0.0, 1.5}, {2, 1, false, 0.5, 1.0, 0.1, 1.05}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str() == "step,epoch,alpha_kl,ce,kl,total\n1,1,0.25,1.5,0,1.5\n2,1,0.5,1,0.10000000000000001,1.05\n");
}
