#include <cstdlib>
#include <map>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support/pipeline.hpp"
#include "support/temp_dir.hpp"
#include "xlskd/checkpoint.hpp"
#include "xlskd/error.hpp"
#include "xlskd/experiment.hpp"

using namespace xlskd;
using testing::slurp;
using testing::spit;

TEST_CASE("config file parsing, comments and unknown keys") {
  testing::TempDir dir;
  spit(dir / "a.cfg",
       "# comment\nexperiment_id = run-1\ncorpus = data/train.json  # trailing\n"
       "seed = 42\nntl = 2\nloss_mode = skd_fixed\ntemperature = 3.5\n"
       "scale_kl_by_t2 = true\nmapk_k = 4\nmapk_delta = 2\n");
  const auto cfg = ExperimentConfig::from_file(dir / "a.cfg", false);
  CHECK(cfg.experiment_id == "run-1");
  CHECK(cfg.corpus == dir / "data/train.json");
  CHECK(cfg.seed == 42);
  CHECK(cfg.ntl == 2);
  CHECK(cfg.train.weights.mode == LossMode::kSkdFixed);
  CHECK(cfg.train.temperature == 3.5);
  CHECK(cfg.train.scale_kl_by_t2);
  CHECK(cfg.train.mapk.k == 4);

  spit(dir / "b.cfg", "colour = red\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "b.cfg"), ConfigError);
  spit(dir / "c.cfg", "seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "c.cfg"), ConfigError);
  spit(dir / "d.cfg", "seed = many\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "d.cfg"), ConfigError);
  spit(dir / "e.cfg", "just text\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "e.cfg"), ConfigError);
}

TEST_CASE("environment overrides output dir and seed") {
  testing::TempDir dir;
  spit(dir / "a.cfg", "seed = 1\noutput_dir = here\n");
  ::setenv("XLSKD_OUTPUT_DIR", "/tmp/elsewhere", 1);
  ::setenv("XLSKD_SEED", "99", 1);
  const auto over = ExperimentConfig::from_file(dir / "a.cfg");
  const auto plain = ExperimentConfig::from_file(dir / "a.cfg", false);
  ::unsetenv("XLSKD_OUTPUT_DIR");
  ::unsetenv("XLSKD_SEED");
  CHECK(over.output_dir == "/tmp/elsewhere");
  CHECK(over.seed == 99);
  CHECK(plain.seed == 1);
}

TEST_CASE("to_kv and from_kv round trip") {
  ExperimentConfig cfg;
  cfg.corpus = "c.json";
  cfg.train.temperature = 0.1 + 0.2;
  cfg.train.weights.mode = LossMode::kKlOnlyMapk;
  cfg.init_scale = 1e-3;
  const auto back = ExperimentConfig::from_kv(cfg.to_kv());
  CHECK(back.to_kv() == cfg.to_kv());
  CHECK(back.train.temperature == cfg.train.temperature);
}

TEST_CASE("validation rejects bad configs before any work") {
  testing::TempDir dir;
  auto base = testing::small_experiment(dir.path(), 4);
  CHECK_NOTHROW(base.validate());

  auto c = base;
  c.train.mapk = MapkConfig{11, 5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.train.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.train.temperature = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.ntl = 3;
  CHECK_THROWS_AS(cmd_train(c), ConfigError);
  CHECK_FALSE(std::filesystem::exists(c.output_dir));
  c = base;
  c.experiment_id = "../escape";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.corpus = dir / "missing.json";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.source_lang = "fr";
  CHECK_THROWS_AS(cmd_sample(c), ConfigError);
}

TEST_CASE("config hash ignores output dir and tracks inputs") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path(), 4);
  const auto h = cfg.hash();
  auto moved = cfg;
  moved.output_dir = dir / "other";
  CHECK(moved.hash() == h);
  auto reseeded = cfg;
  reseeded.seed += 1;
  CHECK(reseeded.hash() != h);
  spit(dir / "train.json", slurp(dir / "train.json") + "\n");
  CHECK(cfg.hash() != h);
}

TEST_CASE("cmd_sample writes the dataset and manifest") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path(), 10);
  cfg.ntl = 2;
  const auto out = cmd_sample(cfg);
  CHECK(out.count == 10 * 9);
  CHECK(load_examples(out.dataset).examples.size() == 90);
  const auto manifest = nlohmann::json::parse(slurp(out.manifest));
  CHECK(manifest["config_hash"] == cfg.hash());
  CHECK(manifest["experiment_id"] == "unit");
  CHECK(manifest["count"] == 90);
}

TEST_CASE("cmd_train writes every artifact and is a no-op on rerun") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path());
  const auto first = cmd_train(cfg);
  CHECK_FALSE(first.skipped);
  for (const char* name : {"metrics.json", "best.ckpt", "vocab.txt", "alpha_trace.csv",
                           "sample_manifest.json", "checkpoints/epoch_0.ckpt",
                           "checkpoints/epoch_2.ckpt"}) {
    CHECK(std::filesystem::exists(cfg.output_dir / name));
  }
  const auto metrics = nlohmann::json::parse(slurp(first.metrics));
  CHECK(metrics["config_hash"] == cfg.hash());
  CHECK(metrics["epochs"].size() == 3);
  CHECK(metrics["best"]["gxlt_f1"].is_number());
  const auto trace = slurp(cfg.output_dir / "alpha_trace.csv");
  CHECK(trace.rfind("# experiment_id=unit config_hash=" + cfg.hash(), 0) == 0);
  CHECK(load_checkpoint(first.best_checkpoint).metadata.at("config_hash") == cfg.hash());

  const auto bytes = slurp(first.metrics);
  const auto second = cmd_train(cfg);
  CHECK(second.skipped);
  CHECK(second.best_dev.has_value());
  const auto forced = cmd_train(cfg, true);
  CHECK_FALSE(forced.skipped);
  CHECK(slurp(forced.metrics) == bytes);
}

TEST_CASE("cmd_train without a dev corpus still writes a best checkpoint") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path(), 8);
  cfg.dev_corpus.clear();
  const auto out = cmd_train(cfg);
  CHECK(std::filesystem::exists(out.best_checkpoint));
  CHECK_FALSE(out.best_dev.has_value());
  const auto metrics = nlohmann::json::parse(slurp(out.metrics));
  CHECK(metrics["best"].is_null());
}

TEST_CASE("phase-1 warmup and init checkpoints") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path(), 8);
  cfg.phase1_epochs = 1;
  const auto warm = cmd_train(cfg);

  auto resumed = cfg;
  resumed.output_dir = dir / "resumed";
  resumed.init_checkpoint = warm.best_checkpoint;
  resumed.init_vocab = warm.vocab;
  resumed.train.epochs = 0;
  const auto r = cmd_train(resumed);
  CHECK(load_checkpoint(r.best_checkpoint).params == load_checkpoint(warm.best_checkpoint).params);

  auto half = cfg;
  half.init_vocab.clear();
  half.init_checkpoint = warm.best_checkpoint;
  CHECK_THROWS_AS(half.validate(), ConfigError);
}

TEST_CASE("cmd_eval writes metrics, pair matrix and top-k tables") {
  testing::TempDir dir;
  auto cfg = testing::small_experiment(dir.path(), 8);
  const auto trained = cmd_train(cfg);
  EvalRequest req;
  req.checkpoint = trained.best_checkpoint;
  req.vocab = trained.vocab;
  req.dataset = cfg.dev_corpus;
  req.all_pairs = true;
  req.output_dir = dir / "eval";
  req.topk = 4;
  const auto out = cmd_eval(req);
  CHECK(out.result.gxlt.count == 6 * 9);
  CHECK(out.result.xlt.count == 6 * 3);
  const auto metrics = nlohmann::json::parse(slurp(out.metrics));
  CHECK(metrics["config_hash"] == cfg.hash());
  CHECK(metrics["pairs"].size() == 9);
  std::ifstream pm(out.pair_matrix);
  CHECK(read_pair_matrix_csv(pm) == out.result.matrix);
  CHECK(slurp(out.topk_csv).find("top_k,en,de,es\n") != std::string::npos);

  const auto delta = cmd_delta(out.pair_matrix, out.pair_matrix, dir / "delta.csv");
  for (const auto& q : delta.languages()) {
    for (const auto& c : delta.languages()) CHECK(delta.cell(q, c).f1 == 0.0);
  }

  req.vocab = dir / "run/vocab.txt";
  auto wrong = Vocabulary::load(req.vocab);
  wrong.add("zzz-extra-token");
  wrong.save(dir / "wrong_vocab.txt");
  req.vocab = dir / "wrong_vocab.txt";
  CHECK_THROWS_AS(cmd_eval(req), Error);
}
