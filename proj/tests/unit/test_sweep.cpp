#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support/pipeline.hpp"
#include "support/temp_dir.hpp"
#include "xlskd/error.hpp"
#include "xlskd/sweep.hpp"

using namespace xlskd;
using testing::slurp;
using testing::spit;

namespace {

std::size_t data_rows(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n - 1;  // header
}

}  // namespace

TEST_CASE("sweep keys parse into axes and the rest into the base config") {
  testing::TempDir dir;
  spit(dir / "s.cfg",
       "corpus = t.json\nseed = 3\nsweep_ntl = 0, 1,2\nsweep_temperature = 1,2.5\n"
       "sweep_modes = ce_only,skd_mapk\nsweep_seed_count = 2\nsweep_workers = 3\n");
  const auto [spec, base] = load_sweep_file(dir / "s.cfg", false);
  CHECK(spec.ntl == std::vector<std::size_t>{0, 1, 2});
  CHECK(spec.temperatures == std::vector<double>{1.0, 2.5});
  CHECK(spec.modes == std::vector<LossMode>{LossMode::kCeOnly, LossMode::kSkdMapk});
  CHECK(spec.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(spec.workers == 3);
  CHECK(spec.num_cells() == 24);
  CHECK(base.corpus == dir / "t.json");

  spit(dir / "bad.cfg", "corpus = t.json\nsweep_colour = 1\n");
  CHECK_THROWS_AS(load_sweep_file(dir / "bad.cfg", false), ConfigError);
  spit(dir / "empty.cfg", "corpus = t.json\nsweep_ntl = 1,,2\n");
  CHECK_THROWS_AS(load_sweep_file(dir / "empty.cfg", false), ConfigError);
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec{{1}, {1.0}, {LossMode::kSkdMapk}, {1}, 4, 1};
  CHECK_NOTHROW(spec.validate());
  auto s = spec;
  s.ntl.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = spec;
  s.temperatures = {0.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = spec;
  s.seeds = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("cell directories are distinct and filesystem safe") {
  const SweepSpec spec{{0, 1}, {0.5, 2.0}, {LossMode::kCeOnly, LossMode::kSkdMapk}, {1, 2}, 64,
                       1};
  std::set<std::string> names;
  for (const auto& c : expand_grid(spec)) {
    names.insert(c.dir_name());
    CHECK(is_filesystem_safe_id(c.dir_name()));
  }
  CHECK(names.size() == 16);
  CHECK((SweepCell{2, 0.5, LossMode::kSkdMapk, 7}.dir_name()) == "ntl2_t0p5_skd_mapk_s7");
}

TEST_CASE("a 1x1 sweep reproduces a single train and eval run") {
  testing::TempDir dir;
  auto base = testing::small_experiment(dir.path(), 8);
  base.output_dir = dir / "sweep";
  const SweepSpec spec{{base.ntl}, {base.train.temperature}, {base.train.weights.mode},
                       {base.seed}, 4, 1};
  const auto out = cmd_sweep(spec, base);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.failures.empty());

  auto single = base;
  single.output_dir = dir / "single";
  const auto trained = cmd_train(single);
  EvalRequest req;
  req.checkpoint = trained.best_checkpoint;
  req.vocab = trained.vocab;
  req.dataset = single.dev_corpus;
  req.all_pairs = true;
  req.output_dir = dir / "single_eval";
  const auto eval = cmd_eval(req);
  CHECK(out.rows[0].score.gxlt_f1 == eval.result.gxlt.f1);
  CHECK(out.rows[0].score.xlt_em == eval.result.xlt.em);

  const auto cell_dir = base.output_dir / "cells" / out.rows[0].cell.dir_name();
  CHECK(slurp(cell_dir / "best.ckpt").substr(slurp(cell_dir / "best.ckpt").find("dims")) ==
        slurp(trained.best_checkpoint).substr(slurp(trained.best_checkpoint).find("dims")));
}

TEST_CASE("2x2 sweep on two workers: row count, isolation and failure recording") {
  testing::TempDir dir;
  auto base = testing::small_experiment(dir.path(), 6);
  base.train.epochs = 1;
  base.output_dir = dir / "sweep";
  const SweepSpec spec{{0, 1}, {1.0, 2.0}, {LossMode::kSkdMapk}, {5}, 8, 2};
  const auto out = cmd_sweep(spec, base);
  CHECK(out.rows.size() == 4);
  CHECK(data_rows(out.results_csv) == 4);
  CHECK(data_rows(out.failures_csv) == 0);
  const std::string results = slurp(out.results_csv);

  // Removing one cell and rerunning changes nothing for the others.
  std::filesystem::remove_all(base.output_dir / "cells" / out.rows[1].cell.dir_name());
  const auto again = cmd_sweep(spec, base);
  CHECK(slurp(again.results_csv) == results);

  // A cell whose artifacts are unreadable is recorded and the rest continue.
  const auto victim = base.output_dir / "cells" / out.rows[2].cell.dir_name();
  spit(victim / "best.ckpt", "garbage");
  const auto broken = cmd_sweep(spec, base);
  CHECK(broken.rows.size() == 3);
  REQUIRE(broken.failures.size() == 1);
  CHECK(broken.failures[0].cell.dir_name() == out.rows[2].cell.dir_name());
  CHECK(data_rows(broken.failures_csv) == 1);
  CHECK(data_rows(broken.results_csv) == 3);
}

TEST_CASE("sweep rejects out-of-range axes before running any cell") {
  testing::TempDir dir;
  auto base = testing::small_experiment(dir.path(), 4);
  base.output_dir = dir / "sweep";
  const SweepSpec spec{{1, 5}, {1.0}, {LossMode::kCeOnly}, {1}, 8, 1};
  CHECK_THROWS_AS(cmd_sweep(spec, base), ConfigError);
  CHECK_FALSE(std::filesystem::exists(base.output_dir / "cells"));
}
