#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "support/pipeline.hpp"
#include "support/temp_dir.hpp"

using xlskd::testing::slurp;
using xlskd::testing::spit;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(XLSKD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("train") == 1);
  CHECK(run("--help") == 0);
  CHECK(run("eval --help") == 0);
}

TEST_CASE("full pipeline through the command line") {
  xlskd::testing::TempDir dir;
  const auto d = dir.path().string();
  REQUIRE(run("gen-synthetic --out " + d + "/train.json --seeds 12 --seed 1") == 0);
  REQUIRE(run("gen-synthetic --out " + d + "/dev.json --seeds 4 --seed 2 --id-prefix d") == 0);
  spit(dir / "exp.cfg",
       "experiment_id = cli\ncorpus = train.json\ndev_corpus = dev.json\noutput_dir = " + d +
           "/run\nseed = 1\nntl = 1\nepochs = 1\nembed_dim = 8\nhidden_dim = 8\n");
  CHECK(run("sample --config " + d + "/exp.cfg") == 0);
  CHECK(std::filesystem::exists(dir / "run/sample.json"));
  CHECK(run("train --config " + d + "/exp.cfg") == 0);
  CHECK(std::filesystem::exists(dir / "run/metrics.json"));

  const std::string eval_args = "--checkpoint " + d + "/run/best.ckpt --vocab " + d +
                                "/run/vocab.txt --data " + d + "/dev.json --all-pairs";
  CHECK(run("eval " + eval_args + " --out " + d + "/eval --articles de=der,die,das") == 0);
  CHECK(std::filesystem::exists(dir / "eval/pair_matrix.csv"));
  CHECK(run("topk " + eval_args + " --out " + d + "/topk --f1-threshold 0.5 --topk 3") == 0);
  CHECK(std::filesystem::exists(dir / "topk/topk.csv"));
  CHECK(run("delta --a " + d + "/eval/pair_matrix.csv --b " + d + "/eval/pair_matrix.csv --out " +
            d + "/delta.csv") == 0);
  CHECK(slurp(dir / "delta.csv").find("f1,en,0,0,0") != std::string::npos);

  spit(dir / "sweep.cfg", "experiment_id = cli\ncorpus = train.json\ndev_corpus = dev.json\n"
                          "output_dir = " + d + "/sweep\nseed = 1\nepochs = 1\nembed_dim = 8\n"
                          "hidden_dim = 8\nsweep_ntl = 0,1\nsweep_modes = ce_only\n");
  CHECK(run("sweep --config " + d + "/sweep.cfg --workers 2") == 0);
  CHECK(std::filesystem::exists(dir / "sweep/sweep_results.csv"));
}

TEST_CASE("configuration errors exit with 1 and runtime failures with 2") {
  xlskd::testing::TempDir dir;
  const auto d = dir.path().string();
  REQUIRE(run("gen-synthetic --out " + d + "/train.json --seeds 4") == 0);
  spit(dir / "bad.cfg", "corpus = train.json\nntl = 9\noutput_dir = " + d + "/run\n");
  CHECK(run("train --config " + d + "/bad.cfg") == 1);
  spit(dir / "bad2.cfg", "corpus = train.json\nmapk_k = 12\noutput_dir = " + d + "/run\n");
  CHECK(run("train --config " + d + "/bad2.cfg") == 1);
  CHECK(run("train --config " + d + "/missing.cfg") == 1);
  spit(dir / "junk.ckpt", "not a checkpoint");
  CHECK(run("eval --checkpoint " + d + "/junk.ckpt --vocab " + d + "/v.txt --data " + d +
            "/train.json --out " + d + "/e") == 2);
}
