#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "xlskd/experiment.hpp"
#include "xlskd/synthetic.hpp"

namespace xlskd::testing {

// Small train/dev corpora plus a fast config pointing at them.
inline ExperimentConfig small_experiment(const std::filesystem::path& dir,
                                         std::size_t seeds = 16) {
  SyntheticSpec train;
  train.num_seeds = seeds;
  train.seed = 1;
  SyntheticSpec dev = train;
  dev.num_seeds = 6;
  dev.seed = 2;
  dev.id_prefix = "d";
  cmd_gen_synthetic(train, dir / "train.json");
  cmd_gen_synthetic(dev, dir / "dev.json");

  ExperimentConfig cfg;
  cfg.experiment_id = "unit";
  cfg.corpus = dir / "train.json";
  cfg.dev_corpus = dir / "dev.json";
  cfg.output_dir = dir / "run";
  cfg.seed = 5;
  cfg.ntl = 1;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 8;
  cfg.train.adam.learning_rate = 0.01;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  return cfg;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace xlskd::testing
