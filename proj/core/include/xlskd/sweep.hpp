#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xlskd/experiment.hpp"
#include "xlskd/losses.hpp"

namespace xlskd {

// Axes of a grid sweep. Every (ntl, temperature, mode, seed) combination is
// one cell with its own output directory.
struct SweepSpec {
  std::vector<std::size_t> ntl;
  std::vector<double> temperatures;
  std::vector<LossMode> modes;
  std::vector<std::uint64_t> seeds;
  std::size_t max_cells = 256;
  std::size_t workers = 1;

  std::size_t num_cells() const {
    return ntl.size() * temperatures.size() * modes.size() * seeds.size();
  }
  void validate() const;

  // Reads and removes the sweep_* keys. Missing axes fall back to the base
  // config's single value.
  static SweepSpec from_kv(std::map<std::string, std::string>& kv, const ExperimentConfig& base);
};

struct SweepCell {
  std::size_t ntl = 0;
  double temperature = 0.0;
  LossMode mode = LossMode::kSkdMapk;
  std::uint64_t seed = 0;

  std::string dir_name() const;
};

struct SweepRow {
  SweepCell cell;
  DevScore score;
};

struct SweepFailure {
  SweepCell cell;
  std::string message;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;  // in grid order
  std::vector<SweepFailure> failures;
  std::filesystem::path results_csv;
  std::filesystem::path failures_csv;
};

std::vector<SweepCell> expand_grid(const SweepSpec& spec);

// Config for one cell: the base with the cell's axes applied and output_dir
// set to <base output>/cells/<dir_name>.
ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell);

// Each cell runs cmd_train and then cmd_eval on the dev corpus (all pairs),
// or on the training corpus when no dev corpus is configured. Failed cells
// are recorded and the sweep carries on.
SweepOutcome cmd_sweep(const SweepSpec& spec, const ExperimentConfig& base, bool force = false);

// Base config plus sweep axes from one file.
std::pair<SweepSpec, ExperimentConfig> load_sweep_file(const std::filesystem::path& path,
                                                       bool apply_env_overrides = true);

}  // namespace xlskd
