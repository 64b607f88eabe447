#include "xlskd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "xlskd/error.hpp"

namespace xlskd {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in list '" + s + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("sweep key '" + key + "': cannot parse '" + text + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_results(const fs::path& path, const std::string& header_comment,
                   const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << header_comment;
  out << "ntl,temperature,mode,seed,gxlt_f1,gxlt_em,xlt_f1,xlt_em\n";
  for (const auto& r : rows) {
    out << r.cell.ntl << ',' << format_double(r.cell.temperature) << ','
        << to_string(r.cell.mode) << ',' << r.cell.seed << ',' << format_double(r.score.gxlt_f1)
        << ',' << format_double(r.score.gxlt_em) << ',' << format_double(r.score.xlt_f1) << ','
        << format_double(r.score.xlt_em) << '\n';
  }
}

void write_failures(const fs::path& path, const std::vector<SweepFailure>& failures) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "ntl,temperature,mode,seed,error\n";
  for (const auto& f : failures) {
    std::string msg = f.message;
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
      if (c == '"') c = '\'';
    }
    out << f.cell.ntl << ',' << format_double(f.cell.temperature) << ','
        << to_string(f.cell.mode) << ',' << f.cell.seed << ",\"" << msg << "\"\n";
  }
}

DevScore run_cell(const ExperimentConfig& cfg, bool force) {
  const TrainOutcome trained = cmd_train(cfg, force);
  EvalRequest req;
  req.checkpoint = trained.best_checkpoint;
  req.vocab = trained.vocab;
  req.dataset = cfg.dev_corpus.empty() ? cfg.corpus : cfg.dev_corpus;
  req.all_pairs = true;
  req.output_dir = cfg.output_dir / "eval";
  req.options = cfg.eval_options();
  req.topk = cfg.topk;
  const EvalOutcome eval = cmd_eval(req);
  return DevScore{eval.result.gxlt.f1, eval.result.gxlt.em, eval.result.xlt.f1,
                  eval.result.xlt.em};
}

}  // namespace

void SweepSpec::validate() const {
  if (ntl.empty() || temperatures.empty() || modes.empty() || seeds.empty()) {
    throw ConfigError("sweep axes must be non-empty");
  }
  for (double t : temperatures) {
    if (!(t > 0.0)) throw ConfigError("sweep temperatures must be > 0");
  }
  if (workers == 0) throw ConfigError("sweep_workers must be >= 1");
  if (num_cells() > max_cells) {
    throw ConfigError("sweep has " + std::to_string(num_cells()) + " cells, above sweep_max_cells=" +
                      std::to_string(max_cells));
  }
}

SweepSpec SweepSpec::from_kv(std::map<std::string, std::string>& kv,
                             const ExperimentConfig& base) {
  SweepSpec spec;
  spec.ntl = {base.ntl};
  spec.temperatures = {base.train.temperature};
  spec.modes = {base.train.weights.mode};
  spec.seeds = {base.seed};
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (auto v = take("sweep_ntl")) {
    spec.ntl.clear();
    for (const auto& s : split_list(*v)) spec.ntl.push_back(parse_value<std::size_t>("sweep_ntl", s));
  }
  if (auto v = take("sweep_temperature")) {
    spec.temperatures.clear();
    for (const auto& s : split_list(*v)) {
      spec.temperatures.push_back(parse_value<double>("sweep_temperature", s));
    }
  }
  if (auto v = take("sweep_modes")) {
    spec.modes.clear();
    for (const auto& s : split_list(*v)) spec.modes.push_back(parse_loss_mode(s));
  }
  if (auto v = take("sweep_seeds")) {
    spec.seeds.clear();
    for (const auto& s : split_list(*v)) {
      spec.seeds.push_back(parse_value<std::uint64_t>("sweep_seeds", s));
    }
  }
  if (auto v = take("sweep_seed_count")) {
    const auto n = parse_value<std::size_t>("sweep_seed_count", *v);
    if (n == 0) throw ConfigError("sweep_seed_count must be >= 1");
    spec.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) spec.seeds.push_back(base.seed + i);
  }
  if (auto v = take("sweep_max_cells")) spec.max_cells = parse_value<std::size_t>("sweep_max_cells", *v);
  if (auto v = take("sweep_workers")) spec.workers = parse_value<std::size_t>("sweep_workers", *v);
  for (const auto& [key, value] : kv) {
    if (key.rfind("sweep_", 0) == 0) throw ConfigError("unknown sweep key '" + key + "'");
  }
  return spec;
}

std::string SweepCell::dir_name() const {
  std::string t = format_double(temperature);
  for (char& c : t) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return "ntl" + std::to_string(ntl) + "_t" + t + "_" + std::string(to_string(mode)) + "_s" +
         std::to_string(seed);
}

std::vector<SweepCell> expand_grid(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  cells.reserve(spec.num_cells());
  for (std::size_t n : spec.ntl) {
    for (double t : spec.temperatures) {
      for (LossMode m : spec.modes) {
        for (std::uint64_t s : spec.seeds) cells.push_back(SweepCell{n, t, m, s});
      }
    }
  }
  return cells;
}

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
  ExperimentConfig cfg = base;
  cfg.ntl = cell.ntl;
  cfg.train.temperature = cell.temperature;
  cfg.train.weights.mode = cell.mode;
  cfg.seed = cell.seed;
  cfg.experiment_id = base.experiment_id + "." + cell.dir_name();
  cfg.output_dir = base.output_dir / "cells" / cell.dir_name();
  return cfg;
}

SweepOutcome cmd_sweep(const SweepSpec& spec, const ExperimentConfig& base, bool force) {
  spec.validate();
  base.validate();
  const auto cells = expand_grid(spec);
  // Reject bad axes up front, before any cell starts.
  const ParallelCorpus corpus = load_corpus(base.corpus);
  for (const auto& cell : cells) cell_config(base, cell).validate_against(corpus);

  std::vector<std::optional<DevScore>> scores(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        scores[i] = run_cell(cell_config(base, cells[i]), force);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(spec.workers, cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepOutcome out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (scores[i]) {
      out.rows.push_back(SweepRow{cells[i], *scores[i]});
    } else {
      out.failures.push_back(SweepFailure{cells[i], errors[i]});
    }
  }
  fs::create_directories(base.output_dir);
  out.results_csv = base.output_dir / "sweep_results.csv";
  out.failures_csv = base.output_dir / "failures.csv";
  write_results(out.results_csv,
                "# experiment_id=" + base.experiment_id + " config_hash=" + base.hash() + "\n",
                out.rows);
  write_failures(out.failures_csv, out.failures);
  return out;
}

std::pair<SweepSpec, ExperimentConfig> load_sweep_file(const fs::path& path,
                                                       bool apply_env_overrides) {
  auto kv = read_config_kv(path, apply_env_overrides);
  std::map<std::string, std::string> sweep_keys;
  for (auto it = kv.begin(); it != kv.end();) {
    if (it->first.rfind("sweep_", 0) == 0) {
      sweep_keys.insert(*it);
      it = kv.erase(it);
    } else {
      ++it;
    }
  }
  ExperimentConfig base = ExperimentConfig::from_kv(kv);
  base.resolve_paths(path.parent_path());
  SweepSpec spec = SweepSpec::from_kv(sweep_keys, base);
  return {spec, base};
}

}  // namespace xlskd
