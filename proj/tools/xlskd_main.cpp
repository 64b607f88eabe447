// Command-line front end: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xlskd/error.hpp"
#include "xlskd/experiment.hpp"
#include "xlskd/sweep.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct EvalFlags {
  std::string checkpoint;
  std::string vocab;
  std::string data;
  bool all_pairs = false;
  std::string out = "eval_out";
  std::size_t max_seq_len = 128;
  std::size_t max_answer_len = xlskd::kDefaultMaxAnswerLen;
  bool exclude_diagonal = false;
  std::size_t topk = 10;
  double f1_threshold = -1.0;
  std::vector<std::string> articles;
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
  cmd->add_option("--vocab", f.vocab, "Vocabulary file written by train")->required();
  cmd->add_option("--data", f.data, "Sampled dataset, or a parallel corpus with --all-pairs")
      ->required();
  cmd->add_flag("--all-pairs", f.all_pairs, "Expand a parallel corpus into every language pair");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--max-seq-len", f.max_seq_len)->capture_default_str();
  cmd->add_option("--max-answer-len", f.max_answer_len)->capture_default_str();
  cmd->add_flag("--exclude-diagonal", f.exclude_diagonal,
                "Leave same-language pairs out of G-XLT");
  cmd->add_option("--topk", f.topk, "Depth of the top-k analysis")->capture_default_str();
  cmd->add_option("--f1-threshold", f.f1_threshold,
                  "Count a top-k candidate as correct when F1 >= threshold (default: EM)");
  cmd->add_option("--articles", f.articles,
                  "Per-language article list, e.g. de=der,die,das (repeatable)");
}

xlskd::EvalRequest to_request(const EvalFlags& f) {
  xlskd::EvalRequest req;
  req.checkpoint = f.checkpoint;
  req.vocab = f.vocab;
  req.dataset = f.data;
  req.all_pairs = f.all_pairs;
  req.output_dir = f.out;
  req.options.max_seq_len = f.max_seq_len;
  req.options.max_answer_len = f.max_answer_len;
  req.options.gxlt_include_diagonal = !f.exclude_diagonal;
  for (const auto& spec : f.articles) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw xlskd::ConfigError("--articles expects lang=word,word; got '" + spec + "'");
    }
    std::vector<std::string> words;
    std::istringstream in(spec.substr(eq + 1));
    for (std::string w; std::getline(in, w, ',');) {
      if (!w.empty()) words.push_back(w);
    }
    req.options.articles.set(spec.substr(0, eq), words);
  }
  if (f.topk == 0) throw xlskd::ConfigError("--topk must be >= 1");
  req.topk = f.topk;
  if (f.f1_threshold >= 0.0) {
    if (f.f1_threshold > 1.0) throw xlskd::ConfigError("--f1-threshold must be in [0, 1]");
    req.correctness.rule = xlskd::Correctness::Rule::kF1Threshold;
    req.correctness.f1_threshold = f.f1_threshold;
  }
  return req;
}

void print_aggregate(const char* name, const xlskd::Aggregate& a) {
  std::printf("%-6s F1 %.1f  EM %.1f  (%zu examples)\n", name, xlskd::round1(a.f1),
              xlskd::round1(a.em), a.count);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlskd: cross-lingual QA with self-knowledge distillation"};
  app.require_subcommand(1);

  // gen-synthetic
  xlskd::SyntheticSpec synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic parallel QA corpus");
  gen->add_option("--out", synth_out, "Output corpus JSON")->required();
  gen->add_option("--seeds", synth.num_seeds, "Number of seed examples")->capture_default_str();
  gen->add_option("--languages", synth.languages, "Language codes, first is the source")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  gen->add_option("--id-prefix", synth.id_prefix, "Prefix for seed ids")->capture_default_str();
  gen->add_option("--untranslated-rate", synth.untranslated_rate)->capture_default_str();
  gen->add_option("--min-filler", synth.min_filler_sentences)->capture_default_str();
  gen->add_option("--max-filler", synth.max_filler_sentences)->capture_default_str();

  // sample / train
  std::string config_path;
  bool force = false;
  auto* sample = app.add_subcommand("sample", "Sample cross-lingual training examples");
  sample->add_option("--config", config_path, "Experiment config file")->required();
  auto* train = app.add_subcommand("train", "Train with self-knowledge distillation");
  train->add_option("--config", config_path, "Experiment config file")->required();
  train->add_flag("--force", force, "Retrain even if artifacts match the config hash");

  // eval / topk
  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on every language pair");
  add_eval_flags(eval, eval_flags);
  EvalFlags topk_flags;
  auto* topk = app.add_subcommand("topk", "Rank at which the first correct answer appears");
  add_eval_flags(topk, topk_flags);

  // sweep
  std::size_t workers_override = 0;
  auto* sweep = app.add_subcommand("sweep", "Grid sweep over ntl, temperature, mode and seed");
  sweep->add_option("--config", config_path, "Config with sweep_* keys")->required();
  sweep->add_option("--workers", workers_override, "Concurrent cells (overrides sweep_workers)");
  sweep->add_flag("--force", force, "Retrain cells even if artifacts are up to date");

  // delta
  std::string delta_a, delta_b, delta_out;
  auto* delta = app.add_subcommand("delta", "Cellwise difference of two pair matrices (b - a)");
  delta->add_option("--a", delta_a, "Baseline pair_matrix.csv")->required();
  delta->add_option("--b", delta_b, "Compared pair_matrix.csv")->required();
  delta->add_option("--out", delta_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      xlskd::cmd_gen_synthetic(synth, synth_out);
      std::printf("wrote %zu seeds x %zu languages to %s\n", synth.num_seeds,
                  synth.languages.size(), synth_out.c_str());
    } else if (*sample) {
      const auto cfg = xlskd::ExperimentConfig::from_file(config_path);
      const auto out = xlskd::cmd_sample(cfg);
      std::printf("sampled %zu examples -> %s\n", out.count, out.dataset.string().c_str());
    } else if (*train) {
      const auto cfg = xlskd::ExperimentConfig::from_file(config_path);
      const auto out = xlskd::cmd_train(cfg, force);
      if (out.skipped) {
        std::printf("up to date (config hash %s); use --force to retrain\n", cfg.hash().c_str());
      } else {
        std::printf("trained %zu steps, dropped %zu examples -> %s\n", out.result.trace.size(),
                    out.result.dropped_examples, out.metrics.string().c_str());
      }
      if (out.best_dev) {
        std::printf("best dev G-XLT F1 %.1f  XLT F1 %.1f\n", xlskd::round1(out.best_dev->gxlt_f1),
                    xlskd::round1(out.best_dev->xlt_f1));
      }
    } else if (*eval) {
      const auto out = xlskd::cmd_eval(to_request(eval_flags));
      print_aggregate("XLT", out.result.xlt);
      print_aggregate("G-XLT", out.result.gxlt);
      std::printf("artifacts in %s\n", eval_flags.out.c_str());
    } else if (*topk) {
      const auto report = xlskd::cmd_topk(to_request(topk_flags));
      for (const auto& lang : report.languages) {
        std::printf("%s: %zu/%zu outside top-%zu\n", lang.c_str(), report.misses.at(lang),
                    report.totals.at(lang), report.k);
      }
    } else if (*sweep) {
      auto [spec, base] = xlskd::load_sweep_file(config_path);
      if (workers_override > 0) spec.workers = workers_override;
      const auto out = xlskd::cmd_sweep(spec, base, force);
      std::printf("%zu cells ok, %zu failed -> %s\n", out.rows.size(), out.failures.size(),
                  out.results_csv.string().c_str());
      for (const auto& f : out.failures) {
        std::fprintf(stderr, "cell %s failed: %s\n", f.cell.dir_name().c_str(),
                     f.message.c_str());
      }
    } else if (*delta) {
      xlskd::cmd_delta(delta_a, delta_b, delta_out);
      std::printf("wrote %s\n", delta_out.c_str());
    }
  } catch (const xlskd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
