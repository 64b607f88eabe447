#include "xlskd/experiment.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xlskd/checkpoint.hpp"
#include "xlskd/error.hpp"
#include "xlskd/rng.hpp"

namespace xlskd {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string artifact_comment(const std::string& id, const std::string& hash) {
  return "# experiment_id=" + id + " config_hash=" + hash + "\n";
}

json dev_json(const DevScore& d) {
  return json{{"gxlt_f1", round1(d.gxlt_f1)},
              {"gxlt_em", round1(d.gxlt_em)},
              {"xlt_f1", round1(d.xlt_f1)},
              {"xlt_em", round1(d.xlt_em)}};
}

json pair_matrix_json(const PairMatrix& m) {
  json cells = json::array();
  for (const auto& q : m.languages()) {
    for (const auto& c : m.languages()) {
      const auto& cell = m.cell(q, c);
      cells.push_back(json{{"question_lang", q},
                           {"context_lang", c},
                           {"f1", round1(cell.f1)},
                           {"em", round1(cell.em)},
                           {"count", cell.count}});
    }
  }
  return cells;
}

std::vector<TokenizedFeature> featurize_all(const std::vector<QAExample>& examples,
                                            const Vocabulary& vocab, std::size_t max_seq_len) {
  std::vector<TokenizedFeature> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(featurize(ex, vocab, max_seq_len));
  return out;
}

DevScore to_dev_score(const EvalResult& r) {
  return DevScore{r.gxlt.f1, r.gxlt.em, r.xlt.f1, r.xlt.em};
}

json topk_json(const TopKReport& report) {
  json per_lang = json::object();
  for (const auto& l : report.languages) {
    per_lang[l] = json{{"counts", report.counts.at(l)},
                       {"misses", report.misses.at(l)},
                       {"total", report.totals.at(l)}};
  }
  return json{{"k", report.k}, {"languages", report.languages}, {"per_language", per_lang}};
}

}  // namespace

bool is_filesystem_safe_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    auto sz = [&] { return parse_number<std::size_t>(key, value); };
    auto dbl = [&] { return parse_number<double>(key, value); };
    auto integer = [&] { return parse_number<int>(key, value); };
    if (key == "experiment_id") c.experiment_id = value;
    else if (key == "corpus") c.corpus = value;
    else if (key == "dev_corpus") c.dev_corpus = value;
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "source_lang") c.source_lang = value;
    else if (key == "ntl") c.ntl = sz();
    else if (key == "phase1_epochs") c.phase1_epochs = integer();
    else if (key == "epochs") c.train.epochs = integer();
    else if (key == "batch_size") c.train.batch_size = sz();
    else if (key == "learning_rate") c.train.adam.learning_rate = dbl();
    else if (key == "adam_beta1") c.train.adam.beta1 = dbl();
    else if (key == "adam_beta2") c.train.adam.beta2 = dbl();
    else if (key == "adam_eps") c.train.adam.eps = dbl();
    else if (key == "temperature") c.train.temperature = dbl();
    else if (key == "loss_mode") c.train.weights.mode = parse_loss_mode(value);
    else if (key == "alpha_ce") c.train.weights.alpha_ce = dbl();
    else if (key == "alpha_kl") c.train.weights.alpha_kl = dbl();
    else if (key == "mapk_k") c.train.mapk.k = sz();
    else if (key == "mapk_delta") c.train.mapk.delta = sz();
    else if (key == "scale_kl_by_t2") c.train.scale_kl_by_t2 = parse_bool(key, value);
    else if (key == "shuffle") c.train.shuffle = parse_bool(key, value);
    else if (key == "max_seq_len") c.max_seq_len = sz();
    else if (key == "max_answer_len") c.max_answer_len = sz();
    else if (key == "gxlt_include_diagonal") c.gxlt_include_diagonal = parse_bool(key, value);
    else if (key == "topk") c.topk = sz();
    else if (key == "min_freq") c.min_freq = integer();
    else if (key == "embed_dim") c.embed_dim = sz();
    else if (key == "hidden_dim") c.hidden_dim = sz();
    else if (key == "init_scale") c.init_scale = dbl();
    else if (key == "init_checkpoint") c.init_checkpoint = value;
    else if (key == "init_vocab") c.init_vocab = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["experiment_id"] = experiment_id;
  kv["corpus"] = corpus.string();
  if (!dev_corpus.empty()) kv["dev_corpus"] = dev_corpus.string();
  kv["output_dir"] = output_dir.string();
  kv["seed"] = std::to_string(seed);
  kv["source_lang"] = source_lang;
  kv["ntl"] = std::to_string(ntl);
  kv["phase1_epochs"] = std::to_string(phase1_epochs);
  kv["epochs"] = std::to_string(train.epochs);
  kv["batch_size"] = std::to_string(train.batch_size);
  kv["learning_rate"] = num(train.adam.learning_rate);
  kv["adam_beta1"] = num(train.adam.beta1);
  kv["adam_beta2"] = num(train.adam.beta2);
  kv["adam_eps"] = num(train.adam.eps);
  kv["temperature"] = num(train.temperature);
  kv["loss_mode"] = std::string(to_string(train.weights.mode));
  kv["alpha_ce"] = num(train.weights.alpha_ce);
  kv["alpha_kl"] = num(train.weights.alpha_kl);
  kv["mapk_k"] = std::to_string(train.mapk.k);
  kv["mapk_delta"] = std::to_string(train.mapk.delta);
  kv["scale_kl_by_t2"] = train.scale_kl_by_t2 ? "true" : "false";
  kv["shuffle"] = train.shuffle ? "true" : "false";
  kv["max_seq_len"] = std::to_string(max_seq_len);
  kv["max_answer_len"] = std::to_string(max_answer_len);
  kv["gxlt_include_diagonal"] = gxlt_include_diagonal ? "true" : "false";
  kv["topk"] = std::to_string(topk);
  kv["min_freq"] = std::to_string(min_freq);
  kv["embed_dim"] = std::to_string(embed_dim);
  kv["hidden_dim"] = std::to_string(hidden_dim);
  kv["init_scale"] = num(init_scale);
  if (!init_checkpoint.empty()) kv["init_checkpoint"] = init_checkpoint.string();
  if (!init_vocab.empty()) kv["init_vocab"] = init_vocab.string();
  return kv;
}

std::map<std::string, std::string> read_config_kv(const fs::path& path,
                                                  bool apply_env_overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    }
  }
  if (apply_env_overrides) {
    if (const char* out = std::getenv("XLSKD_OUTPUT_DIR"); out && *out) kv["output_dir"] = out;
    if (const char* seed = std::getenv("XLSKD_SEED"); seed && *seed) kv["seed"] = seed;
  }
  return kv;
}

void ExperimentConfig::resolve_paths(const fs::path& base) {
  for (fs::path* p : {&corpus, &dev_corpus, &init_checkpoint, &init_vocab}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path, bool apply_env_overrides) {
  ExperimentConfig cfg = from_kv(read_config_kv(path, apply_env_overrides));
  cfg.resolve_paths(path.parent_path());
  return cfg;
}

void ExperimentConfig::write(const fs::path& path) const {
  std::ostringstream ss;
  for (const auto& [k, v] : to_kv()) ss << k << " = " << v << '\n';
  write_text(path, ss.str());
}

void ExperimentConfig::validate() const {
  if (!is_filesystem_safe_id(experiment_id)) {
    throw ConfigError("experiment_id '" + experiment_id +
                      "' must be 1-128 characters of [A-Za-z0-9._-]");
  }
  if (corpus.empty()) throw ConfigError("config is missing 'corpus'");
  if (!fs::exists(corpus)) throw ConfigError("corpus not found: " + corpus.string());
  if (!dev_corpus.empty() && !fs::exists(dev_corpus)) {
    throw ConfigError("dev_corpus not found: " + dev_corpus.string());
  }
  if (init_checkpoint.empty() != init_vocab.empty()) {
    throw ConfigError("init_checkpoint and init_vocab must be given together");
  }
  for (const auto* p : {&init_checkpoint, &init_vocab}) {
    if (!p->empty() && !fs::exists(*p)) throw ConfigError("file not found: " + p->string());
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (!(train.temperature > 0.0)) throw ConfigError("temperature must be > 0");
  train.mapk.validate();
  train.validate();
  if (phase1_epochs < 0) throw ConfigError("phase1_epochs must be >= 0");
  if (max_seq_len < 4) throw ConfigError("max_seq_len must be >= 4");
  if (max_answer_len == 0) throw ConfigError("max_answer_len must be >= 1");
  if (topk == 0) throw ConfigError("topk must be >= 1");
  if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("model dimensions must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

void ExperimentConfig::validate_against(const ParallelCorpus& corpus_data) const {
  validate();
  if (!corpus_data.has_language(source_lang)) {
    throw ConfigError("source_lang '" + source_lang + "' is not a corpus language");
  }
  const std::size_t available = corpus_data.languages().size() - 1;
  if (ntl > available) {
    throw ConfigError("ntl=" + std::to_string(ntl) + " out of range: corpus has " +
                      std::to_string(available) + " target languages");
  }
}

std::string ExperimentConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : to_kv()) {
    if (k == "output_dir" || k == "experiment_id") continue;
    canon += k + "=" + v + "\n";
  }
  for (const auto* p : {&corpus, &dev_corpus, &init_checkpoint, &init_vocab}) {
    if (!p->empty()) canon += "file:" + file_digest(*p) + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

EvalOptions ExperimentConfig::eval_options() const {
  EvalOptions o;
  o.max_seq_len = max_seq_len;
  o.max_answer_len = max_answer_len;
  o.gxlt_include_diagonal = gxlt_include_diagonal;
  return o;
}

SamplingConfig ExperimentConfig::sampling() const {
  return SamplingConfig{source_lang, ntl, derive_seed(seed, "sampling")};
}

SampleOutcome cmd_sample(const ExperimentConfig& cfg) {
  cfg.validate();
  const ParallelCorpus corpus = load_corpus(cfg.corpus);
  cfg.validate_against(corpus);
  const std::string hash = cfg.hash();
  SampleOutcome out;
  out.target_languages = sample_target_languages(corpus, cfg.sampling());
  ExampleSet set;
  set.languages = corpus.languages();
  set.examples = sample_crosslingual(corpus, cfg.sampling());
  out.count = set.examples.size();
  out.dataset = cfg.output_dir / "sample.json";
  out.manifest = cfg.output_dir / "sample_manifest.json";
  save_examples(out.dataset, set);
  const json manifest{{"experiment_id", cfg.experiment_id},
                      {"config_hash", hash},
                      {"source_lang", cfg.source_lang},
                      {"target_languages", out.target_languages},
                      {"ntl", cfg.ntl},
                      {"seed", cfg.seed},
                      {"num_seeds", corpus.size()},
                      {"count", out.count}};
  write_text(out.manifest, manifest.dump(2) + "\n");
  return out;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg, bool force) {
  cfg.validate();
  const ParallelCorpus corpus = load_corpus(cfg.corpus);
  cfg.validate_against(corpus);
  std::optional<ParallelCorpus> dev;
  if (!cfg.dev_corpus.empty()) dev = load_corpus(cfg.dev_corpus);

  const std::string hash = cfg.hash();
  TrainOutcome out;
  out.metrics = cfg.output_dir / "metrics.json";
  out.best_checkpoint = cfg.output_dir / "best.ckpt";
  out.vocab = cfg.output_dir / "vocab.txt";
  if (!force && fs::exists(out.metrics) && fs::exists(out.best_checkpoint)) {
    std::ifstream in(out.metrics);
    try {
      const json previous = json::parse(in);
      if (previous.value("config_hash", "") == hash) {
        out.skipped = true;
        if (previous.contains("best") && previous["best"].is_object()) {
          const auto& b = previous["best"];
          out.best_dev = DevScore{b.at("gxlt_f1").get<double>(), b.at("gxlt_em").get<double>(),
                                  b.at("xlt_f1").get<double>(), b.at("xlt_em").get<double>()};
        }
        return out;
      }
    } catch (const json::exception&) {
      // Unreadable previous metrics: retrain.
    }
  }
  fs::create_directories(cfg.output_dir / "checkpoints");
  const std::map<std::string, std::string> meta{{"experiment_id", cfg.experiment_id},
                                                {"config_hash", hash}};

  Vocabulary vocab;
  ModelParams init;
  if (!cfg.init_checkpoint.empty()) {
    vocab = Vocabulary::load(cfg.init_vocab);
    init = load_checkpoint(cfg.init_checkpoint).params;
    if (init.dims().vocab_size != vocab.size()) {
      throw Error("init checkpoint does not match init vocabulary size");
    }
  } else {
    vocab = build_vocab(corpus, cfg.min_freq);
    init = ModelParams::random_uniform(ModelDims{vocab.size(), cfg.embed_dim, cfg.hidden_dim},
                                       derive_seed(cfg.seed, "init"), cfg.init_scale);
  }
  vocab.save(out.vocab);

  if (cfg.init_checkpoint.empty() && cfg.phase1_epochs > 0) {
    SamplingConfig mono = cfg.sampling();
    mono.ntl = 0;
    const auto mono_features =
        featurize_all(sample_crosslingual(corpus, mono), vocab, cfg.max_seq_len);
    TrainConfig phase1 = cfg.train;
    phase1.epochs = cfg.phase1_epochs;
    phase1.weights = LossWeights{1.0, 0.0, LossMode::kCeOnly};
    phase1.rng_seed = derive_seed(cfg.seed, "phase1");
    init = train_selfdistill(init, mono_features, phase1).params;
  }

  const auto sampled_langs = sample_target_languages(corpus, cfg.sampling());
  const auto examples = sample_crosslingual(corpus, cfg.sampling());
  const auto features = featurize_all(examples, vocab, cfg.max_seq_len);
  write_text(cfg.output_dir / "sample_manifest.json",
             json{{"experiment_id", cfg.experiment_id},
                  {"config_hash", hash},
                  {"source_lang", cfg.source_lang},
                  {"target_languages", sampled_langs},
                  {"ntl", cfg.ntl},
                  {"seed", cfg.seed},
                  {"num_seeds", corpus.size()},
                  {"count", examples.size()}}
                     .dump(2) +
                 "\n");

  std::vector<QAExample> dev_examples;
  if (dev) dev_examples = expand_all_pairs(*dev);
  EvalOptions eval_opts = cfg.eval_options();
  if (dev) eval_opts.languages = dev->languages();

  TrainConfig tc = cfg.train;
  tc.rng_seed = derive_seed(cfg.seed, "train");
  TrainHooks hooks;
  hooks.on_epoch_end = [&](int epoch, const ModelParams& student) {
    save_checkpoint(cfg.output_dir / "checkpoints" / ("epoch_" + std::to_string(epoch) + ".ckpt"),
                    student, meta);
  };
  if (dev) {
    hooks.evaluate_dev = [&](const ModelParams& student) {
      return to_dev_score(evaluate(student, vocab, dev_examples, eval_opts));
    };
  }
  out.result = train_selfdistill(init, features, tc, hooks);

  const ModelParams& best = out.result.best_params ? *out.result.best_params : out.result.params;
  save_checkpoint(out.best_checkpoint, best, meta);
  {
    std::ostringstream trace;
    trace << artifact_comment(cfg.experiment_id, hash);
    write_trace_csv(trace, out.result.trace);
    write_text(cfg.output_dir / "alpha_trace.csv", trace.str());
  }

  json epochs = json::array();
  for (const auto& e : out.result.epochs) {
    json j{{"epoch", e.epoch},
           {"steps", e.steps},
           {"mean_total", e.mean_total},
           {"mean_ce", e.mean_ce},
           {"mean_kl", e.mean_kl},
           {"mean_alpha_kl", e.mean_alpha_kl}};
    if (e.dev) j["dev"] = dev_json(*e.dev);
    epochs.push_back(std::move(j));
  }
  json metrics{{"experiment_id", cfg.experiment_id},
               {"config_hash", hash},
               {"loss_mode", std::string(to_string(cfg.train.weights.mode))},
               {"ntl", cfg.ntl},
               {"temperature", cfg.train.temperature},
               {"seed", cfg.seed},
               {"train_examples", examples.size()},
               {"dropped_examples", out.result.dropped_examples},
               {"target_languages", sampled_langs},
               {"epochs", std::move(epochs)}};
  if (out.result.best_epoch) {
    const auto& dev_score = *out.result.epochs.at(static_cast<std::size_t>(*out.result.best_epoch)).dev;
    metrics["best_epoch"] = *out.result.best_epoch;
    metrics["best"] = dev_json(dev_score);
    out.best_dev = dev_score;
  } else {
    metrics["best_epoch"] = nullptr;
    metrics["best"] = nullptr;
  }
  write_text(out.metrics, metrics.dump(2) + "\n");
  return out;
}

ExampleSet load_eval_examples(const fs::path& path, bool all_pairs) {
  if (all_pairs) {
    const ParallelCorpus corpus = load_corpus(path);
    return ExampleSet{corpus.languages(), expand_all_pairs(corpus)};
  }
  return load_examples(path);
}

EvalOutcome cmd_eval(const EvalRequest& req) {
  const Checkpoint ckpt = load_checkpoint(req.checkpoint);
  const Vocabulary vocab = Vocabulary::load(req.vocab);
  if (ckpt.params.dims().vocab_size != vocab.size()) {
    throw Error("incompatible checkpoint: embedding has " +
                std::to_string(ckpt.params.dims().vocab_size) + " rows but the vocabulary has " +
                std::to_string(vocab.size()) + " entries");
  }
  const ExampleSet set = load_eval_examples(req.dataset, req.all_pairs);
  EvalOptions options = req.options;
  if (options.languages.empty()) options.languages = set.languages;

  EvalOutcome out;
  out.result = evaluate(ckpt.params, vocab, set.examples, options);
  out.topk = topk_analysis(ckpt.params, vocab, set.examples, req.topk, req.correctness, options);

  const std::string id = ckpt.metadata.count("experiment_id") ? ckpt.metadata.at("experiment_id") : "";
  const std::string hash = ckpt.metadata.count("config_hash") ? ckpt.metadata.at("config_hash") : "";
  fs::create_directories(req.output_dir);
  out.metrics = req.output_dir / "eval_metrics.json";
  out.pair_matrix = req.output_dir / "pair_matrix.csv";
  out.topk_csv = req.output_dir / "topk.csv";

  const json metrics{
      {"experiment_id", id},
      {"config_hash", hash},
      {"examples", set.examples.size()},
      {"xlt", {{"f1", round1(out.result.xlt.f1)}, {"em", round1(out.result.xlt.em)},
               {"count", out.result.xlt.count}}},
      {"gxlt", {{"f1", round1(out.result.gxlt.f1)}, {"em", round1(out.result.gxlt.em)},
                {"count", out.result.gxlt.count}}},
      {"gxlt_include_diagonal", options.gxlt_include_diagonal},
      {"pairs", pair_matrix_json(out.result.matrix)},
      {"topk", topk_json(out.topk)}};
  write_text(out.metrics, metrics.dump(2) + "\n");

  std::ostringstream pm;
  pm << artifact_comment(id, hash);
  write_pair_matrix_csv(pm, out.result.matrix);
  write_text(out.pair_matrix, pm.str());

  std::ostringstream tk;
  tk << artifact_comment(id, hash);
  write_topk_csv(tk, out.topk);
  write_text(out.topk_csv, tk.str());
  return out;
}

TopKReport cmd_topk(const EvalRequest& req) {
  const Checkpoint ckpt = load_checkpoint(req.checkpoint);
  const Vocabulary vocab = Vocabulary::load(req.vocab);
  if (ckpt.params.dims().vocab_size != vocab.size()) {
    throw Error("incompatible checkpoint and vocabulary");
  }
  const ExampleSet set = load_eval_examples(req.dataset, req.all_pairs);
  EvalOptions options = req.options;
  if (options.languages.empty()) options.languages = set.languages;
  TopKReport report = topk_analysis(ckpt.params, vocab, set.examples, req.topk, req.correctness,
                                    options);
  const std::string id = ckpt.metadata.count("experiment_id") ? ckpt.metadata.at("experiment_id") : "";
  const std::string hash = ckpt.metadata.count("config_hash") ? ckpt.metadata.at("config_hash") : "";
  std::ostringstream tk;
  tk << artifact_comment(id, hash);
  write_topk_csv(tk, report);
  write_text(req.output_dir / "topk.csv", tk.str());
  json summary = topk_json(report);
  summary["experiment_id"] = id;
  summary["config_hash"] = hash;
  write_text(req.output_dir / "topk.json", summary.dump(2) + "\n");
  return report;
}

PairMatrix cmd_delta(const fs::path& a_csv, const fs::path& b_csv, const fs::path& out_csv) {
  auto read = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p.string());
    return read_pair_matrix_csv(in);
  };
  const PairMatrix delta = matrix_delta(read(a_csv), read(b_csv));
  std::ostringstream ss;
  ss << "# delta b - a: a=" << a_csv.filename().string() << " b=" << b_csv.filename().string()
     << '\n';
  write_pair_matrix_csv(ss, delta);
  write_text(out_csv, ss.str());
  return delta;
}

void cmd_gen_synthetic(const SyntheticSpec& spec, const fs::path& out) {
  save_corpus(out, generate_synthetic(spec));
}

}  // namespace xlskd
