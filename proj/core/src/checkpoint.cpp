#include "xlskd/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "xlskd/error.hpp"

namespace xlskd {
namespace {

constexpr const char* kMagic = "xlskd-checkpoint";
constexpr int kFormatVersion = 1;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw Error("checkpoint " + path.string() + ": " + what);
}

std::size_t parse_size(const std::filesystem::path& path, const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(path, "bad integer '" + s + "'");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const std::map<std::string, std::string>& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << kMagic << ' ' << kFormatVersion << '\n';
  for (const auto& [k, v] : metadata) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error("checkpoint metadata must be single-line, key without spaces: " + k);
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  const auto& dims = params.dims();
  out << "dims " << dims.vocab_size << ' ' << dims.embed_dim << ' ' << dims.hidden_dim << '\n';
  char buf[64];
  for (std::size_t t = 0; t < params.layout().size(); ++t) {
    const auto& info = params.layout()[t];
    out << "tensor " << info.name << ' ' << info.shape.size();
    for (auto s : info.shape) out << ' ' << s;
    out << '\n';
    const std::size_t row = info.shape.back();
    const auto values = params.tensor(static_cast<TensorSet::Index>(t));
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), values[i]);
      out.write(buf, ptr - buf);
      out.put((i + 1) % row == 0 ? '\n' : ' ');
    }
  }
  out << "end\n";
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) fail(path, "not a checkpoint file");
  if (version != kFormatVersion) fail(path, "unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  std::string line;
  std::getline(in, line);
  bool have_dims = false;
  std::size_t next_tensor = 0;
  bool have_end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.metadata[key] = value;
    } else if (kind == "dims") {
      std::string v, d, h;
      ls >> v >> d >> h;
      ckpt.params = ModelParams(
          ModelDims{parse_size(path, v), parse_size(path, d), parse_size(path, h)});
      have_dims = true;
    } else if (kind == "tensor") {
      if (!have_dims) fail(path, "tensor before dims");
      if (next_tensor >= ckpt.params.layout().size()) fail(path, "too many tensors");
      const auto& info = ckpt.params.layout()[next_tensor];
      std::string name, rank_s;
      ls >> name >> rank_s;
      if (name != info.name) fail(path, "expected tensor '" + info.name + "', found '" + name + "'");
      const std::size_t rank = parse_size(path, rank_s);
      std::vector<std::size_t> shape(rank);
      for (auto& s : shape) {
        std::string tok;
        ls >> tok;
        s = parse_size(path, tok);
      }
      if (shape != info.shape) fail(path, "shape mismatch for tensor '" + name + "'");
      auto values = ckpt.params.tensor(static_cast<TensorSet::Index>(next_tensor));
      std::string tok;
      for (auto& v : values) {
        if (!(in >> tok)) fail(path, "truncated tensor '" + name + "'");
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          fail(path, "bad value '" + tok + "' in tensor '" + name + "'");
        }
      }
      ++next_tensor;
    } else if (kind == "end") {
      have_end = true;
      break;
    } else {
      fail(path, "unexpected record '" + kind + "'");
    }
  }
  if (!have_dims || next_tensor != TensorSet::kNumTensors || !have_end) {
    fail(path, "incomplete checkpoint");
  }
  if (!ckpt.params.all_finite()) fail(path, "non-finite parameter values");
  return ckpt;
}

}  // namespace xlskd
