#pragma once

#include <stdexcept>
#include <string>

namespace xlskd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by dataset loaders. Carries the offending seed id and language when
// the failure can be pinned to one record.
class CorpusError : public Error {
 public:
  CorpusError(const std::string& message, std::string seed_id = {},
              std::string lang = {})
      : Error(format(message, seed_id, lang)),
        seed_id_(std::move(seed_id)),
        lang_(std::move(lang)) {}

  const std::string& seed_id() const { return seed_id_; }
  const std::string& lang() const { return lang_; }

 private:
  static std::string format(const std::string& message,
                            const std::string& seed_id,
                            const std::string& lang) {
    std::string out = message;
    if (!seed_id.empty()) out += " [seed_id=" + seed_id + "]";
    if (!lang.empty()) out += " [lang=" + lang + "]";
    return out;
  }

  std::string seed_id_;
  std::string lang_;
};

// Invalid experiment or CLI configuration. Maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace xlskd
