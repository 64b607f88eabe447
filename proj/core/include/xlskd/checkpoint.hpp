#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "xlskd/model.hpp"

namespace xlskd {

// Text checkpoint: a versioned header, free-form metadata, then every tensor
// with its name and shape followed by shortest round-trip decimal values.
// Reloading reproduces the parameters bit-exactly.
struct Checkpoint {
  ModelParams params;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const std::map<std::string, std::string>& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xlskd
