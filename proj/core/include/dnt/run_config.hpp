#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dnt/train.hpp"

namespace dnt {

/// Everything a CLI run needs, as one flat JSON object. `seed` is the root
/// seed; per-sequence world seeds are derived from it.
struct RunConfig {
  TrainConfig train{};
  std::string out_dir = "out";
  std::string eval_set;  // directory of SEQ1 files; empty: generate held-out worlds
};

struct ConfigKey {
  std::string name;
  std::string default_value;  // JSON text
  std::string description;
};

/// The documented keys, in a stable order, with their defaults.
const std::vector<ConfigKey>& config_keys();

/// Strict parse: unknown keys, wrong types and invalid values throw
/// ConfigError naming the key. Missing keys keep their defaults.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON (sorted keys, fixed formatting); its fingerprint() is the
/// checkpoint's config fingerprint.
std::string to_json(const RunConfig& config);

}  // namespace dnt
