// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcnllm/model.h"
#include "gcnllm/trainer.h"

namespace gcnllm {

class ConfigError: public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

struct ConfigKey {
  std::string name;
  std::string description;
};

// Every addressable key with its default rendered in the description.
std::vector<ConfigKey> config_keys();

// Sets one key. Unknown keys and malformed values throw ConfigError.
void apply_setting(RunConfig &rc, std::string_view key, std::string_view value);

// `key = value` lines; `#` starts a comment; blank lines are ignored.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

RunConfig load_run_config(const std::filesystem::path &path);

// Applies `key=value` overrides on top of `rc`.
void apply_overrides(RunConfig &rc, const std::vector<std::string> &overrides);

std::string format_run_config(const RunConfig &rc);

}  // namespace gcnllm
