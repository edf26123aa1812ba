// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gcnllm/model.h"

namespace gcnllm {

class CheckpointError: public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::uint64_t seed = 0;
};

// `GCNLLM v1` text header (config, seed, one `name rows cols` line per array in
// all_arrays() order, `end`), then the arrays as little-endian float64,
// row-major, concatenated in header order.
std::string serialize_checkpoint(const Checkpoint &ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace gcnllm
