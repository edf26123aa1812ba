// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/run_config.h"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>

#include "gcnllm/csv.h"

namespace gcnllm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char *what) {
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value)
                    + "' is not " + what);
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string buf(v);
  char *end = nullptr;
  const double out = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Entry {
  const char *description;
  std::function<void(RunConfig &, std::string_view, std::string_view)> set;
  std::function<std::string(const RunConfig &)> get;
};

#define INT_KEY(obj, field, desc)                                                 \
  Entry { desc,                                                                   \
          [](RunConfig &rc, std::string_view k, std::string_view v) {             \
            rc.obj.field = to_int(k, v);                                          \
          },                                                                      \
          [](const RunConfig &rc) { return std::to_string(rc.obj.field); } }
#define DBL_KEY(obj, field, desc)                                                 \
  Entry { desc,                                                                   \
          [](RunConfig &rc, std::string_view k, std::string_view v) {             \
            rc.obj.field = to_double(k, v);                                       \
          },                                                                      \
          [](const RunConfig &rc) { return num(rc.obj.field); } }
#define BOOL_KEY(obj, field, desc)                                                \
  Entry { desc,                                                                   \
          [](RunConfig &rc, std::string_view k, std::string_view v) {             \
            rc.obj.field = to_bool(k, v);                                         \
          },                                                                      \
          [](const RunConfig &rc) { return std::string(rc.obj.field ? "true" : "false"); } }

const std::map<std::string, Entry, std::less<>> &registry() {
  static const std::map<std::string, Entry, std::less<>> r = {
    { "embed_dim", INT_KEY(model, embed_dim, "embedding width (768)") },
    { "proj_dim", INT_KEY(model, proj_dim, "projected embedding width (10)") },
    { "hidden", INT_KEY(model, hidden, "hidden width of every layer (64)") },
    { "n_conv_layers", INT_KEY(model, n_conv_layers, "number of graph convolutions (6)") },
    { "n_classes", INT_KEY(model, n_classes, "output classes (2)") },
    { "dropout", DBL_KEY(model, dropout_p, "dropout probability after fc1 (0.5)") },
    { "bn_eps", DBL_KEY(model, bn_eps, "batch-norm epsilon (1e-5)") },
    { "bn_momentum", DBL_KEY(model, bn_momentum, "batch-norm running-average momentum (0.1)") },
    { "fusion_mode",
      Entry { "per_layer | final_only | none (per_layer)",
              [](RunConfig &rc, std::string_view k, std::string_view v) {
                try {
                  rc.model.fusion_mode = parse_fusion_mode(v);
                } catch (const std::invalid_argument &) {
                  bad_value(k, v, "a fusion mode");
                }
              },
              [](const RunConfig &rc) { return std::string(to_string(rc.model.fusion_mode)); } } },
    { "block_order",
      Entry { "conv_bn_relu | conv_relu_bn (conv_bn_relu)",
              [](RunConfig &rc, std::string_view k, std::string_view v) {
                try {
                  rc.model.block_order = parse_block_order(v);
                } catch (const std::invalid_argument &) {
                  bad_value(k, v, "a block order");
                }
              },
              [](const RunConfig &rc) { return std::string(to_string(rc.model.block_order)); } } },
    { "learning_rate", DBL_KEY(train, learning_rate, "Adam step size (0.001)") },
    { "batch_size", INT_KEY(train, batch_size, "graphs per step, >= 2 (32)") },
    { "max_epochs", INT_KEY(train, max_epochs, "epoch limit (100)") },
    { "patience", INT_KEY(train, patience, "epochs without val F1 gain before stopping (10)") },
    { "val_fraction", DBL_KEY(train, val_fraction, "validation share of the train split (0.1)") },
    { "train_ratio", DBL_KEY(train, train_ratio, "train share of the train/test split (0.8)") },
    { "seed",
      Entry { "seed for split, init, shuffling and dropout (0)",
              [](RunConfig &rc, std::string_view k, std::string_view v) {
                rc.train.seed = to_u64(k, v);
              },
              [](const RunConfig &rc) { return std::to_string(rc.train.seed); } } },
    { "shuffle", BOOL_KEY(train, shuffle, "reshuffle training data every epoch (true)") },
    { "class_weighting",
      BOOL_KEY(train, class_weighting, "inverse-frequency class weights in the loss (false)") },
    { "record_time",
      BOOL_KEY(train, record_time, "write wall-clock seconds to the history CSV (false)") },
    { "eval_batch_size", INT_KEY(train, eval_batch_size, "graphs per evaluation batch (256)") },
    { "adam_beta1", DBL_KEY(train, adam_beta1, "Adam first-moment decay (0.9)") },
    { "adam_beta2", DBL_KEY(train, adam_beta2, "Adam second-moment decay (0.999)") },
    { "adam_eps", DBL_KEY(train, adam_eps, "Adam denominator epsilon (1e-8)") },
  };
  return r;
}

#undef INT_KEY
#undef DBL_KEY
#undef BOOL_KEY

}  // namespace

std::vector<ConfigKey> config_keys() {
  std::vector<ConfigKey> out;
  for (const auto &[name, e]: registry()) out.push_back({ name, e.description });
  return out;
}

void apply_setting(RunConfig &rc, std::string_view key, std::string_view value) {
  const auto it = registry().find(trim(key));
  if (it == registry().end()) {
    throw ConfigError("unknown config key '" + std::string(trim(key)) + "'");
  }
  it->second.set(rc, it->first, trim(value));
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  RunConfig rc;
  for (const auto &[k, v]: parse_config_text(read_file(path))) apply_setting(rc, k, v);
  return rc;
}

void apply_overrides(RunConfig &rc, const std::vector<std::string> &overrides) {
  for (const std::string &o: overrides) {
    const std::size_t eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    apply_setting(rc, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
  }
}

std::string format_run_config(const RunConfig &rc) {
  std::string out;
  for (const auto &[name, e]: registry()) out += name + " = " + e.get(rc) + "\n";
  return out;
}

}  // namespace gcnllm
