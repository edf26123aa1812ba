// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/checkpoint.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gcnllm {

namespace {

constexpr std::string_view kMagic = "GCNLLM v1";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_line(const ModelConfig &c) {
  std::ostringstream os;
  os << "config node_feat_dim=" << c.node_feat_dim << " embed_dim=" << c.embed_dim
     << " proj_dim=" << c.proj_dim << " hidden=" << c.hidden
     << " n_conv_layers=" << c.n_conv_layers << " n_classes=" << c.n_classes
     << " dropout_p=" << fmt_double(c.dropout_p) << " bn_eps=" << fmt_double(c.bn_eps)
     << " bn_momentum=" << fmt_double(c.bn_momentum)
     << " fusion_mode=" << to_string(c.fusion_mode)
     << " block_order=" << to_string(c.block_order);
  return os.str();
}

ModelConfig parse_config_line(const std::string &line) {
  std::istringstream is(line);
  std::string word;
  is >> word;
  if (word != "config") throw CheckpointError("checkpoint: expected config line");
  std::map<std::string, std::string> kv;
  while (is >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw CheckpointError("checkpoint: bad config token " + word);
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  const auto get = [&](const char *k) -> const std::string & {
    const auto it = kv.find(k);
    if (it == kv.end()) throw CheckpointError(std::string("checkpoint: missing config key ") + k);
    return it->second;
  };
  ModelConfig c;
  try {
    c.node_feat_dim = std::stoi(get("node_feat_dim"));
    c.embed_dim = std::stoi(get("embed_dim"));
    c.proj_dim = std::stoi(get("proj_dim"));
    c.hidden = std::stoi(get("hidden"));
    c.n_conv_layers = std::stoi(get("n_conv_layers"));
    c.n_classes = std::stoi(get("n_classes"));
    c.dropout_p = std::stod(get("dropout_p"));
    c.bn_eps = std::stod(get("bn_eps"));
    c.bn_momentum = std::stod(get("bn_momentum"));
    c.fusion_mode = parse_fusion_mode(get("fusion_mode"));
    c.block_order = parse_block_order(get("block_order"));
  } catch (const CheckpointError &) {
    throw;
  } catch (const std::exception &e) {
    throw CheckpointError(std::string("checkpoint: bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void put_le(std::string &out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffU));
    bits >>= 8;
  }
}

double get_le(const char *p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint &ckpt) {
  check_shapes(ckpt.params, ckpt.config);
  const auto arrays = all_arrays(ckpt.params);
  std::string out;
  out += kMagic;
  out += '\n';
  out += config_line(ckpt.config) + '\n';
  out += "seed " + std::to_string(ckpt.seed) + '\n';
  out += "arrays " + std::to_string(arrays.size()) + '\n';
  for (const ConstArrayView &a: arrays) {
    out += a.name + ' ' + std::to_string(a.rows) + ' ' + std::to_string(a.cols) + '\n';
  }
  out += "end\n";
  for (const ConstArrayView &a: arrays) {
    for (double v: a.values) put_le(out, v);
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  std::size_t pos = 0;
  const auto line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) throw CheckpointError("checkpoint: truncated header");
    std::string s(bytes.substr(pos, end - pos));
    pos = end + 1;
    return s;
  };
  if (line() != kMagic) throw CheckpointError("checkpoint: missing 'GCNLLM v1' magic");

  Checkpoint ckpt;
  ckpt.config = parse_config_line(line());
  {
    std::istringstream is(line());
    std::string word;
    is >> word >> ckpt.seed;
    if (word != "seed" || !is) throw CheckpointError("checkpoint: expected seed line");
  }
  std::size_t count = 0;
  {
    std::istringstream is(line());
    std::string word;
    is >> word >> count;
    if (word != "arrays" || !is) throw CheckpointError("checkpoint: expected arrays line");
  }

  ckpt.params = zeros_like(ckpt.config);
  auto arrays = all_arrays(ckpt.params);
  if (count != arrays.size()) {
    throw CheckpointError("checkpoint: " + std::to_string(count) + " arrays, config expects "
                          + std::to_string(arrays.size()));
  }
  for (const ArrayView &a: arrays) {
    std::istringstream is(line());
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    is >> name >> rows >> cols;
    if (!is || name != a.name || rows != a.rows || cols != a.cols) {
      throw CheckpointError("checkpoint: shape mismatch for " + a.name + ": file has '"
                            + name + " " + std::to_string(rows) + " "
                            + std::to_string(cols) + "', expected "
                            + std::to_string(a.rows) + "x" + std::to_string(a.cols));
    }
  }
  if (line() != "end") throw CheckpointError("checkpoint: expected 'end' after header");

  std::size_t total = 0;
  for (const ArrayView &a: arrays) total += a.values.size();
  if (bytes.size() - pos != total * 8) {
    throw CheckpointError("checkpoint: binary section has " + std::to_string(bytes.size() - pos)
                          + " bytes, expected " + std::to_string(total * 8));
  }
  for (const ArrayView &a: arrays) {
    for (double &v: a.values) {
      v = get_le(bytes.data() + pos);
      pos += 8;
    }
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace gcnllm
