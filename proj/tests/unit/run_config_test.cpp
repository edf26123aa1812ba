// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "gcnllm/run_config.h"

namespace gcnllm {
namespace {

TEST(RunConfig, ParsesKeyValueLinesWithComments) {
  const auto kv = parse_config_text("# header\nhidden = 32  # trailing\n\n  seed=7\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "hidden");
  EXPECT_EQ(kv[0].second, "32");
  EXPECT_EQ(kv[1].second, "7");
  EXPECT_THROW(parse_config_text("hidden 32\n"), ConfigError);
}

TEST(RunConfig, AppliesAndOverrides) {
  RunConfig rc;
  for (const auto &[k, v]: parse_config_text("hidden = 32\nfusion_mode = none\nshuffle = false\n")) {
    apply_setting(rc, k, v);
  }
  apply_overrides(rc, { "hidden=16", "learning_rate=0.01" });
  EXPECT_EQ(rc.model.hidden, 16);
  EXPECT_EQ(rc.model.fusion_mode, FusionMode::kNone);
  EXPECT_FALSE(rc.train.shuffle);
  EXPECT_EQ(rc.train.learning_rate, 0.01);
}

TEST(RunConfig, UnknownKeysAndBadValuesAreErrors) {
  RunConfig rc;
  EXPECT_THROW(apply_setting(rc, "hiden", "3"), ConfigError);
  EXPECT_THROW(apply_setting(rc, "hidden", "3.5"), ConfigError);
  EXPECT_THROW(apply_setting(rc, "shuffle", "maybe"), ConfigError);
  EXPECT_THROW(apply_setting(rc, "fusion_mode", "late"), ConfigError);
  EXPECT_THROW(apply_overrides(rc, { "hidden" }), ConfigError);
}

TEST(RunConfig, EveryDefaultIsAddressableAndRoundTrips) {
  const RunConfig defaults;
  const std::string text = format_run_config(defaults);
  RunConfig back;
  back.model.hidden = 3;
  back.train.seed = 99;
  for (const auto &[k, v]: parse_config_text(text)) apply_setting(back, k, v);
  EXPECT_EQ(format_run_config(back), text);
  std::vector<std::string> names;
  for (const auto &k: config_keys()) names.push_back(k.name);
  for (const char *want: { "learning_rate", "batch_size", "max_epochs", "patience",
                           "val_fraction", "seed", "shuffle", "hidden", "dropout",
                           "embed_dim", "proj_dim", "n_conv_layers", "bn_eps", "bn_momentum",
                           "fusion_mode", "block_order", "class_weighting" }) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
}

}  // namespace
}  // namespace gcnllm
