#include "tap/run_config.hpp"

#include <string>

#include <gtest/gtest.h>

#include "testing.hpp"

namespace {

using tap::ConfigError;
using tap::lr_at;
using tap::RunConfig;
using tap::TrainingConfig;

TEST(RunConfig, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.model.hidden % c.model.heads, 0);
  EXPECT_EQ(c.tasks.region_prediction.classes, c.model.region_classes);
  EXPECT_EQ(c.features.caps.max_question + c.features.caps.max_object_labels +
                c.features.caps.max_scene_text,
            220);
}

TEST(LrSchedule, ReferenceShape) {
  // The reference schedule: base 1e-4, warmup from 0.2x over the first 2k
  // iterations, tenfold decays at 14k and 19k.
  TrainingConfig t;
  t.base_lr = 1e-4;
  t.warmup_factor = 0.2;
  t.warmup_iters = 2000;
  t.decay_steps = {14000, 19000};
  t.decay_factor = 0.1;
  t.max_iters = 24000;

  EXPECT_DOUBLE_EQ(lr_at(t, 0), 0.2 * 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(t, 2000), 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(t, 8000), 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(t, 13999), 1e-4);
  EXPECT_NEAR(lr_at(t, 14000), 1e-5, 1e-15);
  EXPECT_NEAR(lr_at(t, 18999), 1e-5, 1e-15);
  EXPECT_NEAR(lr_at(t, 19000), 1e-6, 1e-15);
  EXPECT_NEAR(lr_at(t, 23999), 1e-6, 1e-15);

  // Warmup is linear: halfway through it sits halfway between.
  EXPECT_NEAR(lr_at(t, 1000), 0.5 * (0.2 * 1e-4 + 1e-4), 1e-15);
}

TEST(LrSchedule, MonotoneDuringWarmupAndNonIncreasingAfter) {
  const TrainingConfig t;  // desk defaults
  for (int i = 1; i < t.warmup_iters; ++i) {
    EXPECT_GT(lr_at(t, i), lr_at(t, i - 1));
  }
  for (int i = t.warmup_iters + 1; i < t.max_iters; ++i) {
    EXPECT_LE(lr_at(t, i), lr_at(t, i - 1));
  }
}

TEST(RunConfigJson, RoundTripAndDigestStability) {
  RunConfig c;
  const std::string text = c.to_json();
  const RunConfig back = RunConfig::from_json_text(text);
  EXPECT_EQ(back.to_json(), text);
  EXPECT_EQ(back.digest(), c.digest());

  RunConfig tweaked = RunConfig::from_json_text(R"({"training":{"seed":99}})");
  EXPECT_NE(tweaked.digest(), c.digest());
  EXPECT_EQ(tweaked.training.seed, 99u);
}

TEST(RunConfigJson, UnknownKeysAreErrors) {
  EXPECT_THROW(RunConfig::from_json_text(R"({"training":{"lr":1}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json_text(R"({"typo_section":{}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json_text(R"({"features":{"caps":{"max_q":5}}})"),
               ConfigError);
  try {
    RunConfig::from_json_text(R"({"model":{"depth":3}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.depth"), std::string::npos);
  }
}

TEST(RunConfigJson, RegionClassOverrideKeepsTasksInSync) {
  const RunConfig c = RunConfig::from_json_text(R"({"model":{"region_classes":2}})");
  EXPECT_EQ(c.model.region_classes, 2);
  EXPECT_EQ(c.tasks.region_prediction.classes, 2);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfigJson, RelationOverridesReachTheRegionTask) {
  const RunConfig c = RunConfig::from_json_text(
      R"({"relations":{"overlap_iou":0.25,"unrelated_distance":2.0}})");
  EXPECT_DOUBLE_EQ(c.relations.overlap_iou, 0.25);
  EXPECT_DOUBLE_EQ(c.tasks.region_prediction.thresholds.overlap_iou, 0.25);
  EXPECT_DOUBLE_EQ(c.tasks.region_prediction.thresholds.unrelated_distance, 2.0);
}

TEST(RunConfigJson, MalformedTextIsAConfigError) {
  EXPECT_THROW(RunConfig::from_json_text("not json"), ConfigError);
  EXPECT_THROW(RunConfig::from_json_text("[1,2,3]"), ConfigError);
}

TEST(RunConfigValidation, RejectsBadShapes) {
  RunConfig c;
  c.model.hidden = 50;
  c.model.heads = 12;
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.model.region_classes = 5;
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.features.caps.max_scene_text = 500;
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.tasks.masking.mask_token_frac = 0.8;
  c.tasks.masking.random_token_frac = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.tasks.region_prediction.classes = 2;  // model stays at 12
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunConfigValidation, RejectsBadSchedules) {
  RunConfig c;
  c.training.decay_steps = {190, 140};
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.training.decay_steps = {100, 100};
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.training.decay_steps = {9999};
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.training.eval_interval = 0;
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.training.precision = "bfloat16";
  EXPECT_THROW(c.validate(), ConfigError);

  c = RunConfig{};
  c.training.pretrain_fraction = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunConfigFiles, SaveLoadRoundTrip) {
  tap::testing::TempDir dir;
  RunConfig c = RunConfig::from_json_text(
      R"({"model":{"hidden":48,"heads":4},"training":{"seed":7}})");
  const std::string path = dir.file("config.json");
  c.save(path);
  const RunConfig loaded = RunConfig::load(path);
  EXPECT_EQ(loaded.digest(), c.digest());
  EXPECT_EQ(loaded.model.hidden, 48);
  EXPECT_EQ(loaded.training.seed, 7u);

  EXPECT_THROW(RunConfig::load(dir.file("missing.json")), ConfigError);
}

TEST(RunConfigFiles, ShippedPresetsParse) {
  const RunConfig full = RunConfig::load(std::string(TAP_DATA_DIR) +
                                         "/../configs/full_scale.json");
  EXPECT_NO_THROW(full.validate());
  EXPECT_EQ(full.training.warmup_iters, 2000);
  EXPECT_EQ(full.training.decay_steps, (std::vector<int>{14000, 19000}));
  EXPECT_EQ(full.model.hidden, 768);

  const RunConfig small = RunConfig::load(std::string(TAP_DATA_DIR) +
                                          "/../configs/desk_small.json");
  EXPECT_NO_THROW(small.validate());
  EXPECT_LT(small.model.hidden, 100);
}

}  // namespace
