#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/pretrain_instance.hpp"
#include "tap/sample.hpp"

namespace tap {

// Configuration problems are reported with this type so callers can separate
// "bad invocation" from runtime failures.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  int text_layers = 3;
  int mm_layers = 4;
  int hidden = 768;
  int heads = 12;
  int ffn_mult = 4;
  double dropout = 0.1;
  int max_positions = 220;     // extended-text position table size
  int max_decode_steps = 12;   // decode-slot table size (12 QA, 30 caption)
  int region_classes = 12;     // 12-way relative position or 2-way "on"

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct LossWeights {
  double masked_token = 1.0;
  double contrastive = 1.0;
  double region = 1.0;
  double answer = 1.0;
};

// Defaults are desk scale: batch and iteration counts shrunk ~100x from the
// reference schedule, whose full numbers ship as configs/full_scale.json.
// Learning-rate shape (base, warmup factor, decay factor) is scale-free.
struct TrainingConfig {
  int batch_size = 8;
  double base_lr = 1e-4;
  double warmup_factor = 0.2;
  int warmup_iters = 20;
  std::vector<int> decay_steps = {140, 190};
  double decay_factor = 0.1;
  int max_iters = 240;
  double clip_norm = 0.25;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int eval_interval = 50;
  int checkpoint_interval = 50;
  int log_interval = 10;
  double pretrain_fraction = 0.5;  // joint training: chance a slot trains the
                                   // pre-training losses instead of the answer loss
  int eval_samples = 64;           // holdout size when no eval dataset is given
  std::uint64_t seed = 13;
  std::string precision = "float32";  // or "float64"

  void validate() const;
};

// Everything a run needs, assembled from built-in defaults plus an optional
// JSON config file. Unknown keys anywhere in the file are an error.
struct RunConfig {
  FeatureConfig features;
  ModelConfig model;
  PretrainTaskConfig tasks;
  LossWeights loss_weights;
  RelationThresholds relations;
  TrainingConfig training;

  void validate() const;

  // Canonical JSON of the effective config (defaults merged with overrides).
  std::string to_json() const;
  // Stable digest of to_json(); recorded in manifests and checkpoints.
  std::uint64_t digest() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

// Learning-rate schedule: linear warmup from warmup_factor * base_lr to
// base_lr over warmup_iters, then a step decay by decay_factor at each entry
// of decay_steps.
double lr_at(const TrainingConfig& config, int iteration);

}  // namespace tap
