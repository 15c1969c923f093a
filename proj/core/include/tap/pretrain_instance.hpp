#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tap/sample.hpp"
#include "tap/tokenize.hpp"

namespace tap {

struct MaskingConfig {
  double mask_prob = 0.15;          // chance a token is selected for prediction
  double mask_token_frac = 0.8;     // of selected: replaced by the mask token
  double random_token_frac = 0.1;   // of selected: replaced by a random token
};                                  // remainder: left unchanged

struct MlmResult {
  ExtendedText masked;
  std::vector<int> positions;        // positions carrying a prediction target
  std::vector<std::string> targets;  // original token at each such position
};

// Applies the masking policy token by token. Selected tokens keep their
// original text as the target; the visible text becomes the mask token, a
// random non-reserved vocabulary token, or stays unchanged.
MlmResult apply_mlm_mask(const ExtendedText& text, const Vocabulary& vocab,
                         const MaskingConfig& config, std::mt19937_64& rng);

struct PollutionConfig {
  double pollute_prob = 0.5;
};

enum class ContrastiveLabel { Matched = 0, Polluted = 1 };

struct PollutionResult {
  Sample sample;
  ContrastiveLabel label = ContrastiveLabel::Matched;
  std::optional<Segment> polluted_segment;
};

// With probability pollute_prob, replaces one whole text segment (chosen
// uniformly among the segments the sample actually has) with the same segment
// from a different image in `pool`. Regions and their features are untouched:
// pollution breaks the text-image correspondence only. Throws
// std::runtime_error("pollution pool exhausted") when no donor with a
// different image_id exists.
PollutionResult apply_pollution(const Sample& sample, const std::vector<Sample>& pool,
                                const PollutionConfig& config, std::mt19937_64& rng);

struct RegionPredictionConfig {
  int classes = 12;  // 12-way relative position, or 2 for the binary "on" task
  RelationThresholds thresholds;
};

struct RegionPredictionPair {
  bool valid = false;
  int object_index = -1;
  int scene_text_index = -1;
  int label = -1;
};

// Picks one (object, scene text) pair uniformly and labels their relation.
// Invalid (valid == false) when either region list is empty.
RegionPredictionPair sample_region_pair(const Sample& sample,
                                        const RegionPredictionConfig& config,
                                        std::mt19937_64& rng);

struct PretrainTaskConfig {
  MaskingConfig masking;
  PollutionConfig pollution;
  RegionPredictionConfig region_prediction;
};

// One assembled pre-training instance. Pollution is decided first; masking is
// applied only to matched instances, so a polluted instance never carries
// masked-token targets.
struct PretrainInstance {
  Sample sample;                     // text possibly polluted and/or masked
  std::vector<int> mask_positions;
  std::vector<std::string> mask_targets;
  ContrastiveLabel contrastive_label = ContrastiveLabel::Matched;
  std::optional<Segment> polluted_segment;
  RegionPredictionPair region_pair;
};

PretrainInstance build_pretrain_instance(const Sample& sample,
                                         const std::vector<Sample>& pool,
                                         const Vocabulary& vocab,
                                         const PretrainTaskConfig& config,
                                         std::mt19937_64& rng);

}  // namespace tap
