#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/sample.hpp"

namespace tap {

// Ground-truth correspondences inside one sample: extended-text tokens that
// spell a scene-text region's word (both directions), and objects that a
// scene-text region sits on (both directions).
enum class CorefKind {
  WordToSceneText = 0,
  SceneTextToWord = 1,
  ObjectToSceneText = 2,
  SceneTextToObject = 3,
};
inline constexpr int kNumCorefKinds = 4;

const char* to_string(CorefKind kind);

struct CorefPair {
  CorefKind kind;
  int source = 0;  // text position, object index, or region index per kind
  int target = 0;
};

// Text <-> region pairs by exact token match (the extended text stores
// normalized tokens; region words are normalized before comparison); object
// <-> region pairs where the region is On the object.
std::vector<CorefPair> find_corresponded_pairs(const Sample& sample,
                                               const RelationThresholds& thresholds = {});

// Attention maps of the fusion stack for one sample: [layer][head], each a
// square row-stochastic matrix over [text | objects | scene text | decode].
using AttentionMaps = std::vector<std::vector<Eigen::MatrixXd>>;

struct RowLayout {
  int text_rows = 0;
  int object_rows = 0;
  int scene_text_rows = 0;

  int object_offset() const { return text_rows; }
  int scene_text_offset() const { return text_rows + object_rows; }
};

// Attention between the pair's rows, maximized over every layer and head.
double pair_attention(const AttentionMaps& maps, const RowLayout& layout,
                      const CorefPair& pair);

// Running mean of pair attention per correspondence kind.
struct CorefAccumulator {
  double sum[kNumCorefKinds] = {0, 0, 0, 0};
  long count[kNumCorefKinds] = {0, 0, 0, 0};

  void add(const AttentionMaps& maps, const RowLayout& layout,
           const std::vector<CorefPair>& pairs);
  double mean(CorefKind kind) const;
  bool has(CorefKind kind) const { return count[static_cast<int>(kind)] > 0; }
};

}  // namespace tap
