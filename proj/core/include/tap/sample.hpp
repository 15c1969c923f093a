#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/phoc.hpp"
#include "tap/word_vectors.hpp"

namespace tap {

// Segment of the extended text input: question words, object label words,
// scene-text words — concatenated in that order.
enum class Segment { Question = 0, ObjectLabels = 1, SceneText = 2 };
inline constexpr int kNumSegments = 3;

const char* to_string(Segment s);

struct ExtendedToken {
  std::string text;
  Segment segment;
};

// The assembled token sequence. Tokens carry their segment; a token's position
// is its index in `tokens`. Scene-text tokens map 1:1 onto scene-text regions,
// in order, so token i of the scene-text span corresponds to region i.
struct ExtendedText {
  std::vector<ExtendedToken> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  int count(Segment s) const;
  // First position of the segment (positions are contiguous per segment).
  int offset(Segment s) const;
  std::vector<std::string> segment_tokens(Segment s) const;
};

struct TextCaps {
  int max_question = 20;
  int max_object_labels = 100;
  int max_scene_text = 100;
};

// Builds the extended text: tokenized question, then tokenized object labels,
// then one normalized token per scene-text word. Each part is truncated to its
// cap, keeping order. scene_text_words must already be one entry per region.
ExtendedText assemble_extended_text(const std::string& question,
                                    const std::vector<std::string>& object_labels,
                                    const std::vector<std::string>& scene_text_words,
                                    const TextCaps& caps = {});

struct ObjectRegion {
  std::string label;
  BoundingBox box;
  Eigen::VectorXd visual;     // detector appearance feature
  std::string feature_tag;    // provenance tag when `visual` was synthesized
};

struct SceneTextRegion {
  std::string word;           // raw recognized word
  BoundingBox box;
  Eigen::VectorXd visual;     // detector appearance feature for the region
  Eigen::VectorXd word_vec;   // fixed word embedding of the recognized word
  PhocVector phoc;            // character-shape descriptor of the word
  std::string feature_tag;
};

// One training/eval unit: an image's regions plus its text. In caption mode
// the question is empty and `caption` is set; in QA mode `answers` holds the
// usual ten reference answers.
struct Sample {
  std::string image_id;
  std::string question;
  std::vector<ObjectRegion> objects;
  std::vector<SceneTextRegion> scene_text;
  std::optional<std::vector<std::string>> answers;
  std::optional<std::string> caption;
  ExtendedText extended_text;
};

// Assembles extended_text from the raw fields and validates the invariants
// (scene-text tokens 1:1 with regions after the cap, consistent feature dims).
Sample make_sample(std::string image_id, std::string question,
                   std::vector<ObjectRegion> objects,
                   std::vector<SceneTextRegion> scene_text,
                   std::optional<std::vector<std::string>> answers,
                   std::optional<std::string> caption, const TextCaps& caps = {});

// Controls how region features are reconstituted when a dataset row carries a
// feature tag instead of literal numbers.
struct FeatureConfig {
  int visual_dim = 64;
  int word_vector_dim = 64;
  std::string word_vector_provider = "hash";
  TextCaps caps;
};

// Deterministic stand-in appearance feature for a tagged region.
Eigen::VectorXd synthesize_visual_feature(const std::string& tag, int dim);

// JSONL dataset io. Each line is one sample record with a schema_version
// field; loading rejects unknown versions. Region rows may carry either a
// literal "visual" array or a "feature_tag" to synthesize one.
void save_dataset(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> load_dataset(const std::string& path, const FeatureConfig& config);

inline constexpr int kDatasetSchemaVersion = 1;

}  // namespace tap
