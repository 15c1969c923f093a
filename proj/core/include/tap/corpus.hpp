#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/sample.hpp"

namespace tap {

// One recognized word in a raw captioned-image record.
struct RawSceneText {
  std::string word;
  BoundingBox box;
  bool watermark_flag = false;  // upstream detector's own verdict, if any
};

struct RawObject {
  std::string label;
  BoundingBox box;
  std::string feature_tag;  // expanded to a visual feature at load time
};

struct RawImageRecord {
  std::string image_id;
  std::string caption;
  std::vector<RawObject> objects;
  std::vector<RawSceneText> scene_text;
};

enum class FilterReason { Kept = 0, NoText = 1, WatermarkOnly = 2, TinyOnly = 3 };
const char* to_string(FilterReason reason);

struct FilterRules {
  // A word counts as watermark when flagged upstream or when its lowercase
  // form contains any of these substrings.
  std::vector<std::string> watermark_patterns = {
      "shutterstock", "alamy",  "gettyimages", "istock",  "dreamstime",
      "123rf",        "fotolia", "depositphotos", "watermark", "copyright",
      "www.",         ".com",   ".net",        ".org",    "http",
  };
  double tiny_height = 0.02;  // of image height
};

bool is_watermark_word(const RawSceneText& text, const FilterRules& rules);

// Keeps an image only if it has scene text that is neither watermark boilerplate
// nor uniformly tiny. Checks run in order: no text at all, watermark-only,
// tiny-only (measured on the non-watermark words), else kept.
FilterReason filter_image(const RawImageRecord& record, const FilterRules& rules);

struct CorpusBuildResult {
  std::vector<Sample> samples;
  std::map<FilterReason, long> reason_counts;
  long malformed = 0;
};

// Reads raw records (JSONL), filters them, and assembles captioned samples
// (the caption doubles as the question text so every text segment is
// populated). Malformed lines are skipped with a notice; more than 1% of them
// aborts with an error.
CorpusBuildResult build_corpus(const std::string& raw_path, const FilterRules& rules,
                               const FeatureConfig& features);

void save_raw_records(const std::vector<RawImageRecord>& records,
                      const std::string& path);
std::vector<RawImageRecord> load_raw_records(const std::string& path);

struct CorpusStats {
  long images = 0;
  double mean_scene_text = 0.0;
  double median_scene_text = 0.0;
  // Scene-text count histogram: index 0..overflow_at-1 are exact counts, the
  // last bin collects everything at or above overflow_at.
  int overflow_at = 50;
  std::vector<long> histogram;
};

CorpusStats corpus_stats(const std::vector<Sample>& samples, int overflow_at = 50);
std::string stats_to_json(const CorpusStats& stats);

}  // namespace tap
