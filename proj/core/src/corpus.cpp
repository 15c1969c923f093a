#include "tap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tap/tokenize.hpp"

namespace tap {

using nlohmann::json;

const char* to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::Kept: return "kept";
    case FilterReason::NoText: return "no_text";
    case FilterReason::WatermarkOnly: return "watermark_only";
    case FilterReason::TinyOnly: return "tiny_only";
  }
  throw std::invalid_argument("unknown filter reason");
}

bool is_watermark_word(const RawSceneText& text, const FilterRules& rules) {
  if (text.watermark_flag) return true;
  std::string folded;
  folded.reserve(text.word.size());
  for (unsigned char c : text.word) {
    folded.push_back(static_cast<char>(std::tolower(c)));
  }
  for (const auto& pattern : rules.watermark_patterns) {
    if (folded.find(pattern) != std::string::npos) return true;
  }
  return false;
}

FilterReason filter_image(const RawImageRecord& record, const FilterRules& rules) {
  if (record.scene_text.empty()) return FilterReason::NoText;
  std::vector<const RawSceneText*> content;
  for (const auto& t : record.scene_text) {
    if (!is_watermark_word(t, rules)) content.push_back(&t);
  }
  if (content.empty()) return FilterReason::WatermarkOnly;
  bool all_tiny = true;
  for (const auto* t : content) {
    if (t->box.height() >= rules.tiny_height) {
      all_tiny = false;
      break;
    }
  }
  if (all_tiny) return FilterReason::TinyOnly;
  return FilterReason::Kept;
}

namespace {

json box_to_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error("raw record: box must be a 4-element array");
  }
  return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                     j[3].get<double>());
}

RawImageRecord record_from_json(const json& row) {
  RawImageRecord r;
  r.image_id = row.at("image_id").get<std::string>();
  r.caption = row.at("caption").get<std::string>();
  for (const auto& obj : row.value("objects", json::array())) {
    RawObject o;
    o.label = obj.at("label").get<std::string>();
    o.box = box_from_json(obj.at("box"));
    o.feature_tag = obj.value("feature_tag", "obj:" + o.label);
    r.objects.push_back(std::move(o));
  }
  for (const auto& st : row.value("scene_text", json::array())) {
    RawSceneText t;
    t.word = st.at("word").get<std::string>();
    t.box = box_from_json(st.at("box"));
    t.watermark_flag = st.value("watermark", false);
    r.scene_text.push_back(std::move(t));
  }
  return r;
}

}  // namespace

void save_raw_records(const std::vector<RawImageRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("raw records: cannot write " + path);
  for (const auto& r : records) {
    json row;
    row["image_id"] = r.image_id;
    row["caption"] = r.caption;
    row["objects"] = json::array();
    for (const auto& o : r.objects) {
      row["objects"].push_back({{"label", o.label},
                                {"box", box_to_json(o.box)},
                                {"feature_tag", o.feature_tag}});
    }
    row["scene_text"] = json::array();
    for (const auto& t : r.scene_text) {
      json st{{"word", t.word}, {"box", box_to_json(t.box)}};
      if (t.watermark_flag) st["watermark"] = true;
      row["scene_text"].push_back(std::move(st));
    }
    out << row.dump() << '\n';
  }
}

std::vector<RawImageRecord> load_raw_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("raw records: cannot read " + path);
  std::vector<RawImageRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

CorpusBuildResult build_corpus(const std::string& raw_path, const FilterRules& rules,
                               const FeatureConfig& features) {
  std::ifstream in(raw_path);
  if (!in) throw std::runtime_error("corpus: cannot read " + raw_path);
  auto word_vectors = make_word_vector_provider(features.word_vector_provider,
                                                features.word_vector_dim);

  CorpusBuildResult result;
  long parsed = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    RawImageRecord record;
    try {
      record = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      std::cerr << "notice: skipping malformed record at " << raw_path << ":"
                << line_no << ": " << e.what() << "\n";
      ++result.malformed;
      continue;
    }
    ++parsed;
    const FilterReason reason = filter_image(record, rules);
    ++result.reason_counts[reason];
    if (reason != FilterReason::Kept) continue;

    std::vector<ObjectRegion> objects;
    for (const auto& o : record.objects) {
      ObjectRegion obj;
      obj.label = o.label;
      obj.box = o.box;
      obj.feature_tag = o.feature_tag;
      obj.visual = synthesize_visual_feature(o.feature_tag, features.visual_dim);
      objects.push_back(std::move(obj));
    }
    std::vector<SceneTextRegion> regions;
    for (const auto& t : record.scene_text) {
      SceneTextRegion r;
      r.word = t.word;
      r.box = t.box;
      r.feature_tag = "ocr:" + t.word;
      r.visual = synthesize_visual_feature(r.feature_tag, features.visual_dim);
      r.word_vec = word_vectors->vector(t.word);
      r.phoc = phoc_encode(t.word);
      regions.push_back(std::move(r));
    }
    // The caption stands in for the question so the text side has all three
    // segments during pre-training.
    result.samples.push_back(make_sample(record.image_id, record.caption,
                                         std::move(objects), std::move(regions),
                                         std::nullopt, record.caption, features.caps));
  }

  const long total = parsed + result.malformed;
  if (total > 0 &&
      static_cast<double>(result.malformed) > 0.01 * static_cast<double>(total)) {
    throw std::runtime_error("corpus: " + std::to_string(result.malformed) + " of " +
                             std::to_string(total) +
                             " records malformed (over the 1% budget)");
  }
  return result;
}

CorpusStats corpus_stats(const std::vector<Sample>& samples, int overflow_at) {
  CorpusStats stats;
  stats.overflow_at = overflow_at;
  stats.histogram.assign(static_cast<size_t>(overflow_at) + 1, 0);
  stats.images = static_cast<long>(samples.size());
  if (samples.empty()) return stats;

  std::vector<long> counts;
  counts.reserve(samples.size());
  double total = 0.0;
  for (const auto& s : samples) {
    const long n = static_cast<long>(s.scene_text.size());
    counts.push_back(n);
    total += static_cast<double>(n);
    const size_t bin = n >= overflow_at ? static_cast<size_t>(overflow_at)
                                        : static_cast<size_t>(n);
    ++stats.histogram[bin];
  }
  stats.mean_scene_text = total / static_cast<double>(samples.size());
  std::sort(counts.begin(), counts.end());
  const size_t mid = counts.size() / 2;
  stats.median_scene_text =
      counts.size() % 2 == 1
          ? static_cast<double>(counts[mid])
          : 0.5 * static_cast<double>(counts[mid - 1] + counts[mid]);
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  json j;
  j["images"] = stats.images;
  j["mean_scene_text"] = stats.mean_scene_text;
  j["median_scene_text"] = stats.median_scene_text;
  j["overflow_at"] = stats.overflow_at;
  j["histogram"] = stats.histogram;
  return j.dump(2);
}

}  // namespace tap
