#include "tap/sample.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tap/rng.hpp"
#include "tap/tokenize.hpp"

namespace tap {

using nlohmann::json;

const char* to_string(Segment s) {
  switch (s) {
    case Segment::Question: return "question";
    case Segment::ObjectLabels: return "object_labels";
    case Segment::SceneText: return "scene_text";
  }
  throw std::invalid_argument("unknown segment");
}

int ExtendedText::count(Segment s) const {
  int n = 0;
  for (const auto& t : tokens) n += (t.segment == s) ? 1 : 0;
  return n;
}

int ExtendedText::offset(Segment s) const {
  switch (s) {
    case Segment::Question: return 0;
    case Segment::ObjectLabels: return count(Segment::Question);
    case Segment::SceneText:
      return count(Segment::Question) + count(Segment::ObjectLabels);
  }
  throw std::invalid_argument("unknown segment");
}

std::vector<std::string> ExtendedText::segment_tokens(Segment s) const {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.segment == s) out.push_back(t.text);
  }
  return out;
}

ExtendedText assemble_extended_text(const std::string& question,
                                    const std::vector<std::string>& object_labels,
                                    const std::vector<std::string>& scene_text_words,
                                    const TextCaps& caps) {
  ExtendedText w;
  auto push_capped = [&w](std::vector<std::string> words, Segment seg, int cap) {
    if (static_cast<int>(words.size()) > cap) words.resize(static_cast<size_t>(cap));
    for (auto& word : words) w.tokens.push_back({std::move(word), seg});
  };

  push_capped(tokenize(question), Segment::Question, caps.max_question);

  std::vector<std::string> label_words;
  for (const auto& label : object_labels) {
    for (auto& t : tokenize(label)) label_words.push_back(std::move(t));
  }
  push_capped(std::move(label_words), Segment::ObjectLabels, caps.max_object_labels);

  std::vector<std::string> text_words;
  text_words.reserve(scene_text_words.size());
  for (const auto& word : scene_text_words) text_words.push_back(normalize_token(word));
  push_capped(std::move(text_words), Segment::SceneText, caps.max_scene_text);
  return w;
}

Sample make_sample(std::string image_id, std::string question,
                   std::vector<ObjectRegion> objects,
                   std::vector<SceneTextRegion> scene_text,
                   std::optional<std::vector<std::string>> answers,
                   std::optional<std::string> caption, const TextCaps& caps) {
  Sample s;
  s.image_id = std::move(image_id);
  s.question = std::move(question);
  s.objects = std::move(objects);
  s.scene_text = std::move(scene_text);
  s.answers = std::move(answers);
  s.caption = std::move(caption);

  // Scene-text tokens must stay 1:1 with regions, so regions past the cap are
  // dropped along with their tokens.
  if (static_cast<int>(s.scene_text.size()) > caps.max_scene_text) {
    s.scene_text.resize(static_cast<size_t>(caps.max_scene_text));
  }

  std::vector<std::string> labels;
  labels.reserve(s.objects.size());
  for (const auto& o : s.objects) labels.push_back(o.label);
  std::vector<std::string> words;
  words.reserve(s.scene_text.size());
  for (const auto& r : s.scene_text) words.push_back(r.word);

  s.extended_text = assemble_extended_text(s.question, labels, words, caps);
  if (s.extended_text.count(Segment::SceneText) !=
      static_cast<int>(s.scene_text.size())) {
    throw std::logic_error("sample: scene-text tokens out of step with regions");
  }

  for (const auto& o : s.objects) {
    if (o.visual.size() != s.objects.front().visual.size()) {
      throw std::invalid_argument("sample: inconsistent object feature dims");
    }
  }
  for (const auto& r : s.scene_text) {
    if (r.visual.size() != s.scene_text.front().visual.size() ||
        r.word_vec.size() != s.scene_text.front().word_vec.size()) {
      throw std::invalid_argument("sample: inconsistent scene-text feature dims");
    }
  }
  return s;
}

Eigen::VectorXd synthesize_visual_feature(const std::string& tag, int dim) {
  auto rng = derive_rng(fnv1a64(tag), "visual_feature");
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal_double(rng);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

namespace {

json box_to_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error("dataset: box must be a 4-element array");
  }
  return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                     j[3].get<double>());
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

void save_dataset(const std::vector<Sample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dataset: cannot write " + path);
  for (const auto& s : samples) {
    json row;
    row["schema_version"] = kDatasetSchemaVersion;
    row["image_id"] = s.image_id;
    row["question"] = s.question;
    if (s.answers) row["answers"] = *s.answers;
    if (s.caption) row["caption"] = *s.caption;
    row["objects"] = json::array();
    for (const auto& o : s.objects) {
      json obj{{"label", o.label}, {"box", box_to_json(o.box)}};
      if (!o.feature_tag.empty()) {
        obj["feature_tag"] = o.feature_tag;
      } else {
        obj["visual"] = vector_to_json(o.visual);
      }
      row["objects"].push_back(std::move(obj));
    }
    row["scene_text"] = json::array();
    for (const auto& r : s.scene_text) {
      json reg{{"word", r.word}, {"box", box_to_json(r.box)}};
      if (!r.feature_tag.empty()) {
        reg["feature_tag"] = r.feature_tag;
      } else {
        reg["visual"] = vector_to_json(r.visual);
      }
      row["scene_text"].push_back(std::move(reg));
    }
    out << row.dump() << '\n';
  }
}

std::vector<Sample> load_dataset(const std::string& path, const FeatureConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset: cannot read " + path);
  auto word_vectors = make_word_vector_provider(config.word_vector_provider,
                                                config.word_vector_dim);
  std::vector<Sample> samples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("dataset: " + path + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    const int version = row.value("schema_version", -1);
    if (version != kDatasetSchemaVersion) {
      throw std::runtime_error("dataset: " + path + ":" + std::to_string(line_no) +
                               ": unsupported schema_version " + std::to_string(version));
    }

    std::vector<ObjectRegion> objects;
    for (const auto& obj : row.value("objects", json::array())) {
      ObjectRegion o;
      o.label = obj.at("label").get<std::string>();
      o.box = box_from_json(obj.at("box"));
      if (obj.contains("visual")) {
        o.visual = vector_from_json(obj["visual"]);
      } else {
        o.feature_tag = obj.at("feature_tag").get<std::string>();
        o.visual = synthesize_visual_feature(o.feature_tag, config.visual_dim);
      }
      objects.push_back(std::move(o));
    }

    std::vector<SceneTextRegion> regions;
    for (const auto& reg : row.value("scene_text", json::array())) {
      SceneTextRegion r;
      r.word = reg.at("word").get<std::string>();
      r.box = box_from_json(reg.at("box"));
      if (reg.contains("visual")) {
        r.visual = vector_from_json(reg["visual"]);
      } else {
        r.feature_tag = reg.at("feature_tag").get<std::string>();
        r.visual = synthesize_visual_feature(r.feature_tag, config.visual_dim);
      }
      r.word_vec = word_vectors->vector(r.word);
      r.phoc = phoc_encode(r.word);
      regions.push_back(std::move(r));
    }

    std::optional<std::vector<std::string>> answers;
    if (row.contains("answers")) answers = row["answers"].get<std::vector<std::string>>();
    std::optional<std::string> caption;
    if (row.contains("caption")) caption = row["caption"].get<std::string>();

    samples.push_back(make_sample(row.at("image_id").get<std::string>(),
                                  row.value("question", std::string()),
                                  std::move(objects), std::move(regions),
                                  std::move(answers), std::move(caption), config.caps));
  }
  return samples;
}

}  // namespace tap
