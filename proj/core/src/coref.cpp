#include "tap/coref.hpp"

#include <stdexcept>

#include "tap/tokenize.hpp"

namespace tap {

const char* to_string(CorefKind kind) {
  switch (kind) {
    case CorefKind::WordToSceneText: return "word_to_scene_text";
    case CorefKind::SceneTextToWord: return "scene_text_to_word";
    case CorefKind::ObjectToSceneText: return "object_to_scene_text";
    case CorefKind::SceneTextToObject: return "scene_text_to_object";
  }
  throw std::invalid_argument("unknown coref kind");
}

std::vector<CorefPair> find_corresponded_pairs(const Sample& sample,
                                               const RelationThresholds& thresholds) {
  std::vector<CorefPair> pairs;
  const auto& text = sample.extended_text;

  std::vector<std::string> region_words;
  region_words.reserve(sample.scene_text.size());
  for (const auto& r : sample.scene_text) region_words.push_back(normalize_token(r.word));

  for (int pos = 0; pos < text.size(); ++pos) {
    const std::string& token = text.tokens[static_cast<size_t>(pos)].text;
    if (token.empty()) continue;
    for (int r = 0; r < static_cast<int>(region_words.size()); ++r) {
      if (region_words[static_cast<size_t>(r)] != token) continue;
      pairs.push_back({CorefKind::WordToSceneText, pos, r});
      pairs.push_back({CorefKind::SceneTextToWord, r, pos});
    }
  }

  for (int i = 0; i < static_cast<int>(sample.objects.size()); ++i) {
    for (int r = 0; r < static_cast<int>(sample.scene_text.size()); ++r) {
      if (!is_on(sample.objects[static_cast<size_t>(i)].box,
                 sample.scene_text[static_cast<size_t>(r)].box, thresholds)) {
        continue;
      }
      pairs.push_back({CorefKind::ObjectToSceneText, i, r});
      pairs.push_back({CorefKind::SceneTextToObject, r, i});
    }
  }
  return pairs;
}

namespace {

// Global row indices for a pair's (source, target).
std::pair<int, int> pair_rows(const RowLayout& layout, const CorefPair& pair) {
  switch (pair.kind) {
    case CorefKind::WordToSceneText:
      return {pair.source, layout.scene_text_offset() + pair.target};
    case CorefKind::SceneTextToWord:
      return {layout.scene_text_offset() + pair.source, pair.target};
    case CorefKind::ObjectToSceneText:
      return {layout.object_offset() + pair.source,
              layout.scene_text_offset() + pair.target};
    case CorefKind::SceneTextToObject:
      return {layout.scene_text_offset() + pair.source,
              layout.object_offset() + pair.target};
  }
  throw std::invalid_argument("unknown coref kind");
}

}  // namespace

double pair_attention(const AttentionMaps& maps, const RowLayout& layout,
                      const CorefPair& pair) {
  const auto [row, col] = pair_rows(layout, pair);
  double best = 0.0;
  for (const auto& layer : maps) {
    for (const auto& head : layer) {
      if (row >= head.rows() || col >= head.cols()) {
        throw std::out_of_range("pair_attention: row layout exceeds attention map");
      }
      best = std::max(best, head(row, col));
    }
  }
  return best;
}

void CorefAccumulator::add(const AttentionMaps& maps, const RowLayout& layout,
                           const std::vector<CorefPair>& pairs) {
  for (const auto& pair : pairs) {
    const int k = static_cast<int>(pair.kind);
    sum[k] += pair_attention(maps, layout, pair);
    count[k] += 1;
  }
}

double CorefAccumulator::mean(CorefKind kind) const {
  const int k = static_cast<int>(kind);
  if (count[k] == 0) throw std::logic_error("coref: no pairs of kind " +
                                            std::string(to_string(kind)));
  return sum[k] / static_cast<double>(count[k]);
}

}  // namespace tap
