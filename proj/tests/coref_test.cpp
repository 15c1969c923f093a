#include "tap/coref.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "tap/sample.hpp"
#include "tap/synth.hpp"
#include "tap/tokenize.hpp"
#include "tap/word_vectors.hpp"

namespace tap {
namespace {

constexpr int kDim = 8;

ObjectRegion object(const std::string& label, const BoundingBox& box) {
  ObjectRegion o;
  o.label = label;
  o.box = box;
  o.feature_tag = "obj:" + label;
  o.visual = synthesize_visual_feature(o.feature_tag, kDim);
  return o;
}

SceneTextRegion region(const std::string& word, const BoundingBox& box) {
  static HashWordVectors vectors(kDim);
  SceneTextRegion r;
  r.word = word;
  r.box = box;
  r.feature_tag = "ocr:" + word;
  r.visual = synthesize_visual_feature(r.feature_tag, kDim);
  r.word_vec = vectors.vector(word);
  r.phoc = phoc_encode(word);
  return r;
}

// Literal restatement of the correspondence definition, all loops spelled out.
std::vector<CorefPair> oracle_pairs(const Sample& sample,
                                    const RelationThresholds& thresholds = {}) {
  std::vector<CorefPair> pairs;
  for (int pos = 0; pos < sample.extended_text.size(); ++pos) {
    const std::string& token = sample.extended_text.tokens[static_cast<size_t>(pos)].text;
    if (token.empty()) continue;
    for (int r = 0; r < static_cast<int>(sample.scene_text.size()); ++r) {
      if (normalize_token(sample.scene_text[static_cast<size_t>(r)].word) == token) {
        pairs.push_back({CorefKind::WordToSceneText, pos, r});
        pairs.push_back({CorefKind::SceneTextToWord, r, pos});
      }
    }
  }
  for (int i = 0; i < static_cast<int>(sample.objects.size()); ++i) {
    for (int r = 0; r < static_cast<int>(sample.scene_text.size()); ++r) {
      if (classify_relation(sample.objects[static_cast<size_t>(i)].box,
                            sample.scene_text[static_cast<size_t>(r)].box,
                            thresholds) == RelativePosition::On) {
        pairs.push_back({CorefKind::ObjectToSceneText, i, r});
        pairs.push_back({CorefKind::SceneTextToObject, r, i});
      }
    }
  }
  return pairs;
}

using PairKey = std::tuple<int, int, int>;

std::vector<PairKey> sorted_keys(const std::vector<CorefPair>& pairs) {
  std::vector<PairKey> keys;
  keys.reserve(pairs.size());
  for (const auto& p : pairs) {
    keys.emplace_back(static_cast<int>(p.kind), p.source, p.target);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

Sample stop_sign_sample() {
  // Extended text: [stop, here | sign | stop, menu]. Region 0 ("STOP!") sits
  // on the sign; region 1 ("menu") floats far away.
  std::vector<ObjectRegion> objects = {object("sign", {0.1, 0.1, 0.5, 0.5})};
  std::vector<SceneTextRegion> regions = {
      region("STOP!", {0.2, 0.2, 0.4, 0.3}),
      region("menu", {0.8, 0.85, 0.9, 0.9}),
  };
  return make_sample("img0", "stop here", std::move(objects), std::move(regions),
                     std::nullopt, std::nullopt);
}

TEST(FindCorrespondedPairs, HandFixture) {
  const Sample sample = stop_sign_sample();
  const auto keys = sorted_keys(find_corresponded_pairs(sample));

  const std::vector<PairKey> expected = sorted_keys({
      {CorefKind::WordToSceneText, 0, 0},  // question "stop" -> region 0
      {CorefKind::SceneTextToWord, 0, 0},
      {CorefKind::WordToSceneText, 3, 0},  // scene-text token "stop" -> region 0
      {CorefKind::SceneTextToWord, 0, 3},
      {CorefKind::WordToSceneText, 4, 1},  // scene-text token "menu" -> region 1
      {CorefKind::SceneTextToWord, 1, 4},
      {CorefKind::ObjectToSceneText, 0, 0},  // STOP! is on the sign
      {CorefKind::SceneTextToObject, 0, 0},
  });
  EXPECT_EQ(keys, expected);
}

TEST(FindCorrespondedPairs, UnfoldableWordsNeverMatch) {
  // "---" folds to the empty placeholder; empty tokens must not pair, even
  // with each other.
  std::vector<SceneTextRegion> regions = {
      region("---", {0.1, 0.1, 0.2, 0.2}),
      region("!!!", {0.3, 0.3, 0.4, 0.4}),
  };
  const Sample sample = make_sample("img1", "", {}, std::move(regions),
                                    std::nullopt, std::nullopt);
  for (const auto& pair : find_corresponded_pairs(sample)) {
    EXPECT_NE(pair.kind, CorefKind::WordToSceneText);
    EXPECT_NE(pair.kind, CorefKind::SceneTextToWord);
  }
}

TEST(FindCorrespondedPairs, HonorsCustomThresholds) {
  // Half of the word box hangs outside the object: not On by default, On once
  // the containment bar drops below one half.
  std::vector<ObjectRegion> objects = {object("board", {0.1, 0.1, 0.5, 0.5})};
  std::vector<SceneTextRegion> regions = {region("menu", {0.3, 0.2, 0.7, 0.3})};
  const Sample sample = make_sample("img2", "", std::move(objects),
                                    std::move(regions), std::nullopt, std::nullopt);

  const auto strict = find_corresponded_pairs(sample);
  EXPECT_TRUE(std::none_of(strict.begin(), strict.end(), [](const CorefPair& p) {
    return p.kind == CorefKind::ObjectToSceneText;
  }));

  RelationThresholds loose;
  loose.on_containment = 0.4;
  const auto relaxed = find_corresponded_pairs(sample, loose);
  EXPECT_TRUE(std::any_of(relaxed.begin(), relaxed.end(), [](const CorefPair& p) {
    return p.kind == CorefKind::ObjectToSceneText;
  }));
  EXPECT_EQ(sorted_keys(relaxed), sorted_keys(oracle_pairs(sample, loose)));
}

TEST(FindCorrespondedPairs, MatchesOracleOnSynthCorpus) {
  FeatureConfig features;
  features.visual_dim = kDim;
  features.word_vector_dim = kDim;
  const auto samples = synth_corpus(21, 40, SynthTask::QuestionAnswering, features);
  ASSERT_EQ(samples.size(), 40u);
  for (const auto& sample : samples) {
    EXPECT_EQ(sorted_keys(find_corresponded_pairs(sample)),
              sorted_keys(oracle_pairs(sample)));
  }
}

TEST(FindCorrespondedPairs, EverySynthSceneHasAnOnPair) {
  FeatureConfig features;
  features.visual_dim = kDim;
  features.word_vector_dim = kDim;
  for (const auto& sample : synth_corpus(22, 10, SynthTask::QuestionAnswering, features)) {
    const auto pairs = find_corresponded_pairs(sample);
    EXPECT_TRUE(std::any_of(pairs.begin(), pairs.end(), [](const CorefPair& p) {
      return p.kind == CorefKind::ObjectToSceneText;
    }));
    // The answer word is spelled in the extended text, so a word pair exists.
    EXPECT_TRUE(std::any_of(pairs.begin(), pairs.end(), [](const CorefPair& p) {
      return p.kind == CorefKind::WordToSceneText;
    }));
  }
}

AttentionMaps uniform_maps(int layers, int heads, int rows) {
  AttentionMaps maps;
  for (int l = 0; l < layers; ++l) {
    maps.emplace_back();
    for (int h = 0; h < heads; ++h) {
      maps.back().push_back(Eigen::MatrixXd::Constant(rows, rows,
                                                      1.0 / static_cast<double>(rows)));
    }
  }
  return maps;
}

TEST(PairAttention, TakesTheMaximumOverLayersAndHeads) {
  const RowLayout layout{5, 2, 3};  // rows: text 0-4, objects 5-6, regions 7-9
  AttentionMaps maps = uniform_maps(2, 2, 12);

  const CorefPair word_pair{CorefKind::WordToSceneText, 1, 2};  // row 1, col 9
  maps[0][1](1, 9) = 0.4;
  maps[1][0](1, 9) = 0.7;
  EXPECT_DOUBLE_EQ(pair_attention(maps, layout, word_pair), 0.7);

  const CorefPair reverse{CorefKind::SceneTextToWord, 2, 1};  // row 9, col 1
  maps[1][1](9, 1) = 0.55;
  EXPECT_DOUBLE_EQ(pair_attention(maps, layout, reverse), 0.55);

  const CorefPair object_pair{CorefKind::ObjectToSceneText, 1, 0};  // row 6, col 7
  maps[0][0](6, 7) = 0.25;
  EXPECT_DOUBLE_EQ(pair_attention(maps, layout, object_pair), 0.25);

  const CorefPair region_object{CorefKind::SceneTextToObject, 0, 1};  // row 7, col 6
  EXPECT_DOUBLE_EQ(pair_attention(maps, layout, region_object), 1.0 / 12.0);
}

TEST(PairAttention, RejectsLayoutsBeyondTheMap) {
  const RowLayout layout{5, 2, 3};
  const AttentionMaps maps = uniform_maps(1, 1, 8);  // rows 0-7, but layout needs 9
  const CorefPair pair{CorefKind::WordToSceneText, 0, 2};  // col 9 out of range
  EXPECT_THROW(pair_attention(maps, layout, pair), std::out_of_range);
}

TEST(CorefAccumulator, MeansPerKind) {
  const RowLayout layout{2, 1, 1};
  AttentionMaps maps = uniform_maps(1, 1, 4);
  maps[0][0](0, 3) = 0.9;  // word 0 -> region 0
  maps[0][0](1, 3) = 0.5;  // word 1 -> region 0
  maps[0][0](3, 0) = 0.3;  // region 0 -> word 0

  CorefAccumulator acc;
  acc.add(maps, layout, {{CorefKind::WordToSceneText, 0, 0},
                         {CorefKind::WordToSceneText, 1, 0},
                         {CorefKind::SceneTextToWord, 0, 0}});
  EXPECT_TRUE(acc.has(CorefKind::WordToSceneText));
  EXPECT_TRUE(acc.has(CorefKind::SceneTextToWord));
  EXPECT_FALSE(acc.has(CorefKind::ObjectToSceneText));
  EXPECT_DOUBLE_EQ(acc.mean(CorefKind::WordToSceneText), 0.7);
  EXPECT_DOUBLE_EQ(acc.mean(CorefKind::SceneTextToWord), 0.3);
  EXPECT_EQ(acc.count[static_cast<int>(CorefKind::WordToSceneText)], 2);
  EXPECT_THROW(acc.mean(CorefKind::ObjectToSceneText), std::logic_error);
}

TEST(CorefKindNames, AreDistinct) {
  EXPECT_STREQ(to_string(CorefKind::WordToSceneText), "word_to_scene_text");
  EXPECT_STREQ(to_string(CorefKind::SceneTextToWord), "scene_text_to_word");
  EXPECT_STREQ(to_string(CorefKind::ObjectToSceneText), "object_to_scene_text");
  EXPECT_STREQ(to_string(CorefKind::SceneTextToObject), "scene_text_to_object");
}

}  // namespace
}  // namespace tap
