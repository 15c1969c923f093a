#include "tap/sample.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tap/phoc.hpp"
#include "tap/word_vectors.hpp"
#include "testing.hpp"

namespace {

using tap::assemble_extended_text;
using tap::BoundingBox;
using tap::ExtendedText;
using tap::FeatureConfig;
using tap::load_dataset;
using tap::make_sample;
using tap::ObjectRegion;
using tap::Sample;
using tap::save_dataset;
using tap::SceneTextRegion;
using tap::Segment;
using tap::TextCaps;

ObjectRegion object(const std::string& label, const BoundingBox& box, int dim = 8) {
  ObjectRegion o;
  o.label = label;
  o.box = box;
  o.visual = tap::synthesize_visual_feature("obj:" + label, dim);
  return o;
}

SceneTextRegion region(const std::string& word, const BoundingBox& box, int dim = 8) {
  SceneTextRegion r;
  r.word = word;
  r.box = box;
  r.visual = tap::synthesize_visual_feature("ocr:" + word, dim);
  r.word_vec = tap::HashWordVectors(dim).vector(word);
  r.phoc = tap::phoc_encode(word);
  return r;
}

TEST(ExtendedTextAssembly, SegmentsInQuestionLabelsTextOrder) {
  const ExtendedText w = assemble_extended_text(
      "What is written?", {"stop sign", "car"}, {"STOP", "ahead"});
  ASSERT_EQ(w.size(), 3 + 3 + 2);
  EXPECT_EQ(w.tokens[0].text, "what");
  EXPECT_EQ(w.tokens[0].segment, Segment::Question);
  EXPECT_EQ(w.tokens[2].text, "written");
  EXPECT_EQ(w.tokens[3].text, "stop");
  EXPECT_EQ(w.tokens[3].segment, Segment::ObjectLabels);
  EXPECT_EQ(w.tokens[5].text, "car");
  EXPECT_EQ(w.tokens[6].text, "stop");
  EXPECT_EQ(w.tokens[6].segment, Segment::SceneText);
  EXPECT_EQ(w.tokens[7].text, "ahead");

  EXPECT_EQ(w.count(Segment::Question), 3);
  EXPECT_EQ(w.count(Segment::ObjectLabels), 3);
  EXPECT_EQ(w.count(Segment::SceneText), 2);
  EXPECT_EQ(w.offset(Segment::Question), 0);
  EXPECT_EQ(w.offset(Segment::ObjectLabels), 3);
  EXPECT_EQ(w.offset(Segment::SceneText), 6);
  EXPECT_EQ(w.segment_tokens(Segment::ObjectLabels),
            (std::vector<std::string>{"stop", "sign", "car"}));
}

TEST(ExtendedTextAssembly, CapsTruncateEachSegment) {
  std::string question;
  for (int i = 0; i < 30; ++i) question += "q" + std::to_string(i) + " ";
  std::vector<std::string> labels;
  for (int i = 0; i < 120; ++i) labels.push_back("label" + std::to_string(i));
  std::vector<std::string> words;
  for (int i = 0; i < 150; ++i) words.push_back("w" + std::to_string(i));

  const ExtendedText w = assemble_extended_text(question, labels, words);
  EXPECT_EQ(w.count(Segment::Question), 20);
  EXPECT_EQ(w.count(Segment::ObjectLabels), 100);
  EXPECT_EQ(w.count(Segment::SceneText), 100);
  EXPECT_EQ(w.size(), 220);

  TextCaps tight;
  tight.max_question = 2;
  tight.max_object_labels = 3;
  tight.max_scene_text = 4;
  const ExtendedText small = assemble_extended_text(question, labels, words, tight);
  EXPECT_EQ(small.size(), 9);
  EXPECT_EQ(small.tokens[0].text, "q0");
  EXPECT_EQ(small.tokens[2].text, "label0");
}

TEST(ExtendedTextAssembly, SceneTextStaysOneTokenPerWord) {
  // Scene-text words are folded, never split, so hyphenated OCR output keeps
  // its 1:1 pairing with regions; an unfoldable word keeps a placeholder slot.
  const ExtendedText w =
      assemble_extended_text("", {}, {"Sign-Post", "N0.7", "---"});
  ASSERT_EQ(w.count(Segment::SceneText), 3);
  const auto tokens = w.segment_tokens(Segment::SceneText);
  EXPECT_EQ(tokens[0], "signpost");
  EXPECT_EQ(tokens[1], "n07");
  EXPECT_EQ(tokens[2], "");
}

TEST(MakeSample, KeepsRegionsAndTokensAligned) {
  const BoundingBox box(0.1, 0.1, 0.4, 0.4);
  auto s = make_sample("img1", "what does the sign say",
                       {object("sign", box)},
                       {region("stop", BoundingBox(0.2, 0.2, 0.3, 0.3)),
                        region("here", BoundingBox(0.5, 0.5, 0.7, 0.6))},
                       std::vector<std::string>{"stop"}, std::nullopt);
  EXPECT_EQ(s.extended_text.count(Segment::SceneText), 2);
  EXPECT_EQ(s.extended_text.segment_tokens(Segment::SceneText),
            (std::vector<std::string>{"stop", "here"}));
  ASSERT_TRUE(s.answers.has_value());
  EXPECT_EQ(s.answers->at(0), "stop");
  EXPECT_FALSE(s.caption.has_value());
}

TEST(MakeSample, DropsRegionsPastTheCap) {
  std::vector<SceneTextRegion> regions;
  for (int i = 0; i < 150; ++i) {
    regions.push_back(region("w" + std::to_string(i), BoundingBox(0.1, 0.1, 0.2, 0.2)));
  }
  const auto s = make_sample("img", "q", {}, std::move(regions), std::nullopt,
                             std::nullopt);
  EXPECT_EQ(s.scene_text.size(), 100u);
  EXPECT_EQ(s.extended_text.count(Segment::SceneText), 100);
  EXPECT_EQ(s.scene_text.back().word, "w99");
}

TEST(MakeSample, RejectsInconsistentFeatureDims) {
  auto bad_obj = object("a", BoundingBox(0.1, 0.1, 0.2, 0.2), 8);
  auto odd_obj = object("b", BoundingBox(0.3, 0.3, 0.4, 0.4), 16);
  EXPECT_THROW(make_sample("img", "q", {bad_obj, odd_obj}, {}, std::nullopt,
                           std::nullopt),
               std::invalid_argument);

  auto r1 = region("x", BoundingBox(0.1, 0.1, 0.2, 0.2), 8);
  auto r2 = region("y", BoundingBox(0.3, 0.3, 0.4, 0.4), 8);
  r2.word_vec = Eigen::VectorXd::Zero(4);
  EXPECT_THROW(make_sample("img", "q", {}, {r1, r2}, std::nullopt, std::nullopt),
               std::invalid_argument);
}

TEST(MakeSample, AcceptsEmptyQuestionAndEmptyRegions) {
  const auto s = make_sample("img", "", {}, {}, std::nullopt, std::string("a caption"));
  EXPECT_EQ(s.extended_text.size(), 0);
  EXPECT_TRUE(s.caption.has_value());
}

TEST(SynthesizeVisualFeature, DeterministicUnitVectors) {
  const auto a = tap::synthesize_visual_feature("obj:sign", 32);
  const auto b = tap::synthesize_visual_feature("obj:sign", 32);
  const auto c = tap::synthesize_visual_feature("obj:door", 32);
  ASSERT_EQ(a.size(), 32);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_GT((a - c).norm(), 1e-6);
  EXPECT_NEAR(a.norm(), 1.0, 1e-9);
}

TEST(Dataset, RoundTripPreservesSamples) {
  tap::testing::TempDir dir;
  FeatureConfig config;
  config.visual_dim = 8;
  config.word_vector_dim = 8;

  std::vector<Sample> samples;
  samples.push_back(make_sample(
      "imgA", "what does the sign say",
      {object("sign", BoundingBox(0.1, 0.1, 0.5, 0.5))},
      {region("stop", BoundingBox(0.2, 0.2, 0.4, 0.4))},
      std::vector<std::string>{"stop", "halt"}, std::nullopt));
  samples.push_back(make_sample(
      "imgB", "",
      {object("car", BoundingBox(0.5, 0.5, 0.9, 0.9))},
      {region("taxi", BoundingBox(0.6, 0.6, 0.8, 0.7)),
       region("42", BoundingBox(0.55, 0.8, 0.65, 0.88))},
      std::nullopt, std::string("a taxi with a number")));

  const std::string path = dir.file("data.jsonl");
  save_dataset(samples, path);
  const auto loaded = load_dataset(path, config);

  ASSERT_EQ(loaded.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& a = samples[i];
    const Sample& b = loaded[i];
    EXPECT_EQ(a.image_id, b.image_id);
    EXPECT_EQ(a.question, b.question);
    EXPECT_EQ(a.answers, b.answers);
    EXPECT_EQ(a.caption, b.caption);
    ASSERT_EQ(a.objects.size(), b.objects.size());
    for (size_t k = 0; k < a.objects.size(); ++k) {
      EXPECT_EQ(a.objects[k].label, b.objects[k].label);
      EXPECT_DOUBLE_EQ(a.objects[k].box.x1, b.objects[k].box.x1);
      EXPECT_EQ((a.objects[k].visual - b.objects[k].visual).norm(), 0.0);
    }
    ASSERT_EQ(a.scene_text.size(), b.scene_text.size());
    for (size_t k = 0; k < a.scene_text.size(); ++k) {
      EXPECT_EQ(a.scene_text[k].word, b.scene_text[k].word);
      EXPECT_EQ((a.scene_text[k].visual - b.scene_text[k].visual).norm(), 0.0);
      EXPECT_EQ((a.scene_text[k].word_vec - b.scene_text[k].word_vec).norm(), 0.0);
      EXPECT_EQ(a.scene_text[k].phoc, b.scene_text[k].phoc);
    }
    EXPECT_EQ(a.extended_text.size(), b.extended_text.size());
  }
}

TEST(Dataset, FeatureTagsExpandOnLoad) {
  tap::testing::TempDir dir;
  FeatureConfig config;
  config.visual_dim = 12;
  config.word_vector_dim = 6;

  ObjectRegion o;
  o.label = "sign";
  o.box = BoundingBox(0.1, 0.1, 0.5, 0.5);
  o.feature_tag = "obj:sign";
  o.visual = tap::synthesize_visual_feature(o.feature_tag, config.visual_dim);
  SceneTextRegion r;
  r.word = "stop";
  r.box = BoundingBox(0.2, 0.2, 0.4, 0.4);
  r.feature_tag = "ocr:stop";
  r.visual = tap::synthesize_visual_feature(r.feature_tag, config.visual_dim);
  r.word_vec = tap::HashWordVectors(config.word_vector_dim).vector(r.word);
  r.phoc = tap::phoc_encode(r.word);

  const std::string path = dir.file("tags.jsonl");
  save_dataset({make_sample("img", "q", {o}, {r}, std::nullopt, std::nullopt)}, path);
  const auto loaded = load_dataset(path, config);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].objects[0].visual.size(), 12);
  EXPECT_EQ((loaded[0].objects[0].visual - o.visual).norm(), 0.0);
  EXPECT_EQ(loaded[0].scene_text[0].word_vec.size(), 6);
  EXPECT_EQ((loaded[0].scene_text[0].word_vec - r.word_vec).norm(), 0.0);
  EXPECT_EQ(loaded[0].scene_text[0].phoc, r.phoc);
}

TEST(Dataset, RejectsUnsupportedSchemaVersion) {
  tap::testing::TempDir dir;
  const std::string path = dir.file("bad.jsonl");
  {
    std::ofstream out(path);
    out << R"({"schema_version":99,"image_id":"x","question":"q"})" << "\n";
  }
  EXPECT_THROW(load_dataset(path, FeatureConfig{}), std::runtime_error);
}

TEST(Dataset, RejectsMalformedRows) {
  tap::testing::TempDir dir;
  const std::string path = dir.file("broken.jsonl");
  {
    std::ofstream out(path);
    out << "not json\n";
  }
  EXPECT_THROW(load_dataset(path, FeatureConfig{}), std::runtime_error);
  EXPECT_THROW(load_dataset(dir.file("absent.jsonl"), FeatureConfig{}),
               std::runtime_error);
}

}  // namespace
