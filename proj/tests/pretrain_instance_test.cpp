#include "tap/pretrain_instance.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tap/geometry.hpp"
#include "tap/rng.hpp"

namespace {

using tap::apply_mlm_mask;
using tap::apply_pollution;
using tap::BoundingBox;
using tap::build_pretrain_instance;
using tap::classify_relation;
using tap::ContrastiveLabel;
using tap::MaskingConfig;
using tap::PollutionConfig;
using tap::PretrainTaskConfig;
using tap::RegionPredictionConfig;
using tap::Sample;
using tap::sample_region_pair;
using tap::Segment;
using tap::Vocabulary;

tap::ObjectRegion object(const std::string& label, const BoundingBox& box) {
  tap::ObjectRegion o;
  o.label = label;
  o.box = box;
  o.visual = tap::synthesize_visual_feature("obj:" + label, 8);
  return o;
}

tap::SceneTextRegion region(const std::string& word, const BoundingBox& box) {
  tap::SceneTextRegion r;
  r.word = word;
  r.box = box;
  r.visual = tap::synthesize_visual_feature("ocr:" + word, 8);
  r.word_vec = tap::synthesize_visual_feature("wv:" + word, 8);
  r.phoc = tap::phoc_encode(word);
  return r;
}

Sample make_fixture(const std::string& image_id, const std::string& question,
                    const std::vector<std::string>& labels,
                    const std::vector<std::string>& words) {
  std::vector<tap::ObjectRegion> objects;
  double x = 0.05;
  for (const auto& label : labels) {
    objects.push_back(object(label, BoundingBox(x, 0.1, x + 0.3, 0.45)));
    x += 0.32;
  }
  std::vector<tap::SceneTextRegion> regions;
  x = 0.05;
  for (const auto& word : words) {
    regions.push_back(region(word, BoundingBox(x, 0.6, x + 0.12, 0.7)));
    x += 0.15;
  }
  return tap::make_sample(image_id, question, std::move(objects), std::move(regions),
                          std::nullopt, std::nullopt);
}

std::vector<Sample> make_pool() {
  return {
      make_fixture("img0", "what does the red sign say", {"sign", "car"},
                   {"stop", "here", "now"}),
      make_fixture("img1", "what brand is the laptop", {"laptop", "desk"},
                   {"vaio", "inc"}),
      make_fixture("img2", "what number is the bus", {"bus"}, {"42", "express"}),
      make_fixture("img3", "who wrote the poster", {"poster", "wall", "door"},
                   {"gallery", "east", "wing"}),
  };
}

Vocabulary pool_vocab(const std::vector<Sample>& pool) {
  Vocabulary v;
  for (const auto& s : pool) {
    for (const auto& t : s.extended_text.tokens) {
      if (!t.text.empty()) v.add(t.text);
    }
  }
  v.freeze();
  return v;
}

TEST(MlmMask, ZeroProbabilityIsIdentity) {
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  MaskingConfig config;
  config.mask_prob = 0.0;
  auto rng = tap::derive_rng(61, "mlm");
  const auto result = apply_mlm_mask(pool[0].extended_text, vocab, config, rng);
  EXPECT_TRUE(result.positions.empty());
  EXPECT_TRUE(result.targets.empty());
  ASSERT_EQ(result.masked.size(), pool[0].extended_text.size());
  for (int i = 0; i < result.masked.size(); ++i) {
    EXPECT_EQ(result.masked.tokens[static_cast<size_t>(i)].text,
              pool[0].extended_text.tokens[static_cast<size_t>(i)].text);
  }
}

TEST(MlmMask, TargetsRecordOriginalTokens) {
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  MaskingConfig config;  // defaults: 0.15 / 0.8 / 0.1
  for (int trial = 0; trial < 200; ++trial) {
    auto rng = tap::derive_rng(62, "mlm", static_cast<std::uint64_t>(trial));
    const auto& text = pool[static_cast<size_t>(trial % pool.size())].extended_text;
    const auto result = apply_mlm_mask(text, vocab, config, rng);
    ASSERT_EQ(result.positions.size(), result.targets.size());
    std::set<int> seen;
    for (size_t i = 0; i < result.positions.size(); ++i) {
      const int pos = result.positions[i];
      ASSERT_GE(pos, 0);
      ASSERT_LT(pos, text.size());
      EXPECT_TRUE(seen.insert(pos).second) << "duplicate mask position";
      // The target is the original token; the visible token is the mask
      // token, some vocabulary token, or the unchanged original.
      EXPECT_EQ(result.targets[i], text.tokens[static_cast<size_t>(pos)].text);
      const auto& visible = result.masked.tokens[static_cast<size_t>(pos)].text;
      const bool unchanged = visible == result.targets[i];
      const bool masked = visible == vocab.token(Vocabulary::kMaskId);
      const bool in_vocab = vocab.contains(visible);
      EXPECT_TRUE(unchanged || masked || in_vocab) << visible;
      // Segments survive masking.
      EXPECT_EQ(result.masked.tokens[static_cast<size_t>(pos)].segment,
                text.tokens[static_cast<size_t>(pos)].segment);
    }
    // Unselected positions are untouched.
    for (int pos = 0; pos < text.size(); ++pos) {
      if (seen.count(pos)) continue;
      EXPECT_EQ(result.masked.tokens[static_cast<size_t>(pos)].text,
                text.tokens[static_cast<size_t>(pos)].text);
    }
  }
}

TEST(MlmMask, LongRunFractionsMatchPolicy) {
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  const MaskingConfig config;
  long total = 0, selected = 0, masked = 0, unchanged = 0, random_tok = 0;
  auto rng = tap::derive_rng(63, "mlm_stats");
  const std::string mask_token = vocab.token(Vocabulary::kMaskId);
  for (int trial = 0; trial < 12000; ++trial) {
    const auto& text = pool[static_cast<size_t>(trial % pool.size())].extended_text;
    const auto result = apply_mlm_mask(text, vocab, config, rng);
    total += text.size();
    selected += static_cast<long>(result.positions.size());
    for (size_t i = 0; i < result.positions.size(); ++i) {
      const auto& visible =
          result.masked.tokens[static_cast<size_t>(result.positions[i])].text;
      if (visible == mask_token) {
        ++masked;
      } else if (visible == result.targets[i]) {
        ++unchanged;
      } else {
        ++random_tok;
      }
    }
  }
  ASSERT_GE(total, 100000);
  const double frac = static_cast<double>(selected) / static_cast<double>(total);
  EXPECT_GE(frac, 0.145);
  EXPECT_LE(frac, 0.155);
  EXPECT_NEAR(static_cast<double>(masked) / selected, 0.8, 0.01);
  EXPECT_NEAR(static_cast<double>(random_tok) / selected, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(unchanged) / selected, 0.1, 0.01);
}

TEST(MlmMask, RandomReplacementsAvoidReservedTokens) {
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  MaskingConfig config;
  config.mask_prob = 1.0;
  config.mask_token_frac = 0.0;
  config.random_token_frac = 1.0;
  auto rng = tap::derive_rng(64, "mlm_random");
  for (int trial = 0; trial < 50; ++trial) {
    const auto result =
        apply_mlm_mask(pool[0].extended_text, vocab, config, rng);
    for (size_t i = 0; i < result.positions.size(); ++i) {
      const auto& visible =
          result.masked.tokens[static_cast<size_t>(result.positions[i])].text;
      EXPECT_TRUE(vocab.contains(visible));
      EXPECT_FALSE(vocab.is_reserved(vocab.id(visible))) << visible;
    }
  }
}

TEST(Pollution, ZeroProbabilityKeepsSampleMatched) {
  const auto pool = make_pool();
  PollutionConfig config;
  config.pollute_prob = 0.0;
  auto rng = tap::derive_rng(65, "pollution");
  const auto result = apply_pollution(pool[0], pool, config, rng);
  EXPECT_EQ(result.label, ContrastiveLabel::Matched);
  EXPECT_FALSE(result.polluted_segment.has_value());
  EXPECT_EQ(result.sample.question, pool[0].question);
  ASSERT_EQ(result.sample.extended_text.size(), pool[0].extended_text.size());
}

TEST(Pollution, CertainPollutionSwapsExactlyOneSegment) {
  const auto pool = make_pool();
  PollutionConfig config;
  config.pollute_prob = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = tap::derive_rng(66, "pollution", static_cast<std::uint64_t>(trial));
    const Sample& original = pool[static_cast<size_t>(trial % pool.size())];
    const auto result = apply_pollution(original, pool, config, rng);
    EXPECT_EQ(result.label, ContrastiveLabel::Polluted);
    ASSERT_TRUE(result.polluted_segment.has_value());
    const Segment swapped = *result.polluted_segment;

    // Regions and features never move; only segment text does.
    ASSERT_EQ(result.sample.objects.size(), original.objects.size());
    ASSERT_EQ(result.sample.scene_text.size(), original.scene_text.size());
    for (size_t k = 0; k < original.scene_text.size(); ++k) {
      EXPECT_EQ(result.sample.scene_text[k].word, original.scene_text[k].word);
      EXPECT_EQ((result.sample.scene_text[k].visual -
                 original.scene_text[k].visual).norm(), 0.0);
    }

    // The swapped segment matches some other pool image's segment verbatim.
    const auto swapped_tokens = result.sample.extended_text.segment_tokens(swapped);
    bool found_donor = false;
    for (const auto& donor : pool) {
      if (donor.image_id == original.image_id) continue;
      if (donor.extended_text.segment_tokens(swapped) == swapped_tokens) {
        found_donor = true;
      }
    }
    EXPECT_TRUE(found_donor) << "segment " << tap::to_string(swapped);

    // Untouched segments keep their original tokens.
    for (const Segment seg :
         {Segment::Question, Segment::ObjectLabels, Segment::SceneText}) {
      if (seg == swapped) continue;
      EXPECT_EQ(result.sample.extended_text.segment_tokens(seg),
                original.extended_text.segment_tokens(seg));
    }
  }
}

TEST(Pollution, LongRunFractionNearHalf) {
  const auto pool = make_pool();
  const PollutionConfig config;  // 0.5
  long polluted = 0;
  const int n = 10000;
  auto rng = tap::derive_rng(67, "pollution_stats");
  for (int trial = 0; trial < n; ++trial) {
    const auto result =
        apply_pollution(pool[static_cast<size_t>(trial % pool.size())], pool,
                        config, rng);
    polluted += result.label == ContrastiveLabel::Polluted ? 1 : 0;
  }
  const double frac = static_cast<double>(polluted) / n;
  EXPECT_GE(frac, 0.49);
  EXPECT_LE(frac, 0.51);
}

TEST(Pollution, ExhaustedPoolThrows) {
  const auto pool = make_pool();
  const std::vector<Sample> lonely = {pool[0]};
  PollutionConfig config;
  config.pollute_prob = 1.0;
  auto rng = tap::derive_rng(68, "pollution");
  EXPECT_THROW(apply_pollution(pool[0], lonely, config, rng), std::runtime_error);
}

TEST(RegionPair, LabelsMatchClassifier) {
  const auto pool = make_pool();
  RegionPredictionConfig config;  // 12-way
  for (int trial = 0; trial < 300; ++trial) {
    auto rng = tap::derive_rng(69, "region", static_cast<std::uint64_t>(trial));
    const Sample& s = pool[static_cast<size_t>(trial % pool.size())];
    const auto pair = sample_region_pair(s, config, rng);
    ASSERT_TRUE(pair.valid);
    ASSERT_GE(pair.object_index, 0);
    ASSERT_LT(pair.object_index, static_cast<int>(s.objects.size()));
    ASSERT_GE(pair.scene_text_index, 0);
    ASSERT_LT(pair.scene_text_index, static_cast<int>(s.scene_text.size()));
    const auto expected = classify_relation(
        s.objects[static_cast<size_t>(pair.object_index)].box,
        s.scene_text[static_cast<size_t>(pair.scene_text_index)].box);
    EXPECT_EQ(pair.label, static_cast<int>(expected));
  }
}

TEST(RegionPair, BinaryModeLabelsOnVersusRest) {
  RegionPredictionConfig config;
  config.classes = 2;
  // One region on the object, one far away.
  auto s = make_fixture("img", "q", {"sign"}, {});
  s.scene_text.push_back(region("hit", BoundingBox(0.1, 0.15, 0.2, 0.25)));
  s.scene_text.push_back(region("miss", BoundingBox(0.85, 0.85, 0.95, 0.95)));
  s = tap::make_sample(s.image_id, s.question, s.objects, s.scene_text,
                       std::nullopt, std::nullopt);
  std::map<int, int> labels_seen;
  for (int trial = 0; trial < 200; ++trial) {
    auto rng = tap::derive_rng(70, "region2", static_cast<std::uint64_t>(trial));
    const auto pair = sample_region_pair(s, config, rng);
    ASSERT_TRUE(pair.valid);
    const bool on = tap::is_on(s.objects[0].box,
                               s.scene_text[static_cast<size_t>(pair.scene_text_index)].box);
    EXPECT_EQ(pair.label, on ? 1 : 0);
    ++labels_seen[pair.label];
  }
  EXPECT_GT(labels_seen[0], 0);
  EXPECT_GT(labels_seen[1], 0);
}

TEST(RegionPair, EmptyRegionListsAreInvalid) {
  RegionPredictionConfig config;
  auto no_text = make_fixture("img", "q", {"sign"}, {});
  auto rng = tap::derive_rng(71, "region");
  EXPECT_FALSE(sample_region_pair(no_text, config, rng).valid);

  auto no_objects = make_fixture("img", "q", {}, {"word"});
  EXPECT_FALSE(sample_region_pair(no_objects, config, rng).valid);
}

TEST(RegionPair, RejectsUnsupportedClassCounts) {
  const auto pool = make_pool();
  RegionPredictionConfig config;
  config.classes = 5;
  auto rng = tap::derive_rng(72, "region");
  EXPECT_THROW(sample_region_pair(pool[0], config, rng), std::invalid_argument);
}

TEST(PretrainInstance, PollutedInstancesCarryNoMaskTargets) {
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  const PretrainTaskConfig config;  // pollute 0.5, mask 0.15
  int polluted = 0, matched_with_masks = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    auto rng = tap::derive_rng(73, "instance", static_cast<std::uint64_t>(trial));
    const auto inst = build_pretrain_instance(
        pool[static_cast<size_t>(trial % pool.size())], pool, vocab, config, rng);
    if (inst.contrastive_label == ContrastiveLabel::Polluted) {
      ++polluted;
      EXPECT_TRUE(inst.mask_positions.empty());
      EXPECT_TRUE(inst.mask_targets.empty());
      EXPECT_TRUE(inst.polluted_segment.has_value());
    } else {
      EXPECT_FALSE(inst.polluted_segment.has_value());
      if (!inst.mask_positions.empty()) ++matched_with_masks;
    }
    EXPECT_TRUE(inst.region_pair.valid);
  }
  EXPECT_GT(polluted, 800);
  EXPECT_GT(matched_with_masks, 700);
}

TEST(PretrainInstance, MatchedPathConsumesThePollutionCoinFirst) {
  // With pollution disabled the builder must still burn one uniform draw for
  // the pollution coin before masking, keeping traces aligned across tasks.
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  PretrainTaskConfig config;
  config.pollution.pollute_prob = 0.0;

  auto rng_a = tap::derive_rng(74, "instance", 0);
  const auto inst = build_pretrain_instance(pool[0], pool, vocab, config, rng_a);
  EXPECT_EQ(inst.contrastive_label, ContrastiveLabel::Matched);

  auto rng_b = tap::derive_rng(74, "instance", 0);
  (void)tap::uniform_double(rng_b);  // the pollution coin
  const auto manual = apply_mlm_mask(pool[0].extended_text, vocab,
                                     config.masking, rng_b);
  EXPECT_EQ(inst.mask_positions, manual.positions);
  EXPECT_EQ(inst.mask_targets, manual.targets);
  for (int i = 0; i < inst.sample.extended_text.size(); ++i) {
    EXPECT_EQ(inst.sample.extended_text.tokens[static_cast<size_t>(i)].text,
              manual.masked.tokens[static_cast<size_t>(i)].text);
  }
}

TEST(PretrainInstance, MostMatchedInstancesHaveMasks) {
  // With 15% per-token masking over ~10-token texts most matched instances
  // carry at least one target; pin the measured rate to a stable band.
  const auto pool = make_pool();
  const auto vocab = pool_vocab(pool);
  const PretrainTaskConfig config;
  int matched = 0, with_masks = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto rng = tap::derive_rng(75, "instance", static_cast<std::uint64_t>(trial));
    const auto inst = build_pretrain_instance(
        pool[static_cast<size_t>(trial % pool.size())], pool, vocab, config, rng);
    if (inst.contrastive_label != ContrastiveLabel::Matched) continue;
    ++matched;
    with_masks += inst.mask_positions.empty() ? 0 : 1;
  }
  const double rate = static_cast<double>(with_masks) / matched;
  EXPECT_GT(rate, 0.55);
  EXPECT_LT(rate, 0.95);
}

}  // namespace
