#include "tap/pretrain_instance.hpp"

#include <stdexcept>

#include "tap/rng.hpp"

namespace tap {

MlmResult apply_mlm_mask(const ExtendedText& text, const Vocabulary& vocab,
                         const MaskingConfig& config, std::mt19937_64& rng) {
  MlmResult result;
  result.masked = text;
  const std::string& mask_token = vocab.token(Vocabulary::kMaskId);
  const int vocab_extra = vocab.size() - Vocabulary::kReservedCount;
  for (int pos = 0; pos < text.size(); ++pos) {
    if (uniform_double(rng) >= config.mask_prob) continue;
    auto& token = result.masked.tokens[static_cast<size_t>(pos)];
    result.positions.push_back(pos);
    result.targets.push_back(token.text);
    const double u = uniform_double(rng);
    if (u < config.mask_token_frac) {
      token.text = mask_token;
    } else if (u < config.mask_token_frac + config.random_token_frac && vocab_extra > 0) {
      const int id = Vocabulary::kReservedCount +
                     static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(vocab_extra)));
      token.text = vocab.token(id);
    }
    // else: token left unchanged but still predicted.
  }
  return result;
}

namespace {

// Rebuilds a sample with one text segment taken from a donor. Only the raw
// text fields move; regions and features stay with the receiver.
Sample splice_segment(const Sample& receiver, const Sample& donor, Segment segment) {
  Sample out = receiver;
  ExtendedText spliced;
  const ExtendedText& donor_text = donor.extended_text;
  for (int s = 0; s < kNumSegments; ++s) {
    const Segment seg = static_cast<Segment>(s);
    const ExtendedText& source = (seg == segment) ? donor_text : receiver.extended_text;
    for (const auto& token : source.tokens) {
      if (token.segment == seg) spliced.tokens.push_back(token);
    }
  }
  out.extended_text = std::move(spliced);
  if (segment == Segment::Question) out.question = donor.question;
  return out;
}

}  // namespace

PollutionResult apply_pollution(const Sample& sample, const std::vector<Sample>& pool,
                                const PollutionConfig& config, std::mt19937_64& rng) {
  PollutionResult result;
  result.sample = sample;
  if (uniform_double(rng) >= config.pollute_prob) return result;

  std::vector<size_t> donors;
  donors.reserve(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].image_id != sample.image_id) donors.push_back(i);
  }
  if (donors.empty()) throw std::runtime_error("pollution pool exhausted");
  const Sample& donor = pool[donors[uniform_index(rng, donors.size())]];

  std::vector<Segment> candidates;
  for (int s = 0; s < kNumSegments; ++s) {
    const Segment seg = static_cast<Segment>(s);
    if (sample.extended_text.count(seg) > 0) candidates.push_back(seg);
  }
  if (candidates.empty()) throw std::runtime_error("pollution: sample has no text");
  const Segment segment = candidates[uniform_index(rng, candidates.size())];

  result.sample = splice_segment(sample, donor, segment);
  result.label = ContrastiveLabel::Polluted;
  result.polluted_segment = segment;
  return result;
}

RegionPredictionPair sample_region_pair(const Sample& sample,
                                        const RegionPredictionConfig& config,
                                        std::mt19937_64& rng) {
  if (config.classes != 2 && config.classes != kNumRelativePositions) {
    throw std::invalid_argument("region prediction: classes must be 2 or 12");
  }
  RegionPredictionPair pair;
  if (sample.objects.empty() || sample.scene_text.empty()) return pair;
  pair.valid = true;
  pair.object_index = static_cast<int>(uniform_index(rng, sample.objects.size()));
  pair.scene_text_index = static_cast<int>(uniform_index(rng, sample.scene_text.size()));
  const BoundingBox& obj = sample.objects[static_cast<size_t>(pair.object_index)].box;
  const BoundingBox& text =
      sample.scene_text[static_cast<size_t>(pair.scene_text_index)].box;
  if (config.classes == 2) {
    pair.label = is_on(obj, text, config.thresholds) ? 1 : 0;
  } else {
    pair.label = static_cast<int>(classify_relation(obj, text, config.thresholds));
  }
  return pair;
}

PretrainInstance build_pretrain_instance(const Sample& sample,
                                         const std::vector<Sample>& pool,
                                         const Vocabulary& vocab,
                                         const PretrainTaskConfig& config,
                                         std::mt19937_64& rng) {
  PretrainInstance instance;
  PollutionResult polluted = apply_pollution(sample, pool, config.pollution, rng);
  instance.contrastive_label = polluted.label;
  instance.polluted_segment = polluted.polluted_segment;
  instance.sample = std::move(polluted.sample);

  // Masked-token prediction is ill-posed on text from the wrong image, so
  // polluted instances carry no masking targets.
  if (instance.contrastive_label == ContrastiveLabel::Matched) {
    MlmResult mlm = apply_mlm_mask(instance.sample.extended_text, vocab,
                                   config.masking, rng);
    instance.sample.extended_text = std::move(mlm.masked);
    instance.mask_positions = std::move(mlm.positions);
    instance.mask_targets = std::move(mlm.targets);
  }

  instance.region_pair = sample_region_pair(instance.sample, config.region_prediction, rng);
  return instance;
}

}  // namespace tap
