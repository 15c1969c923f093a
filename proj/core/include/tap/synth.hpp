#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/corpus.hpp"
#include "tap/sample.hpp"

namespace tap {

enum class SynthTask { QuestionAnswering, Captioning };

// Deterministic synthetic scenes for end-to-end runs. Each image holds two or
// three labeled objects; exactly one scene-text word sits On the cued object,
// and the question asks for it ("what is on the <label>"), so the right
// answer requires relating regions, not just reading text. Every answer word
// comes from a lexicon disjoint from the answer vocabulary, which makes the
// copy pathway the only route to a correct answer. Distractor words cycle
// through placements (inside another object, far away, beside an object,
// straddling an edge, enclosing an object) so all relative-position classes
// occur in the corpus.
std::vector<Sample> synth_corpus(std::uint64_t seed, int count, SynthTask task,
                                 const FeatureConfig& features);

// The restricted answer vocabulary matching synth_corpus: question/caption
// template words plus object labels; scene-text lexicon words are absent by
// construction.
std::vector<std::string> synth_answer_tokens();

// Raw captioned-image records with planted filter categories (usable text,
// no text, watermark-only, tiny-only) for exercising the corpus builder.
std::vector<RawImageRecord> synth_raw_records(std::uint64_t seed, int count);

}  // namespace tap
