#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tap {

// Pyramidal histogram of characters. Unigram pyramid over levels 2..5 for the
// 36 characters [a-z0-9] (14 regions x 36 = 504 bits), plus a level-2 bigram
// pyramid over a fixed 50-bigram list (2 x 50 = 100 bits): 604 bits total.
//
// Layout: levels in ascending order, regions left to right, one 36-wide
// character block per region; the bigram block follows the unigram pyramid.
//
// Occupancy rule: a character (or bigram) spanning [k/n, (k+e)/n) of the word
// activates region [r/L, (r+1)/L) iff the overlap is at least half the span.
// The comparison is done in exact integer arithmetic, so boundary cases are
// decided without rounding.
inline constexpr int kPhocUnigramLevels[] = {2, 3, 4, 5};
inline constexpr int kPhocBigramLevels[] = {2};
inline constexpr int kPhocUnigrams = 36;
inline constexpr int kPhocBigramCount = 50;
inline constexpr int kPhocDim = 604;

using PhocVector = std::array<std::uint8_t, kPhocDim>;

// The 50 most frequent English bigrams, in frequency order.
const std::vector<std::string>& builtin_phoc_bigrams();

// One bigram per line; must yield exactly kPhocBigramCount distinct two-char
// [a-z0-9] entries.
std::vector<std::string> load_phoc_bigrams(const std::string& path);

// Folds to lowercase and keeps [a-z0-9] only; the encoding is computed on the
// folded string. An empty folded string yields the zero vector.
PhocVector phoc_encode(std::string_view word,
                       const std::vector<std::string>& bigrams = builtin_phoc_bigrams());

}  // namespace tap
