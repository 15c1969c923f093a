#include "tap/phoc.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "tap/tokenize.hpp"

namespace tap {

namespace {

int unigram_slot(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= '0' && c <= '9') return 26 + (c - '0');
  return -1;
}

// True iff the span [k, k+extent) of an n-part word overlaps region r of an
// L-part split by at least half the span. Cross-multiplied onto the common
// grid n*L: span covers [k*L, (k+extent)*L), region covers [r*n, (r+1)*n).
bool occupies(int k, int extent, int n, int r, int L) {
  const long lo = std::max(static_cast<long>(k) * L, static_cast<long>(r) * n);
  const long hi = std::min(static_cast<long>(k + extent) * L,
                           static_cast<long>(r + 1) * n);
  const long overlap2 = 2 * std::max(0L, hi - lo);
  return overlap2 >= static_cast<long>(extent) * L;
}

std::string fold_for_phoc(std::string_view word) {
  std::string folded;
  folded.reserve(word.size());
  for (char c : normalize_token(word)) {
    if (unigram_slot(c) >= 0) folded.push_back(c);
  }
  return folded;
}

}  // namespace

const std::vector<std::string>& builtin_phoc_bigrams() {
  static const std::vector<std::string> kBigrams = {
      "th", "he", "in", "er", "an", "re", "on", "at", "en", "nd",
      "ti", "es", "or", "te", "of", "ed", "is", "it", "al", "ar",
      "st", "to", "nt", "ng", "se", "ha", "as", "ou", "io", "le",
      "ve", "co", "me", "de", "hi", "ri", "ro", "ic", "ne", "ea",
      "ra", "ce", "li", "ch", "ll", "be", "ma", "si", "om", "ur",
  };
  return kBigrams;
}

std::vector<std::string> load_phoc_bigrams(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("phoc: cannot read bigram list " + path);
  std::vector<std::string> bigrams;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.size() != 2 || unigram_slot(line[0]) < 0 || unigram_slot(line[1]) < 0) {
      throw std::runtime_error("phoc: invalid bigram entry '" + line + "' in " + path);
    }
    bigrams.push_back(line);
  }
  std::vector<std::string> sorted = bigrams;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::runtime_error("phoc: duplicate bigram in " + path);
  }
  if (static_cast<int>(bigrams.size()) != kPhocBigramCount) {
    throw std::runtime_error("phoc: expected " + std::to_string(kPhocBigramCount) +
                             " bigrams in " + path + ", got " +
                             std::to_string(bigrams.size()));
  }
  return bigrams;
}

PhocVector phoc_encode(std::string_view word, const std::vector<std::string>& bigrams) {
  if (static_cast<int>(bigrams.size()) != kPhocBigramCount) {
    throw std::invalid_argument("phoc: bigram list must have exactly " +
                                std::to_string(kPhocBigramCount) + " entries");
  }
  PhocVector out{};
  const std::string folded = fold_for_phoc(word);
  const int n = static_cast<int>(folded.size());
  if (n == 0) return out;

  int level_offset = 0;
  for (int level : kPhocUnigramLevels) {
    for (int k = 0; k < n; ++k) {
      const int slot = unigram_slot(folded[static_cast<size_t>(k)]);
      for (int r = 0; r < level; ++r) {
        if (occupies(k, 1, n, r, level)) {
          out[static_cast<size_t>(level_offset + r * kPhocUnigrams + slot)] = 1;
        }
      }
    }
    level_offset += level * kPhocUnigrams;
  }

  std::unordered_map<std::string, int> bigram_slot;
  for (int i = 0; i < kPhocBigramCount; ++i) bigram_slot.emplace(bigrams[static_cast<size_t>(i)], i);
  for (int level : kPhocBigramLevels) {
    for (int k = 0; k + 1 < n; ++k) {
      auto it = bigram_slot.find(folded.substr(static_cast<size_t>(k), 2));
      if (it == bigram_slot.end()) continue;
      for (int r = 0; r < level; ++r) {
        if (occupies(k, 2, n, r, level)) {
          out[static_cast<size_t>(level_offset + r * kPhocBigramCount + it->second)] = 1;
        }
      }
    }
    level_offset += level * kPhocBigramCount;
  }
  return out;
}

}  // namespace tap
