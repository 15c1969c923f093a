#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tap {

// Shared answer normalization for the string-match metrics: lowercase,
// punctuation dropped, English articles (a/an/the) removed, whitespace
// collapsed to single spaces and trimmed.
std::string normalize_answer(std::string_view text);

std::size_t levenshtein_distance(std::string_view a, std::string_view b);

// Consensus accuracy against ten reference answers: the mean over the ten
// leave-one-out subsets of min(matches / 3, 1). Implemented in closed form
// from the total match count.
double vqa_accuracy(const std::string& prediction,
                    const std::vector<std::string>& answers);

// Normalized-Levenshtein score for one question: per reference,
// 1 - NL(pred, ref) when NL < tau and 0 otherwise (a distance at or past the
// threshold scores zero); the question score is the max over references.
double anls(const std::string& prediction, const std::vector<std::string>& answers,
            double tau = 0.5);

// Corpus-level consensus captioning score (the df-clipped, length-penalized
// n-gram cosine family; n = 1..4, sigma = 6, scaled by 10). Document
// frequencies are computed over the reference sets themselves.
struct CiderInput {
  std::string candidate;
  std::vector<std::string> references;
};
double cider_d(const std::vector<CiderInput>& corpus, int max_n = 4,
               double sigma = 6.0);

// Per-dataset aggregates.
struct QaEvalResult {
  double accuracy = 0.0;
  double anls = 0.0;
  int count = 0;
};
QaEvalResult evaluate_qa(const std::vector<std::string>& predictions,
                         const std::vector<std::vector<std::string>>& answer_sets,
                         double tau = 0.5);

}  // namespace tap
