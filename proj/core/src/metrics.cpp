#include "tap/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tap/tokenize.hpp"

namespace tap {

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      cleaned.push_back(' ');
    }
    // Other punctuation is dropped without leaving a space.
  }
  std::string out;
  size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    size_t j = i;
    while (j < cleaned.size() && cleaned[j] != ' ') ++j;
    if (j > i) {
      const std::string_view word(cleaned.data() + i, j - i);
      if (word != "a" && word != "an" && word != "the") {
        if (!out.empty()) out.push_back(' ');
        out.append(word);
      }
    }
    i = j;
  }
  return out;
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t above = row[j];
      const std::size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
      row[j] = std::min({above + 1, row[j - 1] + 1, diag + cost});
      diag = above;
    }
  }
  return row[m];
}

double vqa_accuracy(const std::string& prediction,
                    const std::vector<std::string>& answers) {
  if (answers.size() != 10) {
    throw std::invalid_argument("vqa_accuracy: expected 10 reference answers, got " +
                                std::to_string(answers.size()));
  }
  const std::string pred = normalize_answer(prediction);
  int matches = 0;
  for (const auto& a : answers) matches += (normalize_answer(a) == pred) ? 1 : 0;
  // Leaving out a non-matching answer keeps `matches` matches in the subset;
  // leaving out a match keeps one fewer.
  const double keep_all = std::min(static_cast<double>(matches) / 3.0, 1.0);
  const double drop_one = std::min(static_cast<double>(matches - 1) / 3.0, 1.0);
  const int non_matches = 10 - matches;
  return (non_matches * keep_all + matches * drop_one) / 10.0;
}

double anls(const std::string& prediction, const std::vector<std::string>& answers,
            double tau) {
  if (answers.empty()) throw std::invalid_argument("anls: no reference answers");
  const std::string pred = normalize_answer(prediction);
  double best = 0.0;
  for (const auto& a : answers) {
    const std::string ref = normalize_answer(a);
    const std::size_t longest = std::max(pred.size(), ref.size());
    double nl = 0.0;
    if (longest > 0) {
      nl = static_cast<double>(levenshtein_distance(pred, ref)) /
           static_cast<double>(longest);
    }
    const double score = (nl < tau) ? 1.0 - nl : 0.0;
    best = std::max(best, score);
  }
  return best;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, double>;

std::vector<NgramCounts> count_ngrams(const std::vector<std::string>& tokens, int max_n) {
  std::vector<NgramCounts> counts(static_cast<size_t>(max_n));
  for (int n = 1; n <= max_n; ++n) {
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
      std::vector<std::string> gram(tokens.begin() + static_cast<long>(i),
                                    tokens.begin() + static_cast<long>(i) + n);
      counts[static_cast<size_t>(n - 1)][std::move(gram)] += 1.0;
    }
  }
  return counts;
}

struct TfidfVec {
  std::vector<NgramCounts> weights;  // per n
  std::vector<double> norms;         // per n
  int length = 0;                    // unigram count
};

TfidfVec to_tfidf(const std::vector<NgramCounts>& counts, int max_n,
                  const std::vector<NgramCounts>& df, double log_images) {
  TfidfVec v;
  v.weights.resize(static_cast<size_t>(max_n));
  v.norms.assign(static_cast<size_t>(max_n), 0.0);
  for (int n = 0; n < max_n; ++n) {
    double sq = 0.0;
    for (const auto& [gram, count] : counts[static_cast<size_t>(n)]) {
      auto it = df[static_cast<size_t>(n)].find(gram);
      const double gram_df = (it == df[static_cast<size_t>(n)].end()) ? 0.0 : it->second;
      const double w = count * (log_images - std::log(std::max(1.0, gram_df)));
      v.weights[static_cast<size_t>(n)][gram] = w;
      sq += w * w;
      if (n == 0) v.length += static_cast<int>(count);
    }
    v.norms[static_cast<size_t>(n)] = std::sqrt(sq);
  }
  return v;
}

}  // namespace

double cider_d(const std::vector<CiderInput>& corpus, int max_n, double sigma) {
  if (corpus.empty()) throw std::invalid_argument("cider_d: empty corpus");
  for (const auto& item : corpus) {
    if (item.references.empty()) {
      throw std::invalid_argument("cider_d: item without references");
    }
  }

  // Document frequency: the number of images whose reference set contains the
  // n-gram at least once.
  std::vector<NgramCounts> df(static_cast<size_t>(max_n));
  std::vector<std::vector<std::vector<NgramCounts>>> ref_counts(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::vector<NgramCounts> seen(static_cast<size_t>(max_n));
    for (const auto& ref : corpus[i].references) {
      auto counts = count_ngrams(tokenize(ref), max_n);
      for (int n = 0; n < max_n; ++n) {
        for (const auto& [gram, count] : counts[static_cast<size_t>(n)]) {
          seen[static_cast<size_t>(n)][gram] = 1.0;
        }
      }
      ref_counts[i].push_back(std::move(counts));
    }
    for (int n = 0; n < max_n; ++n) {
      for (const auto& entry : seen[static_cast<size_t>(n)]) {
        df[static_cast<size_t>(n)][entry.first] += 1.0;
      }
    }
  }

  const double log_images = std::log(static_cast<double>(corpus.size()));
  double total = 0.0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const TfidfVec cand =
        to_tfidf(count_ngrams(tokenize(corpus[i].candidate), max_n), max_n, df, log_images);
    std::vector<double> per_n(static_cast<size_t>(max_n), 0.0);
    for (const auto& counts : ref_counts[i]) {
      const TfidfVec ref = to_tfidf(counts, max_n, df, log_images);
      const double delta = static_cast<double>(cand.length - ref.length);
      const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
      for (int n = 0; n < max_n; ++n) {
        double dot = 0.0;
        for (const auto& [gram, w] : cand.weights[static_cast<size_t>(n)]) {
          auto it = ref.weights[static_cast<size_t>(n)].find(gram);
          if (it == ref.weights[static_cast<size_t>(n)].end()) continue;
          dot += std::min(w, it->second) * it->second;
        }
        const double norm = cand.norms[static_cast<size_t>(n)] * ref.norms[static_cast<size_t>(n)];
        double val = (norm > 0.0) ? dot / norm : 0.0;
        per_n[static_cast<size_t>(n)] += val * penalty;
      }
    }
    double mean_n = 0.0;
    for (double v : per_n) mean_n += v;
    mean_n /= static_cast<double>(max_n);
    mean_n /= static_cast<double>(corpus[i].references.size());
    total += 10.0 * mean_n;
  }
  return total / static_cast<double>(corpus.size());
}

QaEvalResult evaluate_qa(const std::vector<std::string>& predictions,
                         const std::vector<std::vector<std::string>>& answer_sets,
                         double tau) {
  if (predictions.size() != answer_sets.size()) {
    throw std::invalid_argument("evaluate_qa: prediction/answer count mismatch");
  }
  QaEvalResult r;
  r.count = static_cast<int>(predictions.size());
  if (r.count == 0) return r;
  for (size_t i = 0; i < predictions.size(); ++i) {
    r.accuracy += vqa_accuracy(predictions[i], answer_sets[i]);
    r.anls += anls(predictions[i], answer_sets[i], tau);
  }
  r.accuracy /= static_cast<double>(r.count);
  r.anls /= static_cast<double>(r.count);
  return r;
}

}  // namespace tap
