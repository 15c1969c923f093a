#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tap {

// Lowercases ASCII letters, treats every other ASCII byte that is not a letter
// or digit as a separator, and keeps bytes >= 0x80 verbatim. tokenize is
// idempotent on its own output.
std::vector<std::string> tokenize(std::string_view text);

// Folds a single word the same way tokenize folds runs: lowercase, with
// separator bytes dropped instead of splitting. May return an empty string.
std::string normalize_token(std::string_view word);

// Token <-> id table with a fixed reserved block. Ids are assigned in
// insertion order after the reserved block; lookups of unknown tokens map to
// the unknown id. The table must be frozen before id() is used.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kMaskId = 1;
  static constexpr int kBeginId = 2;
  static constexpr int kEndId = 3;
  static constexpr int kUnknownId = 4;
  static constexpr int kReservedCount = 5;

  Vocabulary();

  // Adds a token if it is new; returns its id either way. Throws if frozen.
  int add(std::string_view token);
  void freeze();
  bool frozen() const { return frozen_; }

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  bool contains(std::string_view token) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  bool is_reserved(int id) const { return id >= 0 && id < kReservedCount; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  template <typename Range>
  static Vocabulary from_tokens(const Range& range) {
    Vocabulary v;
    for (const auto& t : range) v.add(t);
    v.freeze();
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  bool frozen_ = false;
};

}  // namespace tap
