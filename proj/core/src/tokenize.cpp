#include "tap/tokenize.hpp"

#include <fstream>
#include <stdexcept>

namespace tap {

namespace {

bool keeps_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

unsigned char fold_byte(unsigned char c) {
  if (c >= 'A' && c <= 'Z') return static_cast<unsigned char>(c - 'A' + 'a');
  return c;
}

const char* reserved_name(int id) {
  static constexpr const char* kNames[] = {"<pad>", "<mask>", "<begin>", "<end>",
                                           "<unk>"};
  return kNames[id];
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char raw : text) {
    const unsigned char c = fold_byte(raw);
    if (keeps_byte(c)) {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string normalize_token(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (unsigned char raw : word) {
    const unsigned char c = fold_byte(raw);
    if (keeps_byte(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (int i = 0; i < kReservedCount; ++i) {
    tokens_.emplace_back(reserved_name(i));
    index_.emplace(tokens_.back(), i);
  }
}

int Vocabulary::add(std::string_view token) {
  if (frozen_) throw std::logic_error("vocabulary: add after freeze");
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

void Vocabulary::freeze() { frozen_ = true; }

int Vocabulary::id(std::string_view token) const {
  if (!frozen_) throw std::logic_error("vocabulary: id lookup before freeze");
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknownId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("vocabulary: token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vocabulary: cannot write " + path);
  for (int i = kReservedCount; i < size(); ++i) out << tokens_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vocabulary: cannot read " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.add(line);
  }
  v.freeze();
  return v;
}

}  // namespace tap
