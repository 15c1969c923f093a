#include "tap/word_vectors.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "tap/rng.hpp"

namespace tap {

HashWordVectors::HashWordVectors(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("word vectors: dimension must be positive");
}

Eigen::VectorXd HashWordVectors::vector(std::string_view word) const {
  auto rng = derive_rng(fnv1a64(word), "word_vector");
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = normal_double(rng);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

struct FileWordVectors::Table {
  std::unordered_map<std::string, Eigen::VectorXd> rows;
};

FileWordVectors::FileWordVectors(const std::string& path, int dim)
    : dim_(dim), path_(path), fallback_(dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("word vectors: cannot read " + path);
  auto table = std::make_shared<Table>();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string word;
    row >> word;
    Eigen::VectorXd v(dim_);
    for (int i = 0; i < dim_; ++i) {
      if (!(row >> v[i])) {
        throw std::runtime_error("word vectors: bad row " + std::to_string(line_no) +
                                 " in " + path);
      }
    }
    table->rows[word] = std::move(v);
  }
  table_ = std::move(table);
}

Eigen::VectorXd FileWordVectors::vector(std::string_view word) const {
  auto it = table_->rows.find(std::string(word));
  if (it != table_->rows.end()) return it->second;
  return fallback_.vector(word);
}

std::unique_ptr<WordVectorProvider> make_word_vector_provider(const std::string& spec,
                                                              int dim) {
  if (spec == "hash") return std::make_unique<HashWordVectors>(dim);
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    try {
      return std::make_unique<FileWordVectors>(path, dim);
    } catch (const std::runtime_error& e) {
      std::cerr << "notice: " << e.what() << "; falling back to hash word vectors\n";
      return std::make_unique<HashWordVectors>(dim);
    }
  }
  throw std::invalid_argument("word vectors: unknown provider spec '" + spec + "'");
}

}  // namespace tap
