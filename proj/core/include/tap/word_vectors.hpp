#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <string_view>

namespace tap {

// Source of fixed word embeddings for scene-text tokens. Implementations must
// be deterministic: the same word always yields the same vector.
class WordVectorProvider {
 public:
  virtual ~WordVectorProvider() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd vector(std::string_view word) const = 0;
  virtual std::string name() const = 0;
};

// Hash-seeded random unit vectors: fnv1a64(word) seeds a generator that fills
// the vector with normals, then normalizes. Stands in for pretrained
// embeddings; equal words collide exactly, unrelated words are near-orthogonal
// in high dimension.
class HashWordVectors : public WordVectorProvider {
 public:
  explicit HashWordVectors(int dim);
  int dim() const override { return dim_; }
  Eigen::VectorXd vector(std::string_view word) const override;
  std::string name() const override { return "hash"; }

 private:
  int dim_;
};

// Text table, one "word v1 v2 ... vd" row per line (the common pretrained
// export format). Words absent from the table fall back to hash vectors.
class FileWordVectors : public WordVectorProvider {
 public:
  FileWordVectors(const std::string& path, int dim);
  int dim() const override { return dim_; }
  Eigen::VectorXd vector(std::string_view word) const override;
  std::string name() const override { return "file:" + path_; }

 private:
  struct Table;
  int dim_;
  std::string path_;
  std::shared_ptr<const Table> table_;
  HashWordVectors fallback_;
};

// spec is "hash" or "file:<path>". A file spec whose path cannot be opened
// falls back to the hash provider with a notice on stderr.
std::unique_ptr<WordVectorProvider> make_word_vector_provider(const std::string& spec,
                                                              int dim);

}  // namespace tap
