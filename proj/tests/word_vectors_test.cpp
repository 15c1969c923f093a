#include "tap/word_vectors.hpp"

#include <fstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "tap/rng.hpp"
#include "testing.hpp"

namespace {

using tap::FileWordVectors;
using tap::HashWordVectors;
using tap::make_word_vector_provider;

TEST(HashWordVectors, DeterministicAcrossInstances) {
  const HashWordVectors a(32);
  const HashWordVectors b(32);
  const auto va = a.vector("street");
  const auto vb = b.vector("street");
  ASSERT_EQ(va.size(), 32);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(va[i], vb[i]);
}

TEST(HashWordVectors, UnitNorm) {
  const HashWordVectors p(64);
  for (const char* word : {"a", "stop", "zzzz", "1234", "exit"}) {
    EXPECT_NEAR(p.vector(word).norm(), 1.0, 1e-6) << word;
  }
}

TEST(HashWordVectors, DistinctWordsGetDistinctVectors) {
  const HashWordVectors p(16);
  auto rng = tap::derive_rng(51, "wv");
  const std::string chars = "abcdefghij";
  int collisions = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string w1, w2;
    const auto l1 = 1 + tap::uniform_index(rng, 8);
    const auto l2 = 1 + tap::uniform_index(rng, 8);
    for (std::uint64_t i = 0; i < l1; ++i)
      w1.push_back(chars[tap::uniform_index(rng, chars.size())]);
    for (std::uint64_t i = 0; i < l2; ++i)
      w2.push_back(chars[tap::uniform_index(rng, chars.size())]);
    if (w1 == w2) continue;
    if ((p.vector(w1) - p.vector(w2)).norm() < 1e-12) ++collisions;
  }
  EXPECT_EQ(collisions, 0);
}

TEST(HashWordVectors, RejectsNonPositiveDim) {
  EXPECT_THROW(HashWordVectors(0), std::invalid_argument);
  EXPECT_THROW(HashWordVectors(-3), std::invalid_argument);
}

TEST(FileWordVectors, TableHitsAndHashFallback) {
  tap::testing::TempDir dir;
  const std::string path = dir.file("vectors.txt");
  {
    std::ofstream out(path);
    out << "stop 1 0 0\n";
    out << "go 0 0.5 0.5\n";
  }
  const FileWordVectors p(path, 3);
  EXPECT_EQ(p.dim(), 3);
  const auto stop = p.vector("stop");
  EXPECT_DOUBLE_EQ(stop[0], 1.0);
  EXPECT_DOUBLE_EQ(stop[1], 0.0);
  const auto go = p.vector("go");
  EXPECT_DOUBLE_EQ(go[1], 0.5);

  // Absent words use the hash provider, so they are still deterministic.
  const HashWordVectors hash(3);
  const auto miss = p.vector("absent");
  const auto expected = hash.vector("absent");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(miss[i], expected[i]);
}

TEST(FileWordVectors, BadRowsAndMissingFilesThrow) {
  tap::testing::TempDir dir;
  const std::string path = dir.file("vectors.txt");
  {
    std::ofstream out(path);
    out << "stop 1 0\n";  // too few columns for dim 3
  }
  EXPECT_THROW(FileWordVectors(path, 3), std::runtime_error);
  EXPECT_THROW(FileWordVectors(dir.file("missing.txt"), 3), std::runtime_error);
}

TEST(MakeProvider, SpecDispatch) {
  const auto hash = make_word_vector_provider("hash", 8);
  EXPECT_EQ(hash->name(), "hash");
  EXPECT_EQ(hash->dim(), 8);

  tap::testing::TempDir dir;
  const std::string path = dir.file("v.txt");
  {
    std::ofstream out(path);
    out << "word 1 2 3 4 5 6 7 8\n";
  }
  const auto file = make_word_vector_provider("file:" + path, 8);
  EXPECT_EQ(file->name(), "file:" + path);
  EXPECT_DOUBLE_EQ(file->vector("word")[7], 8.0);

  // Unopenable path falls back to hash rather than failing the pipeline.
  const auto fallback = make_word_vector_provider("file:" + dir.file("nope.txt"), 8);
  EXPECT_EQ(fallback->name(), "hash");

  EXPECT_THROW(make_word_vector_provider("glove", 8), std::invalid_argument);
}

}  // namespace
