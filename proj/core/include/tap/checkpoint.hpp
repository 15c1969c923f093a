#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace tap {

// Self-describing single-file checkpoint: a magic string, a JSON header
// (tensor directory plus caller metadata), then raw little-endian payloads in
// directory order, column-major within each tensor.
//
// Tensors are held as doubles in memory; dtype "float32" narrows on write and
// widens on read, which round-trips float-precision training states exactly.
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd values;
};

struct Checkpoint {
  std::string dtype = "float32";  // or "float64"
  std::string meta_json = "{}";   // caller-owned metadata (config, iteration, ...)
  std::vector<NamedTensor> tensors;

  const NamedTensor& find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tap
