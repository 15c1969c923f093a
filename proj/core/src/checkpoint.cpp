#include "tap/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tap {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'A', 'P', 'C', 'K', 'P', 'T', '\n'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

const NamedTensor& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("checkpoint: no tensor named " + name);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  if (ckpt.dtype != "float32" && ckpt.dtype != "float64") {
    throw std::invalid_argument("checkpoint: dtype must be float32 or float64");
  }
  json header;
  header["format_version"] = 1;
  header["dtype"] = ckpt.dtype;
  header["meta"] = json::parse(ckpt.meta_json);
  header["tensors"] = json::array();
  for (const auto& t : ckpt.tensors) {
    header["tensors"].push_back({{"name", t.name},
                                 {"rows", t.values.rows()},
                                 {"cols", t.values.cols()}});
  }
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& t : ckpt.tensors) {
    if (ckpt.dtype == "float64") {
      out.write(reinterpret_cast<const char*>(t.values.data()),
                static_cast<std::streamsize>(sizeof(double) * t.values.size()));
    } else {
      Eigen::MatrixXf narrow = t.values.cast<float>();
      out.write(reinterpret_cast<const char*>(narrow.data()),
                static_cast<std::streamsize>(sizeof(float) * narrow.size()));
    }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: " + path + " is not a checkpoint file");
  }
  const std::uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint: bad header in " + path + ": " + e.what());
  }
  if (header.value("format_version", -1) != 1) {
    throw std::runtime_error("checkpoint: unsupported format_version in " + path);
  }

  Checkpoint ckpt;
  ckpt.dtype = header.at("dtype").get<std::string>();
  ckpt.meta_json = header.at("meta").dump();
  for (const auto& entry : header.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    const Eigen::Index rows = entry.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = entry.at("cols").get<Eigen::Index>();
    if (ckpt.dtype == "float64") {
      t.values.resize(rows, cols);
      in.read(reinterpret_cast<char*>(t.values.data()),
              static_cast<std::streamsize>(sizeof(double) * t.values.size()));
    } else {
      Eigen::MatrixXf narrow(rows, cols);
      in.read(reinterpret_cast<char*>(narrow.data()),
              static_cast<std::streamsize>(sizeof(float) * narrow.size()));
      t.values = narrow.cast<double>();
    }
    if (!in) throw std::runtime_error("checkpoint: truncated payload in " + path);
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

}  // namespace tap
