#pragma once

#include "latmdp/nets/layers.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::nets {

/// Versioned binary container mapping tensor names to raw data; round-trips
/// bit-exactly. Header carries a scalar-width tag, a config fingerprint and
/// an opaque metadata string (JSON in practice).
struct CheckpointMeta {
  std::string fingerprint;
  std::string config_json;
};

namespace detail {

inline void write_string(std::ofstream& out, const std::string& s) {
  const std::uint64_t n = s.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(s.data(), static_cast<std::streamsize>(n));
}

inline std::string read_string(std::ifstream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

constexpr char kMagic[9] = "LMDPCKP1";

}  // namespace detail

template <typename Scalar>
void save_checkpoint(const std::string& path, std::vector<ParamRef<Scalar>> params,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(detail::kMagic, 8);
  const std::uint8_t width = sizeof(Scalar);
  out.write(reinterpret_cast<const char*>(&width), 1);
  detail::write_string(out, meta.fingerprint);
  detail::write_string(out, meta.config_json);
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (auto& p : params) {
    detail::write_string(out, p.name);
    const std::uint64_t rows = p.value->rows(), cols = p.value->cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(sizeof(Scalar) * p.value->size()));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

/// Loads tensors by name into the given parameter list; every parameter must
/// be present with matching shape.
template <typename Scalar>
CheckpointMeta load_checkpoint(const std::string& path, std::vector<ParamRef<Scalar>> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(detail::kMagic, 8))
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::uint8_t width = 0;
  in.read(reinterpret_cast<char*>(&width), 1);
  if (width != sizeof(Scalar))
    throw std::runtime_error("load_checkpoint: scalar width mismatch in " + path);
  CheckpointMeta meta;
  meta.fingerprint = detail::read_string(in);
  meta.config_json = detail::read_string(in);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));

  std::map<std::string, std::pair<std::uint64_t, std::vector<Scalar>>> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = detail::read_string(in);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    std::vector<Scalar> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * data.size()));
    if (!in) throw std::runtime_error("load_checkpoint: truncated tensor " + name);
    tensors[name] = {rows, std::move(data)};
  }

  for (auto& p : params) {
    auto it = tensors.find(p.name);
    if (it == tensors.end())
      throw std::runtime_error("load_checkpoint: missing tensor " + p.name);
    const std::uint64_t rows = it->second.first;
    const auto& data = it->second.second;
    if (static_cast<std::uint64_t>(p.value->rows()) != rows ||
        static_cast<std::uint64_t>(p.value->size()) != data.size())
      throw std::runtime_error("load_checkpoint: shape mismatch for " + p.name);
    std::copy(data.begin(), data.end(), p.value->data());
  }
  return meta;
}

/// Reads only the metadata header.
inline CheckpointMeta peek_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("peek_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(detail::kMagic, 8))
    throw std::runtime_error("peek_checkpoint: bad magic in " + path);
  std::uint8_t width = 0;
  in.read(reinterpret_cast<char*>(&width), 1);
  CheckpointMeta meta;
  meta.fingerprint = detail::read_string(in);
  meta.config_json = detail::read_string(in);
  return meta;
}

}  // namespace latmdp::nets
