#include "latmdp/dataset.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace latmdp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("dataset: truncated transitions.bin");
  return v;
}

void write_obs(std::ofstream& out, const Observation& o) {
  out.write(reinterpret_cast<const char*>(o.pixels.data()),
            static_cast<std::streamsize>(o.pixels.size()));
}

Observation read_obs(std::ifstream& in, int h, int w) {
  Observation o;
  o.height = h;
  o.width = w;
  o.pixels.resize(static_cast<std::size_t>(h) * w * 3);
  in.read(reinterpret_cast<char*>(o.pixels.data()),
          static_cast<std::streamsize>(o.pixels.size()));
  if (!in) throw std::runtime_error("dataset: truncated transitions.bin");
  return o;
}

}  // namespace

void save_dataset(const std::string& dir, const DatasetHeader& header,
                  const std::vector<Transition>& transitions) {
  if (transitions.empty()) throw std::invalid_argument("save_dataset: empty dataset rejected");
  fs::create_directories(dir);

  json j;
  j["format_version"] = header.format_version;
  j["env"] = header.env_name;
  j["image_height"] = header.image_height;
  j["image_width"] = header.image_width;
  j["n_actions"] = header.n_actions;
  j["count"] = transitions.size();
  if (!header.env_config_json.empty())
    j["env_config"] = json::parse(header.env_config_json);
  std::ofstream hdr(fs::path(dir) / "header.json");
  hdr << j.dump(2) << "\n";

  std::ofstream bin(fs::path(dir) / "transitions.bin", std::ios::binary);
  for (const Transition& t : transitions) {
    if (t.o.height != header.image_height || t.o.width != header.image_width ||
        !t.o.same_shape(t.o_next))
      throw std::invalid_argument("save_dataset: transition shape does not match header");
    write_pod(bin, static_cast<std::uint32_t>(t.a.index));
    write_pod(bin, t.r);
    write_pod(bin, static_cast<std::uint8_t>(t.done ? 1 : 0));
    write_obs(bin, t.o);
    write_obs(bin, t.o_next);
  }
  if (!bin) throw std::runtime_error("save_dataset: write failed for " + dir);
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream hdr(fs::path(dir) / "header.json");
  if (!hdr) throw std::runtime_error("load_dataset: missing header.json in " + dir);
  json j = json::parse(hdr);

  Dataset d;
  d.header.format_version = j.at("format_version").get<int>();
  if (d.header.format_version != 1)
    throw std::runtime_error("load_dataset: unsupported format_version");
  d.header.env_name = j.at("env").get<std::string>();
  d.header.image_height = j.at("image_height").get<int>();
  d.header.image_width = j.at("image_width").get<int>();
  d.header.n_actions = j.at("n_actions").get<int>();
  d.header.count = j.at("count").get<std::uint64_t>();
  if (j.contains("env_config")) d.header.env_config_json = j["env_config"].dump();

  std::ifstream bin(fs::path(dir) / "transitions.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_dataset: missing transitions.bin in " + dir);
  d.transitions.reserve(d.header.count);
  for (std::uint64_t i = 0; i < d.header.count; ++i) {
    Transition t;
    t.a.index = static_cast<int>(read_pod<std::uint32_t>(bin));
    t.a.K = d.header.n_actions;
    t.r = read_pod<double>(bin);
    t.done = read_pod<std::uint8_t>(bin) != 0;
    t.o = read_obs(bin, d.header.image_height, d.header.image_width);
    t.o_next = read_obs(bin, d.header.image_height, d.header.image_width);
    d.transitions.push_back(std::move(t));
  }
  return d;
}

}  // namespace latmdp
