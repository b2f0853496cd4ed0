#pragma once

#include "latmdp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace latmdp {

/// Versioned header of an on-disk transition dataset.
struct DatasetHeader {
  int format_version = 1;
  std::string env_name;
  int image_height = 0;
  int image_width = 0;
  int n_actions = 0;
  std::uint64_t count = 0;
  std::string env_config_json;  // opaque; reproduced verbatim on save
};

/// Writes a dataset directory: header.json + transitions.bin. Pixels are
/// stored as raw 8-bit RGB, rewards as 64-bit floats; the container
/// round-trips bit-exactly.
void save_dataset(const std::string& dir, const DatasetHeader& header,
                  const std::vector<Transition>& transitions);

struct Dataset {
  DatasetHeader header;
  std::vector<Transition> transitions;
};

Dataset load_dataset(const std::string& dir);

}  // namespace latmdp
