#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kants/data.hpp"
#include "kants/model.hpp"

namespace kants {

inline constexpr int kCheckpointVersion = 1;

/// A trained model plus what is needed to feed it new data.
struct Checkpoint {
  Model model;
  ForecastWindowSpec window;
  /// Per-beam records fitted on the training split; may be empty.
  std::vector<NormalizationRecord> normalization;
};

/// JSON container: format tag, version, family, shape, spline spec (KAN),
/// seed and parameters in storage order. Doubles round-trip bit-exactly.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kants
