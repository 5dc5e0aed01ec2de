#pragma once

#include <cstdint>
#include <vector>

#include "kants/linalg.hpp"

namespace kants {

/// Result of a backward pass. `params` follows the network's parameter
/// layout; `input` is only filled when the caller asked for it.
struct Gradients {
  std::vector<double> params;
  Matrix input;
};

/// Identifies the exact parameter state a trace was recorded against.
struct TraceStamp {
  std::uint64_t network_id = 0;
  std::uint64_t version = 0;
  friend bool operator==(const TraceStamp&, const TraceStamp&) = default;
};

/// Process-unique id for a freshly constructed or copied network.
std::uint64_t next_network_id();

}  // namespace kants
