#pragma once

#include <cstdint>
#include <limits>

namespace bdsm {

using VertexId = std::uint32_t;
using LabelId = std::uint32_t;
using QueryVertexId = std::uint32_t;

inline constexpr VertexId kInvalidVertex = std::numeric_limits<VertexId>::max();
inline constexpr LabelId kNoLabel = std::numeric_limits<LabelId>::max();

// Unordered pair key for edge maps: (min, max) packed into 64 bits.
inline std::uint64_t edge_pair_key(VertexId u, VertexId v) {
  if (u > v) {
    VertexId t = u;
    u = v;
    v = t;
  }
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

}  // namespace bdsm
