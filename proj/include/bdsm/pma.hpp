#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bdsm/types.hpp"

namespace bdsm {

// Sorted-array edge store with gaps. Keys are (src << 32) | dst; each
// undirected edge is stored in both directions. Segments form an implicit
// binary rebalance tree whose density bounds are interpolated between the
// leaf and root settings.
using PmaKey = std::uint64_t;
inline constexpr PmaKey kPmaEmpty = std::numeric_limits<PmaKey>::max();

inline PmaKey pma_key(VertexId src, VertexId dst) {
  return (static_cast<PmaKey>(src) << 32) | dst;
}
inline VertexId pma_src(PmaKey k) { return static_cast<VertexId>(k >> 32); }
inline VertexId pma_dst(PmaKey k) { return static_cast<VertexId>(k & 0xffffffffu); }

struct PmaDensityBounds {
  double lower;
  double upper;
};

struct PmaStats {
  std::uint64_t buckets_materialized = 0;
  std::uint64_t escalations = 0;
  std::uint64_t rebuilds = 0;
};

class PackedMemoryArray {
 public:
  PackedMemoryArray();
  static PackedMemoryArray from_sorted(const std::vector<PmaKey>& keys);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  std::size_t segment_size() const { return segment_size_; }
  std::size_t segment_count() const { return slots_.size() / segment_size_; }
  std::size_t tree_height() const;

  bool contains(PmaKey key) const;

  // Applies a batch of disjoint updates. Preconditions (checked by the
  // caller): inserts are absent, erases are present, no key appears twice.
  // Updates are grouped by leaf segment; a group that does not fit its
  // segment escalates to enclosing tree nodes bottom-up.
  void apply(std::vector<PmaKey> inserts, std::vector<PmaKey> erases);

  // Leaf segment whose key range contains `key` (the last non-empty segment
  // whose first key is <= key; 0 when the array is empty).
  std::size_t locate_segment(PmaKey key) const;
  // Same result computed by a linear scan, bypassing the summary index.
  std::size_t locate_segment_linear(PmaKey key) const;

  // Visits occupied keys in [lo, hi) in ascending order.
  template <typename Fn>
  void scan(PmaKey lo, PmaKey hi, Fn&& fn) const {
    if (size_ == 0) return;
    std::size_t seg = locate_segment(lo);
    for (std::size_t i = seg * segment_size_; i < slots_.size(); ++i) {
      PmaKey k = slots_[i];
      if (k == kPmaEmpty) continue;
      if (k >= hi) return;
      if (k >= lo) fn(k);
    }
  }

  std::vector<PmaKey> occupied_keys() const;

  // Interpolated density bounds for a node at height h (0 = leaf).
  PmaDensityBounds bounds_at_height(std::size_t h) const;

  // Invariant checks used by tests.
  bool check_sorted() const;
  bool check_density(std::string* why = nullptr) const;
  bool check_segment_index() const;

  const PmaStats& stats() const { return stats_; }
  void reset_stats() { stats_ = PmaStats{}; }

  static constexpr std::size_t kMinCapacity = 8;
  static constexpr PmaDensityBounds kLeafBounds{0.08, 0.92};
  static constexpr PmaDensityBounds kRootBounds{0.30, 0.70};

 private:
  void rebuild(std::vector<PmaKey> keys);
  void rewrite_window(std::size_t first_slot, std::size_t slot_count,
                      const std::vector<PmaKey>& keys);
  void refresh_segment_summary(std::size_t first_seg, std::size_t seg_count);
  std::size_t window_occupancy(std::size_t first_slot, std::size_t slot_count) const;
  static std::size_t segment_size_for(std::size_t capacity);
  static std::size_t capacity_for(std::size_t n);

  std::vector<PmaKey> slots_;
  std::vector<PmaKey> seg_first_;     // kPmaEmpty for empty segments
  std::vector<std::uint32_t> seg_occ_;
  std::size_t segment_size_ = kMinCapacity;
  std::size_t size_ = 0;
  PmaStats stats_;
};

}  // namespace bdsm
