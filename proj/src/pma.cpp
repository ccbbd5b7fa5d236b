#include "bdsm/pma.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>

namespace bdsm {

namespace {

std::size_t log2_floor(std::size_t x) {
  return static_cast<std::size_t>(std::bit_width(x) - 1);
}

}  // namespace

PackedMemoryArray::PackedMemoryArray() {
  slots_.assign(kMinCapacity, kPmaEmpty);
  segment_size_ = segment_size_for(kMinCapacity);
  seg_first_.assign(segment_count(), kPmaEmpty);
  seg_occ_.assign(segment_count(), 0);
}

PackedMemoryArray PackedMemoryArray::from_sorted(const std::vector<PmaKey>& keys) {
  PackedMemoryArray pma;
  assert(std::is_sorted(keys.begin(), keys.end()));
  pma.rebuild(keys);
  return pma;
}

std::size_t PackedMemoryArray::segment_size_for(std::size_t capacity) {
  std::size_t want = log2_floor(std::max<std::size_t>(capacity, 2));
  return std::max<std::size_t>(8, std::bit_ceil(want));
}

// Capacity leaving the root density inside [0.35, 0.70).
std::size_t PackedMemoryArray::capacity_for(std::size_t n) {
  if (n == 0) return kMinCapacity;
  auto target = static_cast<std::size_t>(std::floor(static_cast<double>(n) / 0.35));
  std::size_t cap = std::max<std::size_t>(kMinCapacity, std::bit_floor(std::max<std::size_t>(target, 1)));
  while (cap < n) cap *= 2;  // tiny n guard
  return cap;
}

std::size_t PackedMemoryArray::tree_height() const {
  return log2_floor(segment_count());
}

PmaDensityBounds PackedMemoryArray::bounds_at_height(std::size_t h) const {
  std::size_t height = tree_height();
  double t = height == 0 ? 0.0 : static_cast<double>(h) / static_cast<double>(height);
  return {kLeafBounds.lower + (kRootBounds.lower - kLeafBounds.lower) * t,
          kLeafBounds.upper - (kLeafBounds.upper - kRootBounds.upper) * t};
}

bool PackedMemoryArray::contains(PmaKey key) const {
  if (size_ == 0) return false;
  std::size_t seg = locate_segment(key);
  std::size_t base = seg * segment_size_;
  for (std::size_t i = base; i < base + segment_size_; ++i) {
    if (slots_[i] == key) return true;
  }
  return false;
}

std::size_t PackedMemoryArray::locate_segment(PmaKey key) const {
  // seg_first_ holds kPmaEmpty for empty segments; among occupied segments
  // first keys are strictly increasing, so a binary search over the occupied
  // entries suffices. We scan the summary directly: segment count is small
  // (capacity / segment_size), so use a branchless-ish binary search over a
  // compacted view would be overkill; do binary search over all segments
  // treating empties as "inherit previous".
  std::size_t lo = 0, hi = seg_first_.size();  // find last occupied seg with first <= key
  std::size_t best = seg_first_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    // Find the nearest occupied segment at or before mid.
    std::size_t probe = mid;
    while (probe > 0 && seg_first_[probe] == kPmaEmpty) --probe;
    if (seg_first_[probe] == kPmaEmpty) {
      // Everything up to mid is empty; answer lies to the right.
      lo = mid + 1;
      continue;
    }
    if (seg_first_[probe] <= key) {
      best = probe;
      lo = mid + 1;
    } else {
      hi = probe;  // all of [probe, mid] have first > key or empty
    }
  }
  return best == seg_first_.size() ? 0 : best;
}

std::size_t PackedMemoryArray::locate_segment_linear(PmaKey key) const {
  std::size_t best = seg_first_.size();
  for (std::size_t s = 0; s < seg_first_.size(); ++s) {
    if (seg_first_[s] != kPmaEmpty && seg_first_[s] <= key) best = s;
  }
  return best == seg_first_.size() ? 0 : best;
}

std::vector<PmaKey> PackedMemoryArray::occupied_keys() const {
  std::vector<PmaKey> out;
  out.reserve(size_);
  for (PmaKey k : slots_) {
    if (k != kPmaEmpty) out.push_back(k);
  }
  return out;
}

std::size_t PackedMemoryArray::window_occupancy(std::size_t first_slot,
                                                std::size_t slot_count) const {
  std::size_t first_seg = first_slot / segment_size_;
  std::size_t segs = slot_count / segment_size_;
  std::size_t occ = 0;
  for (std::size_t s = first_seg; s < first_seg + segs; ++s) occ += seg_occ_[s];
  return occ;
}

void PackedMemoryArray::rewrite_window(std::size_t first_slot, std::size_t slot_count,
                                       const std::vector<PmaKey>& keys) {
  assert(keys.size() <= slot_count);
  std::fill(slots_.begin() + first_slot, slots_.begin() + first_slot + slot_count,
            kPmaEmpty);
  std::size_t m = keys.size();
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t at = first_slot + j * slot_count / m;
    slots_[at] = keys[j];
  }
  refresh_segment_summary(first_slot / segment_size_, slot_count / segment_size_);
}

void PackedMemoryArray::refresh_segment_summary(std::size_t first_seg,
                                                std::size_t seg_count) {
  for (std::size_t s = first_seg; s < first_seg + seg_count; ++s) {
    PmaKey first = kPmaEmpty;
    std::uint32_t occ = 0;
    std::size_t base = s * segment_size_;
    for (std::size_t i = base; i < base + segment_size_; ++i) {
      if (slots_[i] == kPmaEmpty) continue;
      if (first == kPmaEmpty) first = slots_[i];
      ++occ;
    }
    seg_first_[s] = first;
    seg_occ_[s] = occ;
  }
}

void PackedMemoryArray::rebuild(std::vector<PmaKey> keys) {
  std::size_t cap = capacity_for(keys.size());
  slots_.assign(cap, kPmaEmpty);
  segment_size_ = segment_size_for(cap);
  seg_first_.assign(segment_count(), kPmaEmpty);
  seg_occ_.assign(segment_count(), 0);
  size_ = keys.size();
  ++stats_.rebuilds;
  if (!keys.empty()) rewrite_window(0, cap, keys);
}

void PackedMemoryArray::apply(std::vector<PmaKey> inserts, std::vector<PmaKey> erases) {
  struct Pending {
    PmaKey key;
    bool insert;
  };
  std::vector<Pending> pending;
  pending.reserve(inserts.size() + erases.size());
  for (PmaKey k : inserts) pending.push_back({k, true});
  for (PmaKey k : erases) pending.push_back({k, false});
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.key < b.key; });

  std::size_t next = 0;
  while (next < pending.size()) {
    // Group the pending prefix that lands in one leaf segment under the
    // current layout; every rebalance invalidates later groupings, so
    // grouping is re-derived as we go.
    std::size_t seg = locate_segment(pending[next].key);
    std::size_t group_end = next + 1;
    while (group_end < pending.size() &&
           locate_segment(pending[group_end].key) == seg) {
      ++group_end;
    }
    ++stats_.buckets_materialized;

    std::ptrdiff_t net = 0;
    for (std::size_t i = next; i < group_end; ++i) net += pending[i].insert ? 1 : -1;

    // The rewrite happens at the lowest node whose window and all ancestors
    // are within their post-update density bounds, i.e. one above the
    // highest violated node. A violated root forces a rebuild.
    std::size_t height = tree_height();
    std::size_t target_h = 0;
    for (std::size_t h = 0; h <= height; ++h) {
      std::size_t segs_in_window = std::size_t{1} << h;
      std::size_t wfirst_seg = (seg / segs_in_window) * segs_in_window;
      std::size_t wslots = segs_in_window * segment_size_;
      double density =
          static_cast<double>(static_cast<std::ptrdiff_t>(window_occupancy(
                                  wfirst_seg * segment_size_, wslots)) +
                              net) /
          static_cast<double>(wslots);
      PmaDensityBounds b = bounds_at_height(h);
      bool fits = density <= b.upper &&
                  (density >= b.lower || capacity() == kMinCapacity);
      if (!fits) target_h = h + 1;
    }
    // Even redistribution puts floor(m*S'/S)..ceil(m*S'/S) keys into each
    // aligned subwindow; escalate further if that rounding would leave a
    // descendant outside its own bounds.
    while (target_h <= height) {
      std::size_t segs_in_window = std::size_t{1} << target_h;
      std::size_t wfirst_seg = (seg / segs_in_window) * segs_in_window;
      std::size_t wslots = segs_in_window * segment_size_;
      auto m = static_cast<double>(
          static_cast<std::ptrdiff_t>(window_occupancy(wfirst_seg * segment_size_, wslots)) + net);
      bool ok = true;
      for (std::size_t h = 0; h < target_h && ok; ++h) {
        auto sub = static_cast<double>((std::size_t{1} << h) * segment_size_);
        double y = m * sub / static_cast<double>(wslots);
        PmaDensityBounds b = bounds_at_height(h);
        if (std::ceil(y) / sub > b.upper + 1e-9) ok = false;
        if (capacity() != kMinCapacity && std::floor(y) / sub < b.lower - 1e-9) ok = false;
      }
      if (ok) break;
      ++target_h;
    }
    if (target_h > 0 && target_h <= height) stats_.escalations += target_h;

    if (target_h > height) {
      // Root violated: rebuild at a fresh capacity with this group applied.
      std::vector<PmaKey> all = occupied_keys();
      std::vector<PmaKey> merged;
      merged.reserve(all.size() + static_cast<std::size_t>(std::max<std::ptrdiff_t>(net, 0)));
      std::size_t gi = next;
      for (PmaKey k : all) {
        bool drop = false;
        while (gi < group_end && pending[gi].key < k) {
          if (pending[gi].insert) merged.push_back(pending[gi].key);
          ++gi;
        }
        if (gi < group_end && pending[gi].key == k && !pending[gi].insert) {
          drop = true;
          ++gi;
        }
        if (!drop) merged.push_back(k);
      }
      for (; gi < group_end; ++gi) {
        if (pending[gi].insert) merged.push_back(pending[gi].key);
      }
      rebuild(std::move(merged));
    } else {
      std::size_t segs_in_window = std::size_t{1} << target_h;
      std::size_t wfirst_seg = (seg / segs_in_window) * segs_in_window;
      std::size_t wfirst_slot = wfirst_seg * segment_size_;
      std::size_t wslots = segs_in_window * segment_size_;
      std::vector<PmaKey> merged;
      merged.reserve(window_occupancy(wfirst_slot, wslots) + (group_end - next));
      std::size_t gi = next;
      for (std::size_t i = wfirst_slot; i < wfirst_slot + wslots; ++i) {
        PmaKey k = slots_[i];
        if (k == kPmaEmpty) continue;
        bool drop = false;
        while (gi < group_end && pending[gi].key < k) {
          if (pending[gi].insert) merged.push_back(pending[gi].key);
          ++gi;
        }
        if (gi < group_end && pending[gi].key == k && !pending[gi].insert) {
          drop = true;
          ++gi;
        }
        if (!drop) merged.push_back(k);
      }
      for (; gi < group_end; ++gi) {
        if (pending[gi].insert) merged.push_back(pending[gi].key);
      }
      size_ = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(size_) + net);
      rewrite_window(wfirst_slot, wslots, merged);
    }
    next = group_end;
  }
}

bool PackedMemoryArray::check_sorted() const {
  PmaKey prev = 0;
  bool first = true;
  for (PmaKey k : slots_) {
    if (k == kPmaEmpty) continue;
    if (!first && k <= prev) return false;
    prev = k;
    first = false;
  }
  return true;
}

bool PackedMemoryArray::check_density(std::string* why) const {
  std::size_t height = tree_height();
  for (std::size_t h = 0; h <= height; ++h) {
    std::size_t segs_in_window = std::size_t{1} << h;
    std::size_t wslots = segs_in_window * segment_size_;
    PmaDensityBounds b = bounds_at_height(h);
    for (std::size_t wfirst = 0; wfirst < segment_count(); wfirst += segs_in_window) {
      double density = static_cast<double>(window_occupancy(wfirst * segment_size_, wslots)) /
                       static_cast<double>(wslots);
      bool low_ok = density >= b.lower - 1e-9 || capacity() == kMinCapacity;
      bool high_ok = density <= b.upper + 1e-9;
      if (!low_ok || !high_ok) {
        if (why) {
          *why = "node h=" + std::to_string(h) + " seg=" + std::to_string(wfirst) +
                 " density=" + std::to_string(density);
        }
        return false;
      }
    }
  }
  return true;
}

bool PackedMemoryArray::check_segment_index() const {
  for (std::size_t s = 0; s < segment_count(); ++s) {
    PmaKey first = kPmaEmpty;
    std::uint32_t occ = 0;
    std::size_t base = s * segment_size_;
    for (std::size_t i = base; i < base + segment_size_; ++i) {
      if (slots_[i] == kPmaEmpty) continue;
      if (first == kPmaEmpty) first = slots_[i];
      ++occ;
    }
    if (first != seg_first_[s] || occ != seg_occ_[s]) return false;
  }
  return true;
}

}  // namespace bdsm
