#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace sam {

/// One mixed-radix digit of a coordinate along a single dimension.
/// `free` digits span the region; fixed digits locate it.
struct Digit {
  std::int64_t factor = 1;
  bool free = false;
  bool operator==(const Digit&) const = default;
};

/// Structure of a coordinate region over a tensor's dims, independent of
/// where the region sits. Digits are most-significant first per dim.
/// An aligned box of extent e over a dim of bound b is {b/e fixed, e free}.
struct RegionShape {
  std::vector<std::vector<Digit>> dims;

  static RegionShape aligned_box(const std::vector<std::int64_t>& bounds,
                                 const std::vector<std::int64_t>& extents);

  std::int64_t size() const;                 // number of coordinates in the region
  std::int64_t positions() const;            // number of distinct placements
  std::vector<std::int64_t> bounds() const;  // full extent per dim
  std::vector<std::int64_t> extents() const; // free extent per dim
  bool operator==(const RegionShape&) const = default;
};

/// A concrete region: per dim, the coordinates it covers (ascending).
struct Region {
  std::vector<std::vector<std::int64_t>> coords;

  std::int64_t size() const;
  /// Visit every coordinate tuple (row-major over dims).
  void for_each(const std::function<void(const std::vector<std::int64_t>&)>& f) const;
};

/// Coordinates of a region given the values of its fixed digits, listed in
/// digit order (dim-major, most significant first).
Region place(const RegionShape& shape, const std::vector<std::int64_t>& fixed_values);

/// Visit every placement of `shape` (each fixed-digit assignment once).
void for_each_placement(const RegionShape& shape, const std::function<void(const Region&)>& f);

}  // namespace sam
