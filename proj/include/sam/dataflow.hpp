#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sam/region.hpp"
#include "sam/types.hpp"

namespace sam {

/// Bit i set = loop i of the flattened nest.
using LoopMask = std::uint64_t;

struct NestLoop {
  int dim = 0;
  std::int64_t factor = 1;
  bool spatial = false;
  int level = 0;  // storage level that owns the loop
};

/// The mapping flattened into one loop nest, outermost loop first. Factor-1
/// loops are dropped; within a level temporal loops precede spatial ones.
/// Level index `num_levels()` denotes the compute level.
class LoopNest {
 public:
  LoopNest(const Workload& workload, const Architecture& arch, const Mapping& mapping);

  const std::vector<NestLoop>& loops() const { return loops_; }
  int size() const { return static_cast<int>(loops_.size()); }
  int num_levels() const { return num_levels_; }
  int compute_level() const { return num_levels_; }
  const Workload& workload() const { return *workload_; }

  bool keeps(int level, int tensor) const;
  /// Storage levels keeping `tensor`, outermost first.
  const std::vector<int>& chain(int tensor) const { return chains_[static_cast<std::size_t>(tensor)]; }
  /// Next keeping level strictly inside `level` (compute when none).
  int child_of(int level, int tensor) const;
  /// Innermost keeping level strictly outside `level` (-1 when none).
  int parent_of(int level, int tensor) const;

  /// Loops owned by levels strictly outside `level`.
  LoopMask above(int level) const;
  LoopMask relevant(int tensor) const;
  LoopMask spatial() const { return spatial_; }
  LoopMask all() const;

  /// Index of the innermost temporal loop above `level` that indexes
  /// `tensor`, or -1.
  int last_relevant_temporal(int level, int tensor) const;
  /// Loops whose change starts a new residency of `tensor` at `level`.
  LoopMask residency_mask(int level, int tensor) const;
  /// Spatial loops between `parent` and `child` that do not index `tensor`.
  LoopMask multicast_mask(int parent, int child, int tensor) const;

  std::int64_t product(LoopMask mask) const;
  std::int64_t tile_words(int level, int tensor) const;
  /// Extent of each of the tensor's dims in its tile at `level`.
  std::vector<std::int64_t> tile_extents(int level, int tensor) const;

  /// Region of `tensor` swept when the loops in `fixed` are held.
  RegionShape region_shape(int tensor, LoopMask fixed) const;
  Region region_at(int tensor, LoopMask fixed, const std::vector<std::int64_t>& values) const;

  /// Visit every value assignment of the loops in `mask`; other entries of
  /// the value vector stay 0.
  void for_each_assignment(LoopMask mask, const std::function<void(const std::vector<std::int64_t>&)>& f) const;

 private:
  const Workload* workload_;
  int num_levels_;
  std::vector<NestLoop> loops_;
  std::vector<int> level_begin_;  // first loop index per level, plus end
  std::vector<std::vector<bool>> keeps_;
  std::vector<std::vector<int>> chains_;
  std::vector<LoopMask> relevant_;
  LoopMask spatial_ = 0;
};

struct TileShape {
  std::vector<std::int64_t> extents;         // per workload dim
  std::vector<std::int64_t> tensor_extents;  // per projection dim
  std::int64_t size = 1;                     // product over the projection
};

/// [level][tensor]; the last level row is the compute level.
std::vector<std::vector<TileShape>> tile_shapes(const Workload& workload, const Architecture& arch,
                                                const Mapping& mapping);

struct DenseCounts {
  double reads = 0;
  double fills = 0;
  double updates = 0;
};

/// One parent-to-child hop of a tensor along its keep chain.
struct Boundary {
  int tensor = 0;
  int parent = 0;
  int child = 0;  // compute level index when the child is compute
  bool output = false;
  std::int64_t words_per_tile = 1;
  std::int64_t multicast = 1;
  std::int64_t tiles_transferred = 0;   // child residencies over all instances
  std::int64_t parent_read_events = 0;  // distinct parent reads of a tile
  std::int64_t distinct_tiles = 0;      // output: first-touch residencies
  LoopMask residency = 0;
  LoopMask parent_events = 0;
};

struct DenseTraffic {
  std::vector<std::vector<DenseCounts>> per_level;  // [storage level][tensor]
  std::vector<Boundary> boundaries;
  std::int64_t compute_count = 0;
};

DenseTraffic dense_traffic(const Workload& workload, const Architecture& arch, const Mapping& mapping);
DenseTraffic dense_traffic(const LoopNest& nest);

/// Empty iff the mapping fits the workload and architecture.
std::vector<std::string> validate_mapping_structure(const Mapping& mapping, const Workload& workload,
                                                    const Architecture& arch);

}  // namespace sam
