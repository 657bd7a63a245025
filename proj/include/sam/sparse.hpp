#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "sam/dataflow.hpp"
#include "sam/density.hpp"
#include "sam/formats.hpp"
#include "sam/types.hpp"

namespace sam {

enum class ActionKind { read, fill, update, metadata_read, metadata_fill, compute };
const char* to_string(ActionKind a);

struct ActionCounts {
  double dense = 0;
  double actual = 0;
  double gated = 0;
  double skipped() const { return dense - actual - gated; }
};

/// `tensor` is -1 for compute entries; `level` equals the storage level
/// count for the compute level.
struct EntryKey {
  int level = 0;
  int tensor = -1;
  ActionKind action = ActionKind::read;
  auto operator<=>(const EntryKey&) const = default;
};

using ActionBreakdown = std::map<EntryKey, ActionCounts>;

/// One leader-follower relation after expanding double-sided and joint
/// conditions. `follower` is -1 for the compute level.
struct IntersectionBinding {
  int level = 0;
  int follower = -1;
  int leader = 0;
  SafKind kind = SafKind::gate;
  LoopMask leader_fixed = 0;       // loops held while one follower tile is live
  RegionShape leader_tile;         // leader coordinates checked per follower tile
  std::vector<std::int64_t> follower_tile;
};

/// A condition that eliminates an action when the leader region is empty.
struct Cause {
  SafKind kind = SafKind::gate;
  int leader = 0;
  LoopMask fixed = 0;
  bool operator==(const Cause&) const = default;
};
using CauseSet = std::vector<Cause>;

struct EventFractions {
  double actual = 1;
  double gated = 0;
  double skipped = 0;
};

/// Cause sets of every event class of the run.
struct SavingsPlan {
  struct Hop {
    Boundary boundary;
    CauseSet residency;      // child fill / child residency
    CauseSet parent_read;    // parent data read
    CauseSet metadata_read;  // parent metadata read
  };
  std::vector<Hop> hops;
  CauseSet compute;
  CauseSet output_update;  // updates from compute into the innermost output level
  int output_level = -1;
};

using DensityModels = std::vector<std::shared_ptr<const DensityModel>>;

/// One model per tensor (null for the output).
DensityModels build_density_models(const Workload& workload);

/// Validates the SAF spec against the mapping and resolves leader tiles.
std::vector<IntersectionBinding> resolve_intersection_operands(const Problem& problem, const LoopNest& nest);

/// Fractions for one event whose cause regions are judged statistically.
EventFractions per_tile_action_breakdown(const CauseSet& causes, const LoopNest& nest, const DensityModels& models);

/// Pushes eliminations at outer levels down to inner residencies and compute.
SavingsPlan propagate_savings(const std::vector<IntersectionBinding>& bindings, const LoopNest& nest,
                              const DenseTraffic& dense);

struct TensorFootprint {
  double data_bits = 0;
  double worst_data_bits = 0;
  double metadata_bits = 0;
  double worst_metadata_bits = 0;
};

struct SparseTraffic {
  ActionBreakdown actions;
  std::vector<std::vector<TensorFootprint>> footprints;  // [storage level][tensor]; zero if not kept
  std::map<std::pair<int, int>, std::int64_t> read_multicast;  // (level, tensor) -> children per read
  std::vector<std::int64_t> active_instances;  // per storage level, then compute units in use
};

/// Whole-run counts with data and metadata actions labeled.
ActionBreakdown compose_format_and_actions(const Problem& problem, const LoopNest& nest, const SavingsPlan& plan,
                                           const DensityModels& models);

SparseTraffic sparse_traffic(const Problem& problem, const LoopNest& nest, const DenseTraffic& dense,
                             const DensityModels& models);
SparseTraffic sparse_traffic(const Problem& problem);

}  // namespace sam
