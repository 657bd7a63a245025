#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sam {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorKind { syntax, reference, invariant, io, unsupported };

struct Location {
  std::string file;
  int line = 0;    // 1-based, 0 = unknown
  int column = 0;  // 1-based, 0 = unknown

  std::string str() const;
};

/// A defect in the input specifications. Always names where and what.
class SpecError : public std::runtime_error {
 public:
  SpecError(ErrorKind kind, Location where, std::string entity, const std::string& what);

  ErrorKind kind() const { return kind_; }
  const Location& where() const { return where_; }
  const std::string& entity() const { return entity_; }

 private:
  ErrorKind kind_;
  Location where_;
  std::string entity_;
};

/// A failure while evaluating a well-formed problem (missing energy entry,
/// zero bandwidth with traffic, oracle size limit, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* to_string(ErrorKind kind);

// ---------------------------------------------------------------------------
// Workload
// ---------------------------------------------------------------------------

struct DimDecl {
  std::string name;
  std::int64_t bound = 1;
  bool operator==(const DimDecl&) const = default;
};

/// Exact nonzero coordinates of a tensor; values are irrelevant to the model.
struct ConcreteTensor {
  std::vector<std::int64_t> dims;                  // extent per tensor rank
  std::vector<std::vector<std::int64_t>> nonzeros;  // sorted, unique

  std::int64_t size() const;
  std::int64_t linear_index(const std::vector<std::int64_t>& coord) const;
  /// Dense 0/1 occupancy, row-major over dims.
  std::vector<std::uint8_t> bitmap() const;
  bool operator==(const ConcreteTensor&) const = default;
};

enum class DensityKind { uniform, fixed_structured, banded, actual_data };

struct DensityModelSpec {
  DensityKind kind = DensityKind::uniform;
  // uniform
  double density = 1.0;
  bool bernoulli = false;
  // fixed_structured: at most `n` nonzeros per aligned block of `m` along `dim`
  std::int64_t n = 1;
  std::int64_t m = 1;
  std::string dim;
  // banded: nonzero iff |i - j| < ceil(band_width / 2) over band_dims
  std::int64_t band_width = 1;
  std::vector<std::string> band_dims;
  // actual_data
  std::string path;
  std::shared_ptr<const ConcreteTensor> data;

  bool operator==(const DensityModelSpec& o) const;
};

struct TensorDecl {
  std::string name;
  std::vector<std::string> projection;
  std::optional<DensityModelSpec> density;
  bool is_output = false;
  bool operator==(const TensorDecl&) const = default;
};

struct Workload {
  std::vector<DimDecl> dims;
  std::vector<TensorDecl> tensors;

  int dim_index(const std::string& name) const;     // -1 if absent
  int tensor_index(const std::string& name) const;  // -1 if absent
  int output_index() const;
  std::int64_t bound(int dim) const { return dims[static_cast<std::size_t>(dim)].bound; }
  /// Dim indices of a tensor's projection, in projection order.
  std::vector<int> tensor_dims(int tensor) const;
  bool tensor_has_dim(int tensor, int dim) const;
  std::int64_t total_operations() const;
  bool operator==(const Workload&) const = default;
};

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------

struct StorageLevel {
  std::string name;
  double capacity_bits = 0;
  double read_bandwidth = 1;   // words / cycle / instance
  double write_bandwidth = 1;  // words / cycle / instance
  int word_width = 8;          // bits
  int metadata_word_width = 0; // bits; 0 = same as word_width
  std::int64_t fanout = 1;     // child instances per instance

  int metadata_width() const { return metadata_word_width > 0 ? metadata_word_width : word_width; }
  bool operator==(const StorageLevel&) const = default;
};

struct ComputeLevel {
  std::string name = "Compute";
  std::int64_t num_units = 1;
  bool operator==(const ComputeLevel&) const = default;
};

struct Architecture {
  std::vector<StorageLevel> storage;  // outermost first
  ComputeLevel compute;

  int level_index(const std::string& name) const;  // storage index, -1 if absent
  int num_storage() const { return static_cast<int>(storage.size()); }
  /// Instances of storage level `level` (product of fanouts above it).
  std::int64_t instances(int level) const;
  bool operator==(const Architecture&) const = default;
};

// ---------------------------------------------------------------------------
// Sparse acceleration features
// ---------------------------------------------------------------------------

enum class RankKind { U, UB, B, CP, RLE, UOP };

struct RankFormat {
  RankKind kind = RankKind::U;
  std::vector<std::string> dims;  // flattened group, outermost first
  std::optional<int> width;       // coordinate / run-length / offset width override
  bool operator==(const RankFormat&) const = default;
};

struct RepresentationFormat {
  std::vector<RankFormat> ranks;  // outermost rank first
  bool compressed() const;        // any rank other than U
  bool operator==(const RepresentationFormat&) const = default;
};

enum class SafKind { gate, skip };

struct ActionOptimization {
  SafKind kind = SafKind::gate;
  std::string target;                     // tensor name, or "compute" at the compute level
  std::vector<std::string> condition_on;  // leaders
  bool operator==(const ActionOptimization&) const = default;
};

struct LevelSafs {
  std::string level;
  std::map<std::string, RepresentationFormat> formats;
  std::vector<ActionOptimization> actions;
  bool operator==(const LevelSafs&) const = default;
};

struct SafSpec {
  std::vector<LevelSafs> levels;

  const LevelSafs* find(const std::string& level) const;
  const RepresentationFormat* format(const std::string& level, const std::string& tensor) const;
  bool operator==(const SafSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Mapping
// ---------------------------------------------------------------------------

struct Loop {
  std::string dim;
  std::int64_t factor = 1;
  bool spatial = false;
  bool operator==(const Loop&) const = default;
};

struct LevelMapping {
  std::string level;
  std::vector<Loop> loops;        // outermost first
  std::vector<std::string> keep;  // tensors resident at this level
  bool operator==(const LevelMapping&) const = default;
};

struct Mapping {
  std::vector<LevelMapping> levels;  // one per storage level, outermost first
  bool operator==(const Mapping&) const = default;
};

struct LevelConstraints {
  std::string level;
  std::optional<std::vector<std::string>> keep;
  std::map<std::string, std::int64_t> temporal_factors;  // pinned
  std::map<std::string, std::int64_t> spatial_factors;   // pinned
  std::map<std::string, std::int64_t> factor_multiple_of;
  std::vector<std::string> order;  // partial order, outermost first
  bool operator==(const LevelConstraints&) const = default;
};

struct MapspaceConstraints {
  std::vector<LevelConstraints> levels;
  const LevelConstraints* find(const std::string& level) const;
  bool operator==(const MapspaceConstraints&) const = default;
};

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

enum class EnergyAction { read, write, metadata_read, metadata_write, compute };

struct EnergyCost {
  double actual = 0;
  double gated = 0;
  bool operator==(const EnergyCost&) const = default;
};

struct EnergyTable {
  std::map<std::pair<std::string, EnergyAction>, EnergyCost> entries;

  const EnergyCost* find(const std::string& component, EnergyAction action) const;
  bool operator==(const EnergyTable&) const = default;
};

const char* to_string(EnergyAction a);
const char* to_string(RankKind k);
const char* to_string(SafKind k);
const char* to_string(DensityKind k);

struct Problem {
  Workload workload;
  Architecture architecture;
  SafSpec safs;
  Mapping mapping;
  EnergyTable energy;
  bool operator==(const Problem&) const = default;
};

}  // namespace sam
