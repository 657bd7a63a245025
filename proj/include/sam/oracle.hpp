#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sam/sparse.hpp"
#include "sam/types.hpp"

namespace sam {

/// Exact per-entry counts of one simulated run; same keys as the analytic
/// breakdown. Metadata entries are bits divided by the metadata word width.
struct ExactCounts {
  ActionBreakdown entries;
};

struct OracleOptions {
  std::int64_t max_dim = 16;  // refuse workloads with a larger dim bound
};

using ConcreteTensors = std::vector<std::shared_ptr<const ConcreteTensor>>;  // per tensor; null for the output

/// Runs the literal loop nest over concrete data and labels every access.
ExactCounts simulate(const Problem& problem, const ConcreteTensors& tensors, const OracleOptions& options = {});

/// Concrete tensors of a problem whose operands all use actual-data models.
ConcreteTensors tensors_from_actual_data(const Workload& workload);

/// Concrete tensor drawn from a statistical model.
ConcreteTensor random_tensor(const std::vector<std::int64_t>& dims, const DensityModelSpec& spec,
                             const std::vector<std::string>& dim_names, std::uint64_t seed);

/// Stored payload words and metadata bits of a concrete tile under a format,
/// by building the fibertree explicitly. `lo`/`extent` locate the tile.
struct EncodedTile {
  std::int64_t words = 0;
  double metadata_bits = 0;
};
EncodedTile encode_tile(const ConcreteTensor& tensor, const std::vector<std::string>& projection,
                        const RepresentationFormat& format, const std::vector<std::int64_t>& lo,
                        const std::vector<std::int64_t>& extent);

}  // namespace sam
