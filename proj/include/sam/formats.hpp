#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sam/density.hpp"
#include "sam/region.hpp"
#include "sam/types.hpp"

namespace sam {

/// Metadata size of one rank, in bits.
struct RankBits {
  double expected = 0;
  double worst = 0;
};

/// Per-fiber metadata bits of a single rank holding `fiber_length`
/// coordinates with the given occupancy distribution.
RankBits rank_metadata_bits(const RankFormat& format, std::int64_t fiber_length,
                            const OccupancyDistribution& occupancy, int width);

/// Expected zero-payload placeholders an RLE fiber of `length` needs when it
/// holds `nonzeros` uniformly placed nonzeros and runs saturate at `max_run`.
double expected_rle_placeholders(std::int64_t length, std::int64_t nonzeros, std::int64_t max_run);

/// Placeholders for an explicit fiber (one flag per coordinate).
std::int64_t rle_placeholders(const std::vector<bool>& nonempty, std::int64_t max_run);

struct RankFootprint {
  RankKind kind = RankKind::U;
  std::int64_t fiber_length = 1;  // coordinates per fiber
  int width = 0;                  // per-entry metadata width in bits
  double fibers = 1;              // instantiated fibers in this rank
  double nonempty = 0;            // nonempty coordinates across all fibers
  double instantiated = 0;        // stored coordinates across all fibers
  double expected_bits = 0;
  double worst_bits = 0;
};

struct FormatFootprint {
  std::vector<RankFootprint> ranks;
  std::int64_t tile_size = 1;
  double data_words = 0;        // expected stored payload words
  double worst_data_words = 0;  // stored words at full occupancy
  double metadata_bits = 0;
  double worst_metadata_bits = 0;
};

/// Per-rank coordinate count of a tile for a format bound to a tensor's
/// projection; fails when the ranks do not cover every dim exactly once.
std::vector<std::int64_t> rank_lengths(const RepresentationFormat& format, const std::vector<std::string>& projection,
                                       const std::vector<std::int64_t>& tile_extents);

/// Expected footprint of an aligned tile averaged over its placements.
FormatFootprint tensor_representation_size(const RepresentationFormat& format,
                                           const std::vector<std::string>& projection,
                                           const std::vector<std::int64_t>& tile_extents, const DensityModel& model);

/// Exact footprint of one concrete tile of a coordinate-dependent model.
FormatFootprint tensor_representation_size(const RepresentationFormat& format,
                                           const std::vector<std::string>& projection, const Region& tile,
                                           const DensityModel& model);

/// Rank formats of a named classic layout bound to `dims` in order.
RepresentationFormat describe_classic_format(const std::string& name, const std::vector<std::string>& dims);

/// Metadata width a rank uses when none is given: CP and RLE take
/// ceil(log2(length)), UOP takes ceil(log2(next_length + 1)).
int default_rank_width(RankKind kind, std::int64_t length, std::int64_t next_length);

int ceil_log2(std::int64_t x);

}  // namespace sam
