#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sam/region.hpp"
#include "sam/types.hpp"

namespace sam {

/// Probability mass over the number of nonzeros in a tile.
struct OccupancyDistribution {
  std::vector<std::pair<std::int64_t, double>> support;  // ascending occupancy
  std::int64_t tile_size = 1;

  double probability(std::int64_t occupancy) const;
  double prob_empty() const { return probability(0); }
  double expected() const;
  double variance() const;
  double total() const;
};

/// Statistical (or exact) characterization of where a tensor's nonzeros lie.
class DensityModel {
 public:
  virtual ~DensityModel() = default;

  /// True when a tile's occupancy is a function of where the tile sits.
  virtual bool coordinate_dependent() const = 0;

  /// Occupancy of a region of this structure, mixed over all of its
  /// placements when the model distinguishes them.
  virtual OccupancyDistribution occupancy(const RegionShape& shape) const = 0;

  /// Probability that a region of this structure holds no nonzero.
  virtual double prob_empty(const RegionShape& shape) const;

  virtual double expected_occupancy(const RegionShape& shape) const;

  /// Exact occupancy of a concrete region. Only deterministic models answer.
  virtual std::int64_t occupancy_at(const Region& region) const;

  /// Extent per tensor dim.
  const std::vector<std::int64_t>& bounds() const { return bounds_; }
  std::int64_t total_size() const;

 protected:
  explicit DensityModel(std::vector<std::int64_t> bounds) : bounds_(std::move(bounds)) {}

 private:
  std::vector<std::int64_t> bounds_;
};

/// Random placement of a fixed nonzero count (default), or independent
/// Bernoulli cells when `bernoulli` is set.
class UniformModel final : public DensityModel {
 public:
  UniformModel(std::vector<std::int64_t> bounds, double density, bool bernoulli = false);

  bool coordinate_dependent() const override { return false; }
  OccupancyDistribution occupancy(const RegionShape& shape) const override;
  double prob_empty(const RegionShape& shape) const override;
  double expected_occupancy(const RegionShape& shape) const override;

  double density() const { return density_; }
  std::int64_t nonzero_count() const { return nonzeros_; }
  bool bernoulli() const { return bernoulli_; }

 private:
  double density_;
  bool bernoulli_;
  std::int64_t nonzeros_;
};

/// Exactly `n` nonzeros in every aligned block of `m` along one dim, with
/// positions inside a block equally likely.
class FixedStructuredModel final : public DensityModel {
 public:
  FixedStructuredModel(std::vector<std::int64_t> bounds, std::int64_t n, std::int64_t m, int block_dim);

  bool coordinate_dependent() const override { return false; }
  OccupancyDistribution occupancy(const RegionShape& shape) const override;

  std::int64_t n() const { return n_; }
  std::int64_t m() const { return m_; }
  int block_dim() const { return block_dim_; }

 private:
  std::int64_t n_;
  std::int64_t m_;
  int block_dim_;
};

/// Deterministic band: (i, j) is nonzero iff |i - j| < ceil(band_width / 2).
class BandedModel final : public DensityModel {
 public:
  BandedModel(std::vector<std::int64_t> bounds, std::int64_t band_width, int row_dim, int col_dim);

  bool coordinate_dependent() const override { return true; }
  OccupancyDistribution occupancy(const RegionShape& shape) const override;
  std::int64_t occupancy_at(const Region& region) const override;
  bool nonzero(const std::vector<std::int64_t>& coord) const;

 private:
  std::int64_t half_width_;
  int row_dim_;
  int col_dim_;
};

/// Exact nonzero coordinates loaded from a file or built in memory.
class ActualDataModel final : public DensityModel {
 public:
  explicit ActualDataModel(std::shared_ptr<const ConcreteTensor> tensor);

  bool coordinate_dependent() const override { return true; }
  OccupancyDistribution occupancy(const RegionShape& shape) const override;
  std::int64_t occupancy_at(const Region& region) const override;

  const ConcreteTensor& tensor() const { return *tensor_; }

 private:
  std::shared_ptr<const ConcreteTensor> tensor_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::int64_t> strides_;
};

/// Builds the model for a tensor; `bounds` are the tensor's extents in
/// projection order.
std::unique_ptr<DensityModel> make_density_model(const DensityModelSpec& spec, const TensorDecl& tensor,
                                                 const std::vector<std::int64_t>& bounds);

/// Occupancy of an aligned tile with the given extents. Pass `origin` (the
/// tile's first coordinate) for a coordinate-dependent query; banded models
/// require it.
OccupancyDistribution occupancy_distribution(const DensityModel& model, const std::vector<std::int64_t>& extents,
                                             const std::optional<std::vector<std::int64_t>>& origin = std::nullopt);
double prob_empty(const DensityModel& model, const std::vector<std::int64_t>& extents,
                  const std::optional<std::vector<std::int64_t>>& origin = std::nullopt);
double expected_occupancy(const DensityModel& model, const std::vector<std::int64_t>& extents);

/// Reads the coordinate file format: `dims: d0 d1 ...` then one nonzero
/// coordinate per line.
std::shared_ptr<const ConcreteTensor> load_actual_data(const std::string& path);
std::shared_ptr<const ConcreteTensor> parse_actual_data(const std::string& text, const std::string& source = "");

// Exact hypergeometric weights: number of placements of `nonzeros` among
// `population` cells that put exactly j nonzeros in a fixed `draws`-cell
// window, for j = 0..draws, and the total number of placements.
struct HypergeometricCounts {
  std::vector<unsigned __int128> ways;
  unsigned __int128 total = 0;
};
HypergeometricCounts hypergeometric_counts(std::int64_t population, std::int64_t nonzeros, std::int64_t draws);

/// P(occupancy = j) for j = 0..draws when drawing `draws` cells without
/// replacement from `population` cells holding `nonzeros` nonzeros.
std::vector<double> hypergeometric_pmf(std::int64_t population, std::int64_t nonzeros, std::int64_t draws);

}  // namespace sam
