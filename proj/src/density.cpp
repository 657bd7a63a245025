#include "sam/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sam {

namespace {

long double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgammal(static_cast<long double>(n) + 1) - std::lgammal(static_cast<long double>(k) + 1) -
         std::lgammal(static_cast<long double>(n - k) + 1);
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> convolve_power(std::vector<double> base, std::int64_t times) {
  std::vector<double> result{1.0};
  while (times > 0) {
    if (times & 1) result = convolve(result, base);
    times >>= 1;
    if (times > 0) base = convolve(base, base);
  }
  return result;
}

OccupancyDistribution from_pmf(const std::vector<double>& pmf, std::int64_t tile_size) {
  OccupancyDistribution d;
  d.tile_size = tile_size;
  for (std::size_t j = 0; j < pmf.size(); ++j)
    if (pmf[j] > 0.0) d.support.emplace_back(static_cast<std::int64_t>(j), pmf[j]);
  if (d.support.empty()) d.support.emplace_back(0, 1.0);
  return d;
}

OccupancyDistribution from_histogram(const std::map<std::int64_t, std::int64_t>& hist, std::int64_t tile_size) {
  OccupancyDistribution d;
  d.tile_size = tile_size;
  std::int64_t total = 0;
  for (const auto& [occ, n] : hist) total += n;
  for (const auto& [occ, n] : hist) d.support.emplace_back(occ, static_cast<double>(n) / static_cast<double>(total));
  return d;
}

std::int64_t product(const std::vector<std::int64_t>& v) {
  std::int64_t n = 1;
  for (auto x : v) n *= x;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

double OccupancyDistribution::probability(std::int64_t occupancy) const {
  for (const auto& [occ, p] : support)
    if (occ == occupancy) return p;
  return 0.0;
}

double OccupancyDistribution::expected() const {
  double e = 0.0;
  for (const auto& [occ, p] : support) e += static_cast<double>(occ) * p;
  return e;
}

double OccupancyDistribution::variance() const {
  const double mean = expected();
  double v = 0.0;
  for (const auto& [occ, p] : support) v += (static_cast<double>(occ) - mean) * (static_cast<double>(occ) - mean) * p;
  return v;
}

double OccupancyDistribution::total() const {
  double t = 0.0;
  for (const auto& [occ, p] : support) t += p;
  return t;
}

// ---------------------------------------------------------------------------

HypergeometricCounts hypergeometric_counts(std::int64_t population, std::int64_t nonzeros, std::int64_t draws) {
  auto choose = [](std::int64_t n, std::int64_t k) -> unsigned __int128 {
    if (k < 0 || k > n) return 0;
    unsigned __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<unsigned __int128>(n - k + i) / i;
    return r;
  };
  HypergeometricCounts h;
  h.total = choose(population, nonzeros);
  for (std::int64_t j = 0; j <= draws; ++j)
    h.ways.push_back(choose(draws, j) * choose(population - draws, nonzeros - j));
  return h;
}

std::vector<double> hypergeometric_pmf(std::int64_t population, std::int64_t nonzeros, std::int64_t draws) {
  std::vector<double> pmf(static_cast<std::size_t>(draws + 1), 0.0);
  const long double denom = log_choose(population, draws);
  for (std::int64_t j = 0; j <= draws; ++j) {
    if (j > nonzeros || draws - j > population - nonzeros) continue;
    pmf[static_cast<std::size_t>(j)] = static_cast<double>(
        std::exp(log_choose(nonzeros, j) + log_choose(population - nonzeros, draws - j) - denom));
  }
  return pmf;
}

// ---------------------------------------------------------------------------

double DensityModel::prob_empty(const RegionShape& shape) const { return occupancy(shape).prob_empty(); }

double DensityModel::expected_occupancy(const RegionShape& shape) const { return occupancy(shape).expected(); }

std::int64_t DensityModel::occupancy_at(const Region&) const {
  throw ModelError("density model is not coordinate-dependent; exact occupancy is undefined");
}

std::int64_t DensityModel::total_size() const { return product(bounds_); }

// --- uniform ----------------------------------------------------------------

UniformModel::UniformModel(std::vector<std::int64_t> bounds, double density, bool bernoulli)
    : DensityModel(std::move(bounds)), density_(density), bernoulli_(bernoulli) {
  nonzeros_ = static_cast<std::int64_t>(std::llround(density_ * static_cast<double>(total_size())));
}

OccupancyDistribution UniformModel::occupancy(const RegionShape& shape) const {
  const std::int64_t n = shape.size();
  if (bernoulli_) {
    std::vector<double> pmf(static_cast<std::size_t>(n + 1));
    for (std::int64_t j = 0; j <= n; ++j) {
      if (density_ >= 1.0) {
        pmf[static_cast<std::size_t>(j)] = j == n ? 1.0 : 0.0;
        continue;
      }
      pmf[static_cast<std::size_t>(j)] = static_cast<double>(
          std::exp(log_choose(n, j) + j * std::log(static_cast<long double>(density_)) +
                   (n - j) * std::log1p(-static_cast<long double>(density_))));
    }
    return from_pmf(pmf, n);
  }
  return from_pmf(hypergeometric_pmf(total_size(), nonzeros_, n), n);
}

double UniformModel::prob_empty(const RegionShape& shape) const {
  const std::int64_t n = shape.size();
  if (bernoulli_) return std::pow(1.0 - density_, static_cast<double>(n));
  const std::int64_t total = total_size();
  const std::int64_t zeros = total - nonzeros_;
  if (n > zeros) return 0.0;
  long double p = 1.0L;
  for (std::int64_t i = 0; i < n; ++i)
    p *= static_cast<long double>(zeros - i) / static_cast<long double>(total - i);
  return static_cast<double>(p);
}

double UniformModel::expected_occupancy(const RegionShape& shape) const {
  if (bernoulli_) return density_ * static_cast<double>(shape.size());
  return static_cast<double>(shape.size()) * static_cast<double>(nonzeros_) / static_cast<double>(total_size());
}

// --- fixed structured -------------------------------------------------------

FixedStructuredModel::FixedStructuredModel(std::vector<std::int64_t> bounds, std::int64_t n, std::int64_t m,
                                           int block_dim)
    : DensityModel(std::move(bounds)), n_(n), m_(m), block_dim_(block_dim) {}

OccupancyDistribution FixedStructuredModel::occupancy(const RegionShape& shape) const {
  const auto ext = shape.extents();
  std::int64_t lines = 1;
  for (std::size_t d = 0; d < ext.size(); ++d)
    if (static_cast<int>(d) != block_dim_) lines *= ext[d];

  // Mixture over placements along the block dim only; other dims just
  // replicate independent lines.
  RegionShape along;
  along.dims.push_back(shape.dims[static_cast<std::size_t>(block_dim_)]);
  std::map<std::vector<std::int64_t>, std::int64_t> coverage_patterns;
  for_each_placement(along, [&](const Region& r) {
    std::map<std::int64_t, std::int64_t> per_block;
    for (auto c : r.coords[0]) ++per_block[c / m_];
    std::vector<std::int64_t> cov;
    for (const auto& [b, k] : per_block) cov.push_back(k);
    std::sort(cov.begin(), cov.end());
    ++coverage_patterns[cov];
  });

  const std::int64_t size = shape.size();
  std::vector<double> mixture(static_cast<std::size_t>(size + 1), 0.0);
  std::int64_t placements = 0;
  for (const auto& [cov, weight] : coverage_patterns) placements += weight;
  for (const auto& [cov, weight] : coverage_patterns) {
    std::vector<double> line{1.0};
    for (auto k : cov) line = convolve(line, hypergeometric_pmf(m_, n_, k));
    const auto dist = convolve_power(line, lines);
    for (std::size_t j = 0; j < dist.size() && j < mixture.size(); ++j)
      mixture[j] += dist[j] * static_cast<double>(weight) / static_cast<double>(placements);
  }
  return from_pmf(mixture, size);
}

// --- banded -----------------------------------------------------------------

BandedModel::BandedModel(std::vector<std::int64_t> bounds, std::int64_t band_width, int row_dim, int col_dim)
    : DensityModel(std::move(bounds)), half_width_((band_width + 1) / 2), row_dim_(row_dim), col_dim_(col_dim) {}

bool BandedModel::nonzero(const std::vector<std::int64_t>& coord) const {
  const auto diff = coord[static_cast<std::size_t>(row_dim_)] - coord[static_cast<std::size_t>(col_dim_)];
  return (diff < 0 ? -diff : diff) < half_width_;
}

std::int64_t BandedModel::occupancy_at(const Region& region) const {
  std::int64_t n = 0;
  region.for_each([&](const std::vector<std::int64_t>& c) { n += nonzero(c) ? 1 : 0; });
  return n;
}

OccupancyDistribution BandedModel::occupancy(const RegionShape& shape) const {
  std::map<std::int64_t, std::int64_t> hist;
  for_each_placement(shape, [&](const Region& r) { ++hist[occupancy_at(r)]; });
  return from_histogram(hist, shape.size());
}

// --- actual data ------------------------------------------------------------

ActualDataModel::ActualDataModel(std::shared_ptr<const ConcreteTensor> tensor)
    : DensityModel(tensor->dims), tensor_(std::move(tensor)) {
  bits_ = tensor_->bitmap();
  strides_.assign(tensor_->dims.size(), 1);
  for (std::size_t i = tensor_->dims.size(); i-- > 1;) strides_[i - 1] = strides_[i] * tensor_->dims[i];
}

std::int64_t ActualDataModel::occupancy_at(const Region& region) const {
  std::int64_t n = 0;
  region.for_each([&](const std::vector<std::int64_t>& c) {
    std::int64_t idx = 0;
    for (std::size_t d = 0; d < c.size(); ++d) idx += c[d] * strides_[d];
    n += bits_[static_cast<std::size_t>(idx)];
  });
  return n;
}

OccupancyDistribution ActualDataModel::occupancy(const RegionShape& shape) const {
  std::map<std::int64_t, std::int64_t> hist;
  for_each_placement(shape, [&](const Region& r) { ++hist[occupancy_at(r)]; });
  return from_histogram(hist, shape.size());
}

// ---------------------------------------------------------------------------

std::unique_ptr<DensityModel> make_density_model(const DensityModelSpec& spec, const TensorDecl& tensor,
                                                 const std::vector<std::int64_t>& bounds) {
  auto dim_of = [&](const std::string& name) {
    const auto& p = tensor.projection;
    auto it = std::find(p.begin(), p.end(), name);
    if (it == p.end())
      throw ModelError("density model of tensor '" + tensor.name + "' names dim '" + name +
                       "' outside its projection");
    return static_cast<int>(it - p.begin());
  };
  switch (spec.kind) {
    case DensityKind::uniform:
      return std::make_unique<UniformModel>(bounds, spec.density, spec.bernoulli);
    case DensityKind::fixed_structured:
      return std::make_unique<FixedStructuredModel>(bounds, spec.n, spec.m, dim_of(spec.dim));
    case DensityKind::banded:
      return std::make_unique<BandedModel>(bounds, spec.band_width, dim_of(spec.band_dims.at(0)),
                                           dim_of(spec.band_dims.at(1)));
    case DensityKind::actual_data:
      if (!spec.data) throw ModelError("actual-data model of tensor '" + tensor.name + "' has no loaded data");
      if (spec.data->dims != bounds)
        throw ModelError("actual-data file for tensor '" + tensor.name + "' does not match the tensor shape");
      return std::make_unique<ActualDataModel>(spec.data);
  }
  throw ModelError("unknown density model");
}

namespace {

RegionShape tile_shape_of(const DensityModel& model, const std::vector<std::int64_t>& extents) {
  const auto& b = model.bounds();
  if (extents.size() != b.size()) throw ModelError("tile rank does not match tensor rank");
  for (std::size_t d = 0; d < b.size(); ++d)
    if (extents[d] < 1 || extents[d] > b[d] || b[d] % extents[d] != 0)
      throw ModelError("tile extent " + std::to_string(extents[d]) + " does not tile dim of size " +
                       std::to_string(b[d]));
  return RegionShape::aligned_box(b, extents);
}

}  // namespace

OccupancyDistribution occupancy_distribution(const DensityModel& model, const std::vector<std::int64_t>& extents,
                                             const std::optional<std::vector<std::int64_t>>& origin) {
  const auto shape = tile_shape_of(model, extents);
  if (origin) {
    if (!model.coordinate_dependent()) return model.occupancy(shape);
    Region r;
    for (std::size_t d = 0; d < extents.size(); ++d) {
      std::vector<std::int64_t> cs;
      for (std::int64_t i = 0; i < extents[d]; ++i) cs.push_back((*origin)[d] + i);
      r.coords.push_back(std::move(cs));
    }
    OccupancyDistribution dist;
    dist.tile_size = shape.size();
    dist.support.emplace_back(model.occupancy_at(r), 1.0);
    return dist;
  }
  if (dynamic_cast<const BandedModel*>(&model))
    throw ModelError("banded density needs a tile coordinate: occupancy is a function of position");
  return model.occupancy(shape);
}

double prob_empty(const DensityModel& model, const std::vector<std::int64_t>& extents,
                  const std::optional<std::vector<std::int64_t>>& origin) {
  if (!origin && !dynamic_cast<const BandedModel*>(&model)) return model.prob_empty(tile_shape_of(model, extents));
  return occupancy_distribution(model, extents, origin).prob_empty();
}

double expected_occupancy(const DensityModel& model, const std::vector<std::int64_t>& extents) {
  return model.expected_occupancy(tile_shape_of(model, extents));
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ConcreteTensor> parse_actual_data(const std::string& text, const std::string& source) {
  auto fail = [&](int line, const std::string& msg) {
    throw SpecError(ErrorKind::syntax, Location{source, line, 0}, "actual_data", msg);
  };
  auto tensor = std::make_shared<ConcreteTensor>();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_dims = false;
  std::set<std::vector<std::int64_t>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (!have_dims) {
      if (first != "dims:") fail(line_no, "expected 'dims: d0 d1 ...' header");
      std::string tok;
      while (ls >> tok) {
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (*end != '\0' || v < 1) fail(line_no, "dim size '" + tok + "' is not a positive integer");
        tensor->dims.push_back(v);
      }
      have_dims = true;
      continue;
    }
    std::vector<std::int64_t> coord;
    std::string tok = first;
    do {
      char* end = nullptr;
      const long long v = std::strtoll(tok.c_str(), &end, 10);
      if (*end != '\0' || tok.empty()) fail(line_no, "malformed coordinate '" + tok + "'");
      coord.push_back(v);
    } while (ls >> tok);
    if (coord.size() != tensor->dims.size())
      fail(line_no, "coordinate has " + std::to_string(coord.size()) + " entries, expected " +
                        std::to_string(tensor->dims.size()));
    for (std::size_t d = 0; d < coord.size(); ++d)
      if (coord[d] < 0 || coord[d] >= tensor->dims[d])
        throw SpecError(ErrorKind::invariant, Location{source, line_no, 0}, "actual_data",
                        "coordinate " + std::to_string(coord[d]) + " out of bounds for dim of size " +
                            std::to_string(tensor->dims[d]));
    if (!seen.insert(coord).second)
      throw SpecError(ErrorKind::invariant, Location{source, line_no, 0}, "actual_data",
                      "duplicate coordinate on line " + std::to_string(line_no));
  }
  if (!have_dims) fail(line_no, "missing 'dims:' header");
  tensor->nonzeros.assign(seen.begin(), seen.end());
  return tensor;
}

std::shared_ptr<const ConcreteTensor> load_actual_data(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError(ErrorKind::io, Location{path, 0, 0}, "actual_data", "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_actual_data(ss.str(), path);
}

}  // namespace sam
