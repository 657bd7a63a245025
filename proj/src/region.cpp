#include "sam/region.hpp"

#include <algorithm>

namespace sam {

RegionShape RegionShape::aligned_box(const std::vector<std::int64_t>& bounds,
                                     const std::vector<std::int64_t>& extents) {
  RegionShape s;
  s.dims.resize(bounds.size());
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    const std::int64_t outer = bounds[d] / extents[d];
    if (outer > 1) s.dims[d].push_back({outer, false});
    if (extents[d] > 1) s.dims[d].push_back({extents[d], true});
  }
  return s;
}

std::int64_t RegionShape::size() const {
  std::int64_t n = 1;
  for (const auto& dim : dims)
    for (const auto& g : dim)
      if (g.free) n *= g.factor;
  return n;
}

std::int64_t RegionShape::positions() const {
  std::int64_t n = 1;
  for (const auto& dim : dims)
    for (const auto& g : dim)
      if (!g.free) n *= g.factor;
  return n;
}

std::vector<std::int64_t> RegionShape::bounds() const {
  std::vector<std::int64_t> b;
  for (const auto& dim : dims) {
    std::int64_t n = 1;
    for (const auto& g : dim) n *= g.factor;
    b.push_back(n);
  }
  return b;
}

std::vector<std::int64_t> RegionShape::extents() const {
  std::vector<std::int64_t> e;
  for (const auto& dim : dims) {
    std::int64_t n = 1;
    for (const auto& g : dim)
      if (g.free) n *= g.factor;
    e.push_back(n);
  }
  return e;
}

std::int64_t Region::size() const {
  std::int64_t n = 1;
  for (const auto& c : coords) n *= static_cast<std::int64_t>(c.size());
  return n;
}

void Region::for_each(const std::function<void(const std::vector<std::int64_t>&)>& f) const {
  const std::size_t rank = coords.size();
  for (const auto& c : coords)
    if (c.empty()) return;
  std::vector<std::size_t> idx(rank, 0);
  std::vector<std::int64_t> point(rank);
  while (true) {
    for (std::size_t d = 0; d < rank; ++d) point[d] = coords[d][idx[d]];
    f(point);
    std::size_t d = rank;
    while (d > 0) {
      --d;
      if (++idx[d] < coords[d].size()) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (rank == 0) return;
  }
}

Region place(const RegionShape& shape, const std::vector<std::int64_t>& fixed_values) {
  Region r;
  r.coords.resize(shape.dims.size());
  std::size_t k = 0;
  for (std::size_t d = 0; d < shape.dims.size(); ++d) {
    const auto& digits = shape.dims[d];
    std::int64_t base = 0;
    std::vector<std::int64_t> free_strides;
    std::vector<std::int64_t> free_factors;
    std::int64_t stride = 1;
    std::vector<std::int64_t> strides(digits.size());
    for (std::size_t i = digits.size(); i-- > 0;) {
      strides[i] = stride;
      stride *= digits[i].factor;
    }
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (digits[i].free) {
        free_strides.push_back(strides[i]);
        free_factors.push_back(digits[i].factor);
      } else {
        base += fixed_values[k++] * strides[i];
      }
    }
    std::vector<std::int64_t> cs{base};
    for (std::size_t j = 0; j < free_strides.size(); ++j) {
      std::vector<std::int64_t> next;
      next.reserve(cs.size() * static_cast<std::size_t>(free_factors[j]));
      for (auto c : cs)
        for (std::int64_t v = 0; v < free_factors[j]; ++v) next.push_back(c + v * free_strides[j]);
      cs = std::move(next);
    }
    std::sort(cs.begin(), cs.end());
    r.coords[d] = std::move(cs);
  }
  return r;
}

void for_each_placement(const RegionShape& shape, const std::function<void(const Region&)>& f) {
  std::vector<std::int64_t> radices;
  for (const auto& dim : shape.dims)
    for (const auto& g : dim)
      if (!g.free) radices.push_back(g.factor);
  std::vector<std::int64_t> values(radices.size(), 0);
  while (true) {
    f(place(shape, values));
    std::size_t i = radices.size();
    while (i > 0) {
      --i;
      if (++values[i] < radices[i]) break;
      values[i] = 0;
      if (i == 0) return;
    }
    if (radices.empty()) return;
  }
}

}  // namespace sam
