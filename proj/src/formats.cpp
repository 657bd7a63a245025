#include "sam/formats.hpp"

#include <algorithm>
#include <cmath>

namespace sam {

namespace {

bool elides_empty(RankKind k) { return k == RankKind::CP || k == RankKind::RLE || k == RankKind::B; }

long double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgammal(static_cast<long double>(n) + 1) - std::lgammal(static_cast<long double>(k) + 1) -
         std::lgammal(static_cast<long double>(n - k) + 1);
}

// Rank index of each projection dim.
std::vector<int> rank_of_dims(const RepresentationFormat& format, const std::vector<std::string>& projection) {
  std::vector<int> rank(projection.size(), -1);
  for (std::size_t r = 0; r < format.ranks.size(); ++r) {
    if (format.ranks[r].dims.empty()) throw ModelError("format rank " + std::to_string(r) + " binds no dims");
    for (const auto& name : format.ranks[r].dims) {
      auto it = std::find(projection.begin(), projection.end(), name);
      if (it == projection.end()) throw ModelError("format rank binds dim '" + name + "' outside the tensor");
      auto& slot = rank[static_cast<std::size_t>(it - projection.begin())];
      if (slot >= 0) throw ModelError("format binds dim '" + name + "' twice");
      slot = static_cast<int>(r);
    }
  }
  for (std::size_t d = 0; d < projection.size(); ++d)
    if (rank[d] < 0) throw ModelError("format leaves dim '" + projection[d] + "' unbound");
  return rank;
}

std::vector<int> widths_for(const RepresentationFormat& format, const std::vector<std::int64_t>& lengths) {
  std::vector<int> w;
  for (std::size_t r = 0; r < format.ranks.size(); ++r) {
    const auto& rf = format.ranks[r];
    if (rf.width) {
      w.push_back(*rf.width);
      continue;
    }
    const std::int64_t next = r + 1 < lengths.size() ? lengths[r + 1] : lengths[r];
    w.push_back(default_rank_width(rf.kind, lengths[r], next));
  }
  return w;
}

FormatFootprint compose(const RepresentationFormat& format, const std::vector<std::int64_t>& lengths,
                        const std::vector<double>& nonempty, const std::vector<double>& placeholders) {
  const auto widths = widths_for(format, lengths);
  FormatFootprint fp;
  fp.tile_size = 1;
  for (auto l : lengths) fp.tile_size *= l;

  auto run = [&](bool worst) {
    double fibers = 1;
    double prefix = 1;
    double bits_total = 0;
    std::vector<RankFootprint> ranks;
    for (std::size_t r = 0; r < lengths.size(); ++r) {
      const auto kind = format.ranks[r].kind;
      const double l = static_cast<double>(lengths[r]);
      prefix *= l;
      RankFootprint rk;
      rk.kind = kind;
      rk.fiber_length = lengths[r];
      rk.width = widths[r];
      rk.fibers = fibers;
      rk.nonempty = worst ? prefix : nonempty[r];
      rk.instantiated = elides_empty(kind) ? rk.nonempty : fibers * l;
      double bits = 0;
      switch (kind) {
        case RankKind::U: break;
        case RankKind::UB:
        case RankKind::B: bits = fibers * l; break;
        case RankKind::CP: bits = widths[r] * rk.nonempty; break;
        case RankKind::RLE: bits = widths[r] * (rk.nonempty + (worst ? 0.0 : placeholders[r])); break;
        case RankKind::UOP: bits = 2.0 * widths[r] * fibers * l; break;
      }
      rk.expected_bits = bits;
      bits_total += bits;
      fibers = rk.instantiated;
      ranks.push_back(rk);
    }
    return std::make_tuple(ranks, bits_total, fibers);
  };

  auto [exp_ranks, exp_bits, exp_words] = run(false);
  auto [worst_ranks, worst_bits, worst_words] = run(true);
  for (std::size_t r = 0; r < exp_ranks.size(); ++r) exp_ranks[r].worst_bits = worst_ranks[r].expected_bits;
  fp.ranks = std::move(exp_ranks);
  fp.metadata_bits = exp_bits;
  fp.worst_metadata_bits = worst_bits;
  fp.data_words = exp_words;
  fp.worst_data_words = worst_words;
  return fp;
}

}  // namespace

int ceil_log2(std::int64_t x) {
  int b = 0;
  while ((std::int64_t{1} << b) < x) ++b;
  return b;
}

int default_rank_width(RankKind kind, std::int64_t length, std::int64_t next_length) {
  switch (kind) {
    case RankKind::CP:
    case RankKind::RLE: return std::max(1, ceil_log2(length));
    case RankKind::UOP: return std::max(1, ceil_log2(next_length + 1));
    case RankKind::U:
    case RankKind::UB:
    case RankKind::B: return 1;
  }
  return 1;
}

double expected_rle_placeholders(std::int64_t length, std::int64_t nonzeros, std::int64_t max_run) {
  if (nonzeros <= 0 || nonzeros > length) return 0.0;
  // Each of the k gaps preceding a nonzero is at least t long with
  // probability C(length - t, k) / C(length, k).
  const std::int64_t step = max_run + 1;
  const long double denom = log_choose(length, nonzeros);
  long double sum = 0;
  for (std::int64_t t = step; length - t >= nonzeros; t += step)
    sum += std::exp(log_choose(length - t, nonzeros) - denom);
  return static_cast<double>(nonzeros * sum);
}

std::int64_t rle_placeholders(const std::vector<bool>& nonempty, std::int64_t max_run) {
  std::int64_t total = 0;
  std::int64_t gap = 0;
  for (bool nz : nonempty) {
    if (nz) {
      total += gap / (max_run + 1);
      gap = 0;
    } else {
      ++gap;
    }
  }
  return total;
}

RankBits rank_metadata_bits(const RankFormat& format, std::int64_t fiber_length,
                            const OccupancyDistribution& occupancy, int width) {
  const double l = static_cast<double>(fiber_length);
  switch (format.kind) {
    case RankKind::U: return {0, 0};
    case RankKind::UB:
    case RankKind::B: return {l, l};
    case RankKind::CP: return {width * occupancy.expected(), width * l};
    case RankKind::RLE: {
      const std::int64_t max_run = (std::int64_t{1} << std::min(width, 62)) - 1;
      double e = 0;
      for (const auto& [k, p] : occupancy.support)
        e += p * (static_cast<double>(k) + expected_rle_placeholders(fiber_length, k, max_run));
      return {width * e, width * l};
    }
    case RankKind::UOP: return {2.0 * width, 2.0 * width};  // start and end offsets of one fiber
  }
  return {0, 0};
}

std::vector<std::int64_t> rank_lengths(const RepresentationFormat& format, const std::vector<std::string>& projection,
                                       const std::vector<std::int64_t>& tile_extents) {
  const auto rank = rank_of_dims(format, projection);
  std::vector<std::int64_t> lengths(format.ranks.size(), 1);
  for (std::size_t d = 0; d < projection.size(); ++d) lengths[static_cast<std::size_t>(rank[d])] *= tile_extents[d];
  return lengths;
}

FormatFootprint tensor_representation_size(const RepresentationFormat& format,
                                           const std::vector<std::string>& projection,
                                           const std::vector<std::int64_t>& tile_extents, const DensityModel& model) {
  const auto rank = rank_of_dims(format, projection);
  const auto lengths = rank_lengths(format, projection, tile_extents);
  const auto& bounds = model.bounds();
  const std::size_t nr = lengths.size();

  // Deterministic models: the exact mean over every placement of the tile.
  if (model.coordinate_dependent()) {
    for (std::size_t d = 0; d < bounds.size(); ++d)
      if (tile_extents[d] < 1 || bounds[d] % tile_extents[d] != 0) throw ModelError("tile does not divide the tensor");
    FormatFootprint mean;
    double n = 0;
    for_each_placement(RegionShape::aligned_box(bounds, tile_extents), [&](const Region& tile) {
      const auto fp = tensor_representation_size(format, projection, tile, model);
      if (n == 0) {
        mean = fp;
      } else {
        mean.data_words += fp.data_words;
        mean.metadata_bits += fp.metadata_bits;
        for (std::size_t r = 0; r < nr; ++r) {
          mean.ranks[r].fibers += fp.ranks[r].fibers;
          mean.ranks[r].nonempty += fp.ranks[r].nonempty;
          mean.ranks[r].instantiated += fp.ranks[r].instantiated;
          mean.ranks[r].expected_bits += fp.ranks[r].expected_bits;
        }
      }
      ++n;
    });
    mean.data_words /= n;
    mean.metadata_bits /= n;
    for (auto& r : mean.ranks) {
      r.fibers /= n;
      r.nonempty /= n;
      r.instantiated /= n;
      r.expected_bits /= n;
    }
    return mean;
  }

  // Shape of the subtree below a rank-`r` coordinate: dims of ranks <= r
  // pinned, deeper dims free.
  auto subtree_shape = [&](int r, bool free_own) {
    RegionShape s;
    s.dims.resize(projection.size());
    for (std::size_t d = 0; d < projection.size(); ++d) {
      const std::int64_t outer = bounds[d] / tile_extents[d];
      if (outer > 1) s.dims[d].push_back({outer, false});
      const bool free = rank[d] > r || (free_own && rank[d] == r);
      if (tile_extents[d] > 1) s.dims[d].push_back({tile_extents[d], free});
    }
    return s;
  };

  std::vector<double> nonempty(nr), placeholders(nr, 0.0);
  double prefix = 1;
  for (std::size_t r = 0; r < nr; ++r) {
    prefix *= static_cast<double>(lengths[r]);
    const double p = 1.0 - model.prob_empty(subtree_shape(static_cast<int>(r), false));
    nonempty[r] = prefix * p;
    if (format.ranks[r].kind != RankKind::RLE) continue;
    const auto widths = widths_for(format, lengths);
    const std::int64_t max_run = (std::int64_t{1} << std::min(widths[r], 62)) - 1;
    const double fibers = prefix / static_cast<double>(lengths[r]);
    double per_fiber = 0;
    if (r + 1 == nr) {
      const auto occ = model.occupancy(subtree_shape(static_cast<int>(r) - 1, false));
      for (const auto& [k, pk] : occ.support) per_fiber += pk * expected_rle_placeholders(lengths[r], k, max_run);
    } else {
      // Nonempty subtrees of an upper rank treated as independent.
      const std::int64_t l = lengths[r];
      for (std::int64_t k = 1; k <= l; ++k) {
        double pk = 0;
        if (p >= 1.0) pk = k == l ? 1.0 : 0.0;
        else if (p > 0.0)
          pk = static_cast<double>(std::exp(log_choose(l, k) + k * std::log(static_cast<long double>(p)) +
                                            (l - k) * std::log1p(-static_cast<long double>(p))));
        per_fiber += pk * expected_rle_placeholders(l, k, max_run);
      }
    }
    placeholders[r] = fibers * per_fiber;
  }
  return compose(format, lengths, nonempty, placeholders);
}

FormatFootprint tensor_representation_size(const RepresentationFormat& format,
                                           const std::vector<std::string>& projection, const Region& tile,
                                           const DensityModel& model) {
  const auto rank = rank_of_dims(format, projection);
  std::vector<std::int64_t> extents;
  for (const auto& c : tile.coords) extents.push_back(static_cast<std::int64_t>(c.size()));
  const auto lengths = rank_lengths(format, projection, extents);
  const auto widths = widths_for(format, lengths);

  // Rank-major traversal order of the tile's dims.
  std::vector<std::size_t> order;
  for (const auto& rf : format.ranks)
    for (const auto& name : rf.dims)
      order.push_back(static_cast<std::size_t>(std::find(projection.begin(), projection.end(), name) - projection.begin()));

  std::int64_t size = 1;
  for (auto e : extents) size *= e;
  std::vector<bool> flags(static_cast<std::size_t>(size));
  std::vector<std::int64_t> digit(order.size(), 0);
  Region point;
  point.coords.assign(projection.size(), std::vector<std::int64_t>(1));
  for (std::int64_t i = 0; i < size; ++i) {
    for (std::size_t k = 0; k < order.size(); ++k)
      point.coords[order[k]][0] = tile.coords[order[k]][static_cast<std::size_t>(digit[k])];
    flags[static_cast<std::size_t>(i)] = model.occupancy_at(point) > 0;
    for (std::size_t k = order.size(); k-- > 0;) {
      if (++digit[k] < extents[order[k]]) break;
      digit[k] = 0;
    }
  }

  const std::size_t nr = lengths.size();
  std::vector<double> nonempty(nr), placeholders(nr, 0.0);
  std::int64_t elements = 1;
  for (std::size_t r = 0; r < nr; ++r) {
    elements *= lengths[r];
    const std::int64_t block = size / elements;
    std::vector<bool> elem(static_cast<std::size_t>(elements), false);
    std::int64_t count = 0;
    for (std::int64_t e = 0; e < elements; ++e) {
      for (std::int64_t j = 0; j < block && !elem[static_cast<std::size_t>(e)]; ++j)
        if (flags[static_cast<std::size_t>(e * block + j)]) elem[static_cast<std::size_t>(e)] = true;
      count += elem[static_cast<std::size_t>(e)] ? 1 : 0;
    }
    nonempty[r] = static_cast<double>(count);
    if (format.ranks[r].kind == RankKind::RLE) {
      const std::int64_t max_run = (std::int64_t{1} << std::min(widths[r], 62)) - 1;
      std::int64_t ph = 0;
      for (std::int64_t f = 0; f < elements / lengths[r]; ++f) {
        std::vector<bool> fiber(elem.begin() + f * lengths[r], elem.begin() + (f + 1) * lengths[r]);
        ph += rle_placeholders(fiber, max_run);
      }
      placeholders[r] = static_cast<double>(ph);
    }
  }
  return compose(format, lengths, nonempty, placeholders);
}

RepresentationFormat describe_classic_format(const std::string& name, const std::vector<std::string>& dims) {
  auto need = [&](std::size_t n) {
    if (dims.size() != n)
      throw ModelError("format " + name + " needs " + std::to_string(n) + " dims, got " + std::to_string(dims.size()));
  };
  RepresentationFormat f;
  if (name == "CSR") {
    need(2);
    f.ranks = {{RankKind::UOP, {dims[0]}, {}}, {RankKind::CP, {dims[1]}, {}}};
  } else if (name == "COO2") {
    need(2);
    f.ranks = {{RankKind::CP, {dims[0], dims[1]}, {}}};
  } else if (name == "CSB") {
    need(3);
    f.ranks = {{RankKind::UOP, {dims[0]}, {}}, {RankKind::CP, {dims[1]}, {}}, {RankKind::CP, {dims[2]}, {}}};
  } else if (name == "CSF3") {
    need(3);
    f.ranks = {{RankKind::CP, {dims[0]}, {}}, {RankKind::CP, {dims[1]}, {}}, {RankKind::CP, {dims[2]}, {}}};
  } else {
    throw ModelError("unknown classic format '" + name + "'");
  }
  return f;
}

}  // namespace sam
