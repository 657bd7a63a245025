#include "sam/dataflow.hpp"

#include <algorithm>
#include <map>

namespace sam {

namespace {

constexpr LoopMask bit(int i) { return LoopMask{1} << i; }

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

}  // namespace

std::vector<std::string> validate_mapping_structure(const Mapping& mapping, const Workload& workload,
                                                    const Architecture& arch) {
  std::vector<std::string> v;
  if (mapping.levels.size() != arch.storage.size()) {
    v.push_back("mapping has " + std::to_string(mapping.levels.size()) + " levels, architecture has " +
                std::to_string(arch.storage.size()) + " storage levels");
    return v;
  }
  std::map<std::string, std::int64_t> product;
  for (std::size_t l = 0; l < mapping.levels.size(); ++l) {
    const auto& lm = mapping.levels[l];
    const auto& level = arch.storage[l];
    if (lm.level != level.name)
      v.push_back("mapping level " + std::to_string(l) + " is '" + lm.level + "', expected '" + level.name + "'");
    std::int64_t spatial = 1;
    for (const auto& loop : lm.loops) {
      if (workload.dim_index(loop.dim) < 0) {
        v.push_back("level '" + lm.level + "' loops over unknown dim '" + loop.dim + "'");
        continue;
      }
      if (loop.factor < 1) {
        v.push_back("level '" + lm.level + "' has non-positive factor for dim '" + loop.dim + "'");
        continue;
      }
      auto& p = product.try_emplace(loop.dim, 1).first->second;
      p *= loop.factor;
      if (loop.spatial) spatial *= loop.factor;
    }
    if (spatial > level.fanout)
      v.push_back("level '" + lm.level + "' spatial factors multiply to " + std::to_string(spatial) +
                  ", exceeding fanout " + std::to_string(level.fanout));
    for (const auto& t : lm.keep)
      if (workload.tensor_index(t) < 0) v.push_back("level '" + lm.level + "' keeps unknown tensor '" + t + "'");
  }
  for (const auto& d : workload.dims) {
    const auto it = product.find(d.name);
    const std::int64_t p = it == product.end() ? 1 : it->second;
    if (p != d.bound)
      v.push_back("dim '" + d.name + "' factors multiply to " + std::to_string(p) + ", bound is " +
                  std::to_string(d.bound));
  }
  if (!mapping.levels.empty())
    for (const auto& t : workload.tensors) {
      const auto& keep = mapping.levels.front().keep;
      if (std::find(keep.begin(), keep.end(), t.name) == keep.end())
        v.push_back("outermost level '" + mapping.levels.front().level + "' must keep tensor '" + t.name + "'");
    }
  return v;
}

// ---------------------------------------------------------------------------

LoopNest::LoopNest(const Workload& workload, const Architecture& arch, const Mapping& mapping)
    : workload_(&workload), num_levels_(arch.num_storage()) {
  if (auto v = validate_mapping_structure(mapping, workload, arch); !v.empty()) throw ModelError(join(v));
  for (int l = 0; l < num_levels_; ++l) {
    level_begin_.push_back(static_cast<int>(loops_.size()));
    const auto& lm = mapping.levels[static_cast<std::size_t>(l)];
    for (bool want_spatial : {false, true})
      for (const auto& loop : lm.loops)
        if (loop.spatial == want_spatial && loop.factor > 1)
          loops_.push_back({workload.dim_index(loop.dim), loop.factor, loop.spatial, l});
  }
  level_begin_.push_back(static_cast<int>(loops_.size()));
  if (loops_.size() > 63) throw ModelError("loop nest deeper than 63 loops is not supported");

  const std::size_t nt = workload.tensors.size();
  keeps_.assign(static_cast<std::size_t>(num_levels_), std::vector<bool>(nt, false));
  chains_.assign(nt, {});
  relevant_.assign(nt, 0);
  for (int l = 0; l < num_levels_; ++l)
    for (const auto& name : mapping.levels[static_cast<std::size_t>(l)].keep)
      keeps_[static_cast<std::size_t>(l)][static_cast<std::size_t>(workload.tensor_index(name))] = true;
  for (std::size_t t = 0; t < nt; ++t) {
    for (int l = 0; l < num_levels_; ++l)
      if (keeps_[static_cast<std::size_t>(l)][t]) chains_[t].push_back(l);
    for (int i = 0; i < size(); ++i)
      if (workload.tensor_has_dim(static_cast<int>(t), loops_[static_cast<std::size_t>(i)].dim)) relevant_[t] |= bit(i);
  }
  for (int i = 0; i < size(); ++i)
    if (loops_[static_cast<std::size_t>(i)].spatial) spatial_ |= bit(i);
}

bool LoopNest::keeps(int level, int tensor) const {
  if (level >= num_levels_) return true;
  return keeps_[static_cast<std::size_t>(level)][static_cast<std::size_t>(tensor)];
}

int LoopNest::child_of(int level, int tensor) const {
  for (int l = level + 1; l < num_levels_; ++l)
    if (keeps(l, tensor)) return l;
  return num_levels_;
}

int LoopNest::parent_of(int level, int tensor) const {
  for (int l = std::min(level, num_levels_) - 1; l >= 0; --l)
    if (keeps(l, tensor)) return l;
  return -1;
}

LoopMask LoopNest::above(int level) const {
  const int end = level_begin_[static_cast<std::size_t>(std::min(level, num_levels_))];
  return end == 0 ? 0 : (bit(end) - 1);
}

LoopMask LoopNest::relevant(int tensor) const { return relevant_[static_cast<std::size_t>(tensor)]; }

LoopMask LoopNest::all() const { return loops_.empty() ? 0 : bit(size()) - 1; }

int LoopNest::last_relevant_temporal(int level, int tensor) const {
  const LoopMask m = above(level) & relevant(tensor) & ~spatial_;
  int r = -1;
  for (int i = 0; i < size(); ++i)
    if (m & bit(i)) r = i;
  return r;
}

LoopMask LoopNest::residency_mask(int level, int tensor) const {
  const int r = last_relevant_temporal(level, tensor);
  const LoopMask upto = r < 0 ? 0 : bit(r + 1) - 1;
  return above(level) & (spatial_ | upto);
}

LoopMask LoopNest::multicast_mask(int parent, int child, int tensor) const {
  LoopMask m = 0;
  for (int i = 0; i < size(); ++i) {
    const auto& loop = loops_[static_cast<std::size_t>(i)];
    if (loop.spatial && loop.level >= parent && loop.level < child && !(relevant(tensor) & bit(i))) m |= bit(i);
  }
  return m;
}

std::int64_t LoopNest::product(LoopMask mask) const {
  std::int64_t p = 1;
  for (int i = 0; i < size(); ++i)
    if (mask & bit(i)) p *= loops_[static_cast<std::size_t>(i)].factor;
  return p;
}

std::vector<std::int64_t> LoopNest::tile_extents(int level, int tensor) const {
  const auto dims = workload_->tensor_dims(tensor);
  std::vector<std::int64_t> e(dims.size(), 1);
  for (int i = level_begin_[static_cast<std::size_t>(std::min(level, num_levels_))]; i < size(); ++i)
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (loops_[static_cast<std::size_t>(i)].dim == dims[k]) e[k] *= loops_[static_cast<std::size_t>(i)].factor;
  return e;
}

std::int64_t LoopNest::tile_words(int level, int tensor) const {
  std::int64_t n = 1;
  for (auto e : tile_extents(level, tensor)) n *= e;
  return n;
}

RegionShape LoopNest::region_shape(int tensor, LoopMask fixed) const {
  RegionShape s;
  for (int d : workload_->tensor_dims(tensor)) {
    std::vector<Digit> digits;
    for (int i = 0; i < size(); ++i)
      if (loops_[static_cast<std::size_t>(i)].dim == d)
        digits.push_back({loops_[static_cast<std::size_t>(i)].factor, !(fixed & bit(i))});
    s.dims.push_back(std::move(digits));
  }
  return s;
}

Region LoopNest::region_at(int tensor, LoopMask fixed, const std::vector<std::int64_t>& values) const {
  std::vector<std::int64_t> fixed_values;
  for (int d : workload_->tensor_dims(tensor))
    for (int i = 0; i < size(); ++i)
      if (loops_[static_cast<std::size_t>(i)].dim == d && (fixed & bit(i)))
        fixed_values.push_back(values[static_cast<std::size_t>(i)]);
  return place(region_shape(tensor, fixed), fixed_values);
}

void LoopNest::for_each_assignment(LoopMask mask,
                                   const std::function<void(const std::vector<std::int64_t>&)>& f) const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (mask & bit(i)) idx.push_back(i);
  std::vector<std::int64_t> values(static_cast<std::size_t>(size()), 0);
  while (true) {
    f(values);
    std::size_t k = idx.size();
    while (k > 0) {
      --k;
      auto& v = values[static_cast<std::size_t>(idx[k])];
      if (++v < loops_[static_cast<std::size_t>(idx[k])].factor) break;
      v = 0;
      if (k == 0) return;
    }
    if (idx.empty()) return;
  }
}

// ---------------------------------------------------------------------------

std::vector<std::vector<TileShape>> tile_shapes(const Workload& workload, const Architecture& arch,
                                                const Mapping& mapping) {
  const LoopNest nest(workload, arch, mapping);
  std::vector<std::vector<TileShape>> out;
  for (int l = 0; l <= nest.num_levels(); ++l) {
    std::vector<TileShape> row;
    std::vector<std::int64_t> ext(workload.dims.size(), 1);
    for (const auto& loop : nest.loops())
      if (loop.level >= l) ext[static_cast<std::size_t>(loop.dim)] *= loop.factor;
    for (std::size_t t = 0; t < workload.tensors.size(); ++t) {
      TileShape s;
      s.extents = ext;
      for (int d : workload.tensor_dims(static_cast<int>(t))) {
        s.tensor_extents.push_back(ext[static_cast<std::size_t>(d)]);
        s.size *= ext[static_cast<std::size_t>(d)];
      }
      row.push_back(std::move(s));
    }
    out.push_back(std::move(row));
  }
  return out;
}

DenseTraffic dense_traffic(const Workload& workload, const Architecture& arch, const Mapping& mapping) {
  return dense_traffic(LoopNest(workload, arch, mapping));
}

DenseTraffic dense_traffic(const LoopNest& nest) {
  const auto& w = nest.workload();
  const int nt = static_cast<int>(w.tensors.size());
  DenseTraffic dt;
  dt.per_level.assign(static_cast<std::size_t>(nest.num_levels()), std::vector<DenseCounts>(static_cast<std::size_t>(nt)));
  dt.compute_count = w.total_operations();
  const int compute = nest.compute_level();

  for (int t = 0; t < nt; ++t) {
    const bool output = w.tensors[static_cast<std::size_t>(t)].is_output;
    for (int p : nest.chain(t)) {
      const int c = nest.child_of(p, t);
      Boundary b;
      b.tensor = t;
      b.parent = p;
      b.child = c;
      b.output = output;
      b.words_per_tile = c == compute ? 1 : nest.tile_words(c, t);
      b.residency = nest.residency_mask(c, t);
      b.tiles_transferred = nest.product(b.residency);
      b.multicast = output ? 1 : nest.product(nest.multicast_mask(p, c, t));
      b.parent_events = output ? b.residency : b.residency & ~nest.multicast_mask(p, c, t);
      b.parent_read_events = nest.product(b.parent_events);
      b.distinct_tiles = nest.product(nest.above(c) & (nest.spatial() | nest.relevant(t)));

      auto& parent = dt.per_level[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)];
      const double words = static_cast<double>(b.words_per_tile);
      if (!output) {
        parent.reads += static_cast<double>(b.parent_read_events) * words;
        if (c != compute)
          dt.per_level[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)].fills +=
              static_cast<double>(b.tiles_transferred) * words;
      } else if (c == compute) {
        parent.updates += static_cast<double>(dt.compute_count);
      } else {
        auto& child = dt.per_level[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
        const double res = static_cast<double>(b.tiles_transferred);
        child.fills += res * words;
        child.reads += res * words;
        parent.reads += (res - static_cast<double>(b.distinct_tiles)) * words;
        parent.updates += res * words;
      }
      dt.boundaries.push_back(b);
    }
  }
  return dt;
}

}  // namespace sam
