#include "sam/oracle.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace sam {

// ---------------------------------------------------------------------------
// Literal fibertree encoder
// ---------------------------------------------------------------------------

namespace {

struct FiberResult {
  bool nonempty = false;
  std::int64_t words = 0;
  double bits = 0;
};

class Encoder {
 public:
  Encoder(const ConcreteTensor& tensor, const std::vector<std::string>& projection, const RepresentationFormat& format,
          const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& extent)
      : tensor_(tensor), format_(format), lo_(lo), extent_(extent), local_(projection.size(), 0) {
    bits_ = tensor.bitmap();
    for (const auto& rank : format.ranks) {
      std::vector<std::size_t> group;
      std::int64_t len = 1;
      for (const auto& name : rank.dims) {
        const auto it = std::find(projection.begin(), projection.end(), name);
        if (it == projection.end()) throw ModelError("format names dim '" + name + "' outside the tensor");
        group.push_back(static_cast<std::size_t>(it - projection.begin()));
        len *= extent[group.back()];
      }
      groups_.push_back(group);
      lengths_.push_back(len);
    }
    std::set<std::size_t> covered;
    for (const auto& g : groups_) covered.insert(g.begin(), g.end());
    if (covered.size() != projection.size()) throw ModelError("format does not bind every tensor dim");
    for (std::size_t r = 0; r < lengths_.size(); ++r) {
      const auto& rf = format.ranks[r];
      int w = 1;
      auto bits_for = [](std::int64_t v) {
        int b = 0;
        while ((std::int64_t{1} << b) < v) ++b;
        return std::max(b, 1);
      };
      if (rf.width) w = *rf.width;
      else if (rf.kind == RankKind::CP || rf.kind == RankKind::RLE) w = bits_for(lengths_[r]);
      else if (rf.kind == RankKind::UOP) w = bits_for((r + 1 < lengths_.size() ? lengths_[r + 1] : lengths_[r]) + 1);
      widths_.push_back(w);
    }
  }

  FiberResult fiber(std::size_t rank) {
    const auto kind = format_.ranks[rank].kind;
    const std::int64_t len = lengths_[rank];
    const int w = widths_[rank];
    FiberResult out;
    std::vector<bool> present;
    std::vector<FiberResult> children;
    for (std::int64_t c = 0; c < len; ++c) {
      // row-major over the rank's dims
      std::int64_t rem = c;
      for (std::size_t k = groups_[rank].size(); k-- > 0;) {
        const auto d = groups_[rank][k];
        local_[d] = rem % extent_[d];
        rem /= extent_[d];
      }
      FiberResult child;
      if (rank + 1 == lengths_.size()) {
        std::int64_t idx = 0;
        for (std::size_t d = 0; d < local_.size(); ++d) idx = idx * tensor_.dims[d] + lo_[d] + local_[d];
        child.nonempty = bits_[static_cast<std::size_t>(idx)] != 0;
        child.words = 1;
      } else {
        child = fiber(rank + 1);
      }
      present.push_back(child.nonempty);
      children.push_back(child);
    }
    const bool elide = kind == RankKind::CP || kind == RankKind::RLE || kind == RankKind::B;
    std::int64_t nonempty = 0;
    for (std::size_t c = 0; c < children.size(); ++c) {
      if (present[c]) ++nonempty;
      if (elide && !present[c]) continue;
      out.words += children[c].words;
      out.bits += children[c].bits;
    }
    out.nonempty = nonempty > 0;
    switch (kind) {
      case RankKind::U: break;
      case RankKind::UB:
      case RankKind::B: out.bits += static_cast<double>(len); break;
      case RankKind::CP: out.bits += static_cast<double>(w * nonempty); break;
      case RankKind::RLE: {
        const std::int64_t cap = (std::int64_t{1} << w) - 1;  // longest encodable run
        std::int64_t entries = 0, run = 0;
        for (bool p : present) {
          if (!p) {
            ++run;
            continue;
          }
          entries += 1 + run / (cap + 1);
          run = 0;
        }
        out.bits += static_cast<double>(w * entries);
        break;
      }
      case RankKind::UOP: out.bits += static_cast<double>(2 * w * len); break;
    }
    return out;
  }

 private:
  const ConcreteTensor& tensor_;
  const RepresentationFormat& format_;
  std::vector<std::int64_t> lo_, extent_, local_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::int64_t> lengths_;
  std::vector<int> widths_;
};

}  // namespace

EncodedTile encode_tile(const ConcreteTensor& tensor, const std::vector<std::string>& projection,
                        const RepresentationFormat& format, const std::vector<std::int64_t>& lo,
                        const std::vector<std::int64_t>& extent) {
  Encoder enc(tensor, projection, format, lo, extent);
  const auto r = enc.fiber(0);
  return {r.words, r.bits};
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

ConcreteTensor random_tensor(const std::vector<std::int64_t>& dims, const DensityModelSpec& spec,
                             const std::vector<std::string>& dim_names, std::uint64_t seed) {
  ConcreteTensor t;
  t.dims = dims;
  const std::int64_t size = t.size();
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(size), 0);
  auto dim_of = [&](const std::string& name) {
    auto it = std::find(dim_names.begin(), dim_names.end(), name);
    if (it == dim_names.end()) throw ModelError("density model names unknown dim '" + name + "'");
    return static_cast<std::size_t>(it - dim_names.begin());
  };

  switch (spec.kind) {
    case DensityKind::uniform: {
      if (spec.bernoulli) {
        std::bernoulli_distribution coin(spec.density);
        for (auto& b : bits) b = coin(rng) ? 1 : 0;
        break;
      }
      const auto k = static_cast<std::int64_t>(std::llround(spec.density * static_cast<double>(size)));
      std::vector<std::int64_t> idx(static_cast<std::size_t>(size));
      std::iota(idx.begin(), idx.end(), 0);
      // partial Fisher-Yates
      for (std::int64_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, size - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
        bits[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
      }
      break;
    }
    case DensityKind::fixed_structured: {
      const auto bd = dim_of(spec.dim);
      std::int64_t stride = 1;
      for (std::size_t d = bd + 1; d < dims.size(); ++d) stride *= dims[d];
      // Every line along the block dim, every block of m on that line.
      for (std::int64_t base = 0; base < size; ++base) {
        if ((base / stride) % dims[bd] != 0) continue;
        for (std::int64_t block = 0; block < dims[bd] / spec.m; ++block) {
          std::vector<std::int64_t> pos(static_cast<std::size_t>(spec.m));
          std::iota(pos.begin(), pos.end(), 0);
          std::shuffle(pos.begin(), pos.end(), rng);
          for (std::int64_t j = 0; j < spec.n; ++j)
            bits[static_cast<std::size_t>(base + (block * spec.m + pos[static_cast<std::size_t>(j)]) * stride)] = 1;
        }
      }
      break;
    }
    case DensityKind::banded: {
      const auto r = dim_of(spec.band_dims.at(0));
      const auto c = dim_of(spec.band_dims.at(1));
      const std::int64_t half = (spec.band_width + 1) / 2;
      std::vector<std::int64_t> coord(dims.size(), 0);
      for (std::int64_t i = 0; i < size; ++i) {
        std::int64_t rem = i;
        for (std::size_t d = dims.size(); d-- > 0;) {
          coord[d] = rem % dims[d];
          rem /= dims[d];
        }
        bits[static_cast<std::size_t>(i)] = std::llabs(coord[r] - coord[c]) < half ? 1 : 0;
      }
      break;
    }
    case DensityKind::actual_data:
      if (!spec.data) throw ModelError("actual-data model has no loaded data");
      return *spec.data;
  }

  std::vector<std::int64_t> coord(dims.size(), 0);
  for (std::int64_t i = 0; i < size; ++i) {
    if (!bits[static_cast<std::size_t>(i)]) continue;
    std::int64_t rem = i;
    for (std::size_t d = dims.size(); d-- > 0;) {
      coord[d] = rem % dims[d];
      rem /= dims[d];
    }
    t.nonzeros.push_back(coord);
  }
  return t;
}

ConcreteTensors tensors_from_actual_data(const Workload& workload) {
  ConcreteTensors out;
  for (const auto& t : workload.tensors) {
    if (t.is_output) {
      out.push_back(nullptr);
      continue;
    }
    if (!t.density || t.density->kind != DensityKind::actual_data || !t.density->data)
      throw ModelError("tensor '" + t.name + "' has no actual data");
    out.push_back(t.density->data);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

enum Status { kActual = 0, kGated = 1, kSkipped = 2 };

int status_of(SafKind k) { return k == SafKind::gate ? kGated : kSkipped; }

struct Rule {
  SafKind kind;
  int leader;
};

struct Residency {
  int parent = -1;  // enclosing residency one keep-level up; -1 at the outermost level
  int group = -1;
  std::uint64_t seen = 0;  // bit per tensor seen nonzero while resident
  std::vector<std::int64_t> lo, ext;
  int status = kActual;
};

struct Group {
  int parent = -1;
  std::uint64_t seen = 0;
  std::vector<std::int64_t> lo, ext;
};

struct Track {
  int tensor;
  int level;   // child (storage index, or level count for compute)
  int parent;  // parent storage index
  std::map<std::int64_t, std::pair<std::vector<std::int64_t>, int>> current;  // instance -> (tile, residency)
  std::map<std::vector<std::int64_t>, int> groups;
};

void add(ActionBreakdown& out, EntryKey key, double dense, double stored, int status) {
  auto& e = out[key];
  e.dense += dense;
  if (status == kActual) e.actual += stored;
  if (status == kGated) e.gated += stored;
}

}  // namespace

ExactCounts simulate(const Problem& problem, const ConcreteTensors& tensors, const OracleOptions& options) {
  const auto& w = problem.workload;
  const auto& arch = problem.architecture;
  const auto& mapping = problem.mapping;
  const int nt = static_cast<int>(w.tensors.size());
  const int ns = arch.num_storage();
  const int compute = ns;
  if (nt > 63) throw ModelError("too many tensors for the oracle");
  for (const auto& d : w.dims)
    if (d.bound > options.max_dim)
      throw ModelError("oracle refuses dim '" + d.name + "' of bound " + std::to_string(d.bound) + " (limit " +
                       std::to_string(options.max_dim) + ")");
  if (mapping.levels.size() != arch.storage.size()) throw ModelError("mapping does not match architecture");

  // Loop nest: per level, temporal loops then spatial loops.
  struct L {
    int dim;
    std::int64_t factor;
    bool spatial;
    int level;
    std::int64_t stride = 1;
  };
  std::vector<L> loops;
  for (int l = 0; l < ns; ++l)
    for (bool sp : {false, true})
      for (const auto& lp : mapping.levels[static_cast<std::size_t>(l)].loops)
        if (lp.spatial == sp && lp.factor > 1) loops.push_back({w.dim_index(lp.dim), lp.factor, sp, l});
  for (std::size_t i = 0; i < loops.size(); ++i)
    for (std::size_t j = i + 1; j < loops.size(); ++j)
      if (loops[j].dim == loops[i].dim) loops[i].stride *= loops[j].factor;
  std::vector<std::size_t> temporal, spatial;
  for (std::size_t i = 0; i < loops.size(); ++i) (loops[i].spatial ? spatial : temporal).push_back(i);

  auto keeps = [&](int level, int t) {
    if (level >= ns) return true;
    const auto& k = mapping.levels[static_cast<std::size_t>(level)].keep;
    return std::find(k.begin(), k.end(), w.tensors[static_cast<std::size_t>(t)].name) != k.end();
  };
  // Tile extent of tensor dims at a level.
  auto extent = [&](int level, int t) {
    std::vector<std::int64_t> e;
    for (int d : w.tensor_dims(t)) {
      std::int64_t x = 1;
      for (const auto& lp : loops)
        if (lp.dim == d && lp.level >= level) x *= lp.factor;
      e.push_back(x);
    }
    return e;
  };
  auto format = [&](int level, int t) -> const RepresentationFormat* {
    if (level >= ns) return nullptr;
    return problem.safs.format(arch.storage[static_cast<std::size_t>(level)].name, w.tensors[static_cast<std::size_t>(t)].name);
  };

  // SAF rules.
  std::map<std::pair<int, int>, std::vector<Rule>> rules;  // (level, follower) ; follower -1 = compute
  std::set<std::pair<int, int>> leads;                     // (level, leader)
  for (const auto& ls : problem.safs.levels) {
    const int level = ls.level == arch.compute.name ? compute : arch.level_index(ls.level);
    for (const auto& a : ls.actions) {
      if (level == compute) {
        std::vector<int> leaders;
        for (const auto& c : a.condition_on) leaders.push_back(w.tensor_index(c));
        if (leaders.empty())
          for (int t = 0; t < nt; ++t)
            if (!w.tensors[static_cast<std::size_t>(t)].is_output) leaders.push_back(t);
        for (int x : leaders) rules[{compute, -1}].push_back({a.kind, x});
        continue;
      }
      const int target = w.tensor_index(a.target);
      std::vector<int> conds;
      for (const auto& c : a.condition_on) conds.push_back(w.tensor_index(c));
      if (std::find(conds.begin(), conds.end(), target) != conds.end()) {
        const int other = conds[0] == target ? conds[1] : conds[0];
        rules[{level, target}].push_back({a.kind, other});
        rules[{level, other}].push_back({a.kind, target});
        leads.insert({level, other});
        leads.insert({level, target});
      } else {
        for (int x : conds) {
          rules[{level, target}].push_back({a.kind, x});
          leads.insert({level, x});
        }
      }
    }
  }
  auto decide = [&](int level, int follower, std::uint64_t seen) {
    int s = kActual;
    auto it = rules.find({level, follower});
    if (it == rules.end()) return s;
    for (const auto& r : it->second)
      if (!(seen & (std::uint64_t{1} << r.leader))) s = std::max(s, status_of(r.kind));
    return s;
  };

  // Dense bitmaps of inputs.
  std::vector<std::vector<std::uint8_t>> bitmap(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    if (w.tensors[static_cast<std::size_t>(t)].is_output) continue;
    if (!tensors[static_cast<std::size_t>(t)]) throw ModelError("no data for tensor '" + w.tensors[static_cast<std::size_t>(t)].name + "'");
    bitmap[static_cast<std::size_t>(t)] = tensors[static_cast<std::size_t>(t)]->bitmap();
  }
  const int z = w.output_index();

  // Tracks: every keep-level of every input below the outermost, plus compute.
  std::vector<Track> tracks;
  std::vector<std::vector<int>> tracks_of(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    if (t == z) continue;
    int parent = -1;
    for (int l = 0; l <= ns; ++l) {
      if (!keeps(l, t)) continue;
      if (parent >= 0) {
        tracks_of[static_cast<std::size_t>(t)].push_back(static_cast<int>(tracks.size()));
        tracks.push_back({t, l, parent, {}, {}});
      }
      parent = l;
    }
  }
  std::vector<Residency> res;
  std::vector<Group> groups;

  // Output traffic, counted as it happens.
  ActionBreakdown out;
  struct ZState {
    std::vector<std::int64_t> tile;
    std::set<std::vector<std::int64_t>> seen;
  };
  std::vector<std::pair<int, int>> z_hops;  // (parent, child) storage pairs
  int z_inner = -1;
  if (z >= 0) {
    int parent = -1;
    for (int l = 0; l < ns; ++l) {
      if (!keeps(l, z)) continue;
      if (parent >= 0) z_hops.emplace_back(parent, l);
      parent = l;
    }
    z_inner = parent;
  }
  std::vector<std::map<std::int64_t, ZState>> z_state(z_hops.size());

  auto instance_of = [&](int level, const std::vector<std::int64_t>& v) {
    std::int64_t id = 0;
    for (auto i : spatial)
      if (loops[i].level < level) id = id * loops[i].factor + v[i];
    return id;
  };

  struct ComputePoint {
    std::vector<int> operand_res;  // per tensor (compute-level residency), -1 for output
    int scalar_compute = kActual;
    int scalar_output = kActual;
  };
  std::vector<ComputePoint> points;

  std::vector<std::int64_t> v(loops.size(), 0);
  std::vector<std::int64_t> coord(w.dims.size(), 0);
  std::int64_t time = 0;
  auto step = [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++v[idx[k]] < loops[idx[k]].factor) return true;
      v[idx[k]] = 0;
    }
    return false;
  };

  bool more_time = true;
  while (more_time) {
    for (auto i : spatial) v[i] = 0;
    bool more_space = true;
    while (more_space) {
      std::fill(coord.begin(), coord.end(), 0);
      for (std::size_t i = 0; i < loops.size(); ++i) coord[static_cast<std::size_t>(loops[i].dim)] += v[i] * loops[i].stride;

      ComputePoint cp;
      cp.operand_res.assign(static_cast<std::size_t>(nt), -1);
      std::uint64_t nonzero = 0;
      for (int t = 0; t < nt; ++t) {
        if (t == z) continue;
        const auto& proj = w.tensors[static_cast<std::size_t>(t)].projection;
        std::int64_t idx = 0;
        for (std::size_t k = 0; k < proj.size(); ++k) {
          const int d = w.dim_index(proj[k]);
          idx = idx * w.bound(d) + coord[static_cast<std::size_t>(d)];
        }
        if (bitmap[static_cast<std::size_t>(t)][static_cast<std::size_t>(idx)]) nonzero |= std::uint64_t{1} << t;
      }

      for (int t = 0; t < nt; ++t) {
        for (int ti : tracks_of[static_cast<std::size_t>(t)]) {
          auto& tr = tracks[static_cast<std::size_t>(ti)];
          const auto ext = extent(tr.level, t);
          std::vector<std::int64_t> tile;
          const auto dims = w.tensor_dims(t);
          for (std::size_t k = 0; k < dims.size(); ++k) tile.push_back(coord[static_cast<std::size_t>(dims[k])] / ext[k]);
          const std::int64_t inst = instance_of(tr.level, v);
          auto it = tr.current.find(inst);
          if (it == tr.current.end() || it->second.first != tile) {
            Residency r;
            r.ext = ext;
            for (std::size_t k = 0; k < tile.size(); ++k) r.lo.push_back(tile[k] * ext[k]);
            // enclosing residency at the parent keep-level
            for (int pj : tracks_of[static_cast<std::size_t>(t)]) {
              const auto& pt = tracks[static_cast<std::size_t>(pj)];
              if (pt.level != tr.parent) continue;
              r.parent = pt.current.at(instance_of(pt.level, v)).second;
            }
            std::vector<std::int64_t> key{instance_of(tr.parent, v), time};
            key.insert(key.end(), tile.begin(), tile.end());
            auto g = tr.groups.find(key);
            if (g == tr.groups.end()) {
              g = tr.groups.emplace(key, static_cast<int>(groups.size())).first;
              groups.push_back({r.parent, 0, r.lo, r.ext});
            }
            r.group = g->second;
            const int id = static_cast<int>(res.size());
            res.push_back(std::move(r));
            tr.current[inst] = {tile, id};
          }
          const int id = tr.current[inst].second;
          res[static_cast<std::size_t>(id)].seen |= nonzero;
          groups[static_cast<std::size_t>(res[static_cast<std::size_t>(id)].group)].seen |= nonzero;
          if (tr.level == compute) cp.operand_res[static_cast<std::size_t>(t)] = id;
        }
      }

      cp.scalar_compute = decide(compute, -1, nonzero);
      if (z >= 0) cp.scalar_output = decide(z_inner, z, nonzero);
      points.push_back(std::move(cp));

      // Output residencies.
      for (std::size_t h = 0; h < z_hops.size(); ++h) {
        const auto [pl, cl] = z_hops[h];
        const auto ext = extent(cl, z);
        const auto dims = w.tensor_dims(z);
        std::vector<std::int64_t> tile;
        double words = 1;
        for (std::size_t k = 0; k < dims.size(); ++k) {
          tile.push_back(coord[static_cast<std::size_t>(dims[k])] / ext[k]);
          words *= static_cast<double>(ext[k]);
        }
        auto& st = z_state[h][instance_of(cl, v)];
        if (st.tile != tile || st.seen.empty()) {
          if (!st.seen.empty()) {
            add(out, {cl, z, ActionKind::read}, words, words, kActual);
            add(out, {pl, z, ActionKind::update}, words, words, kActual);
          }
          add(out, {cl, z, ActionKind::fill}, words, words, kActual);
          if (st.seen.count(tile)) add(out, {pl, z, ActionKind::read}, words, words, kActual);
          else add(out, {pl, z, ActionKind::read}, 0, 0, kActual);
          st.tile = tile;
          st.seen.insert(tile);
        }
      }
      more_space = step(spatial);
    }
    ++time;
    more_time = step(temporal);
  }

  // Final drains of output residencies.
  for (std::size_t h = 0; h < z_hops.size(); ++h) {
    const auto [pl, cl] = z_hops[h];
    double words = 1;
    for (auto e : extent(cl, z)) words *= static_cast<double>(e);
    for (const auto& [inst, st] : z_state[h]) {
      (void)inst;
      if (st.seen.empty()) continue;
      add(out, {cl, z, ActionKind::read}, words, words, kActual);
      add(out, {pl, z, ActionKind::update}, words, words, kActual);
    }
  }

  // Statuses: residencies were created parent-first.
  std::vector<int> group_track(groups.size(), -1);
  for (std::size_t ti = 0; ti < tracks.size(); ++ti)
    for (const auto& [key, gid] : tracks[ti].groups) group_track[static_cast<std::size_t>(gid)] = static_cast<int>(ti);
  for (auto& r : res) {
    const auto& tr = tracks[static_cast<std::size_t>(group_track[static_cast<std::size_t>(r.group)])];
    const int inherited = r.parent >= 0 ? res[static_cast<std::size_t>(r.parent)].status : kActual;
    r.status = std::max(inherited, decide(tr.parent, tr.tensor, r.seen));
  }

  for (const auto& r : res) {
    const auto& tr = tracks[static_cast<std::size_t>(group_track[static_cast<std::size_t>(r.group)])];
    if (tr.level == compute) continue;
    const auto& decl = w.tensors[static_cast<std::size_t>(tr.tensor)];
    double dense = 1;
    for (auto e : r.ext) dense *= static_cast<double>(e);
    const auto* fmt = format(tr.level, tr.tensor);
    if (!fmt) {
      add(out, {tr.level, tr.tensor, ActionKind::fill}, dense, dense, r.status);
      continue;
    }
    const auto enc = encode_tile(*tensors[static_cast<std::size_t>(tr.tensor)], decl.projection, *fmt, r.lo, r.ext);
    const double mdw = arch.storage[static_cast<std::size_t>(tr.level)].metadata_width();
    add(out, {tr.level, tr.tensor, ActionKind::fill}, dense, static_cast<double>(enc.words), r.status);
    add(out, {tr.level, tr.tensor, ActionKind::metadata_fill}, enc.metadata_bits / mdw, enc.metadata_bits / mdw, r.status);
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const auto& tr = tracks[static_cast<std::size_t>(group_track[gi])];
    const int inherited = g.parent >= 0 ? res[static_cast<std::size_t>(g.parent)].status : kActual;
    const int status = std::max(inherited, decide(tr.parent, tr.tensor, g.seen));
    const auto& decl = w.tensors[static_cast<std::size_t>(tr.tensor)];
    double dense = 1;
    for (auto e : g.ext) dense *= static_cast<double>(e);
    const auto* fmt = format(tr.parent, tr.tensor);
    if (!fmt) {
      add(out, {tr.parent, tr.tensor, ActionKind::read}, dense, dense, status);
      continue;
    }
    const auto enc = encode_tile(*tensors[static_cast<std::size_t>(tr.tensor)], decl.projection, *fmt, g.lo, g.ext);
    const double mdw = arch.storage[static_cast<std::size_t>(tr.parent)].metadata_width();
    add(out, {tr.parent, tr.tensor, ActionKind::read}, dense, static_cast<double>(enc.words), status);
    const int meta_status = leads.count({tr.parent, tr.tensor}) ? inherited : status;
    add(out, {tr.parent, tr.tensor, ActionKind::metadata_read}, enc.metadata_bits / mdw, enc.metadata_bits / mdw,
        meta_status);
  }

  for (const auto& cp : points) {
    int status = cp.scalar_compute;
    for (int t = 0; t < nt; ++t)
      if (cp.operand_res[static_cast<std::size_t>(t)] >= 0)
        status = std::max(status, res[static_cast<std::size_t>(cp.operand_res[static_cast<std::size_t>(t)])].status);
    add(out, {compute, -1, ActionKind::compute}, 1, 1, status);
    if (z >= 0 && z_inner >= 0) add(out, {z_inner, z, ActionKind::update}, 1, 1, std::max(status, cp.scalar_output));
  }
  return {out};
}

}  // namespace sam
