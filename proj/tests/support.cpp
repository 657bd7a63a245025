#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sam/dataflow.hpp"
#include "sam/spec_io.hpp"

namespace samtest {

using namespace sam;

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

DensityModelSpec uniform(double d) {
  DensityModelSpec s;
  s.kind = DensityKind::uniform;
  s.density = d;
  return s;
}

DensityModelSpec actual(std::shared_ptr<const ConcreteTensor> data) {
  DensityModelSpec s;
  s.kind = DensityKind::actual_data;
  s.data = std::move(data);
  return s;
}

Workload matmul(std::int64_t M, std::int64_t N, std::int64_t K, const DensityModelSpec& a, const DensityModelSpec& b) {
  Workload w;
  w.dims = {{"M", M}, {"N", N}, {"K", K}};
  w.tensors = {{"A", {"M", "K"}, a, false}, {"B", {"K", "N"}, b, false}, {"Z", {"M", "N"}, std::nullopt, true}};
  return w;
}

Architecture architecture(const std::vector<std::pair<std::string, std::int64_t>>& levels, double capacity_bits,
                          double bandwidth) {
  Architecture a;
  std::int64_t units = 1;
  for (const auto& [name, fanout] : levels) {
    StorageLevel s;
    s.name = name;
    s.capacity_bits = capacity_bits;
    s.read_bandwidth = bandwidth;
    s.write_bandwidth = bandwidth;
    s.word_width = 8;
    s.metadata_word_width = 4;
    s.fanout = fanout;
    units *= fanout;
    a.storage.push_back(s);
  }
  a.compute = {"MAC", units};
  return a;
}

EnergyTable full_energy(const Architecture& arch) {
  EnergyTable e;
  double scale = 100;
  for (const auto& s : arch.storage) {
    e.entries[{s.name, EnergyAction::read}] = {scale, scale / 10};
    e.entries[{s.name, EnergyAction::write}] = {scale * 1.2, scale / 8};
    e.entries[{s.name, EnergyAction::metadata_read}] = {scale / 4, scale / 40};
    e.entries[{s.name, EnergyAction::metadata_write}] = {scale / 3, scale / 30};
    scale /= 5;
  }
  e.entries[{arch.compute.name, EnergyAction::compute}] = {1.0, 0.1};
  return e;
}

Problem yaml_problem(const std::string& workload, const std::string& arch, const std::string& mapping,
                     const std::string& safs) {
  const auto a = parse_architecture({"architecture:\n" + arch, "architecture"});
  return parse_problem("workload:\n" + workload, "architecture:\n" + arch, "sparse_optimizations:\n" + safs,
                       "mapping:\n" + mapping, emit_energy(full_energy(a)));
}

namespace {

std::int64_t random_bound(Rng& rng, std::int64_t max_bound) {
  static const std::int64_t choices[] = {1, 2, 3, 4, 4, 6, 8, 8, 12, 16};
  std::vector<std::int64_t> ok;
  for (auto c : choices)
    if (c <= max_bound) ok.push_back(c);
  return ok[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(ok.size()) - 1))];
}

Workload random_shape(Rng& rng, std::int64_t max_bound) {
  Workload w;
  auto dims = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) w.dims.push_back({n, random_bound(rng, max_bound)});
  };
  auto tensor = [&](const char* name, std::vector<std::string> proj, bool out = false) {
    w.tensors.push_back({name, std::move(proj), std::nullopt, out});
  };
  switch (pick(rng, 0, 6)) {
    case 0:
      dims({"M", "N", "K"});
      tensor("A", {"M", "K"});
      tensor("B", {"K", "N"});
      tensor("Z", {"M", "N"}, true);
      break;
    case 1:
      dims({"M", "K"});
      tensor("A", {"M", "K"});
      tensor("B", {"K"});
      tensor("Z", {"M"}, true);
      break;
    case 2:
      dims({"K"});
      tensor("A", {"K"});
      tensor("B", {"K"});
      tensor("Z", {}, true);
      break;
    case 3:
      dims({"M", "N"});
      tensor("A", {"M", "N"});
      tensor("B", {"M", "N"});
      tensor("Z", {"M", "N"}, true);
      break;
    case 4:
      dims({"M", "N"});
      tensor("A", {"M"});
      tensor("B", {"N"});
      tensor("Z", {"M", "N"}, true);
      break;
    case 5:
      dims({"M", "K"});
      tensor("A", {"M", "K"});
      tensor("B", {"K"});
      tensor("C", {"M"});
      tensor("Z", {"M"}, true);
      break;
    default:
      dims({"B", "M", "K"});
      tensor("A", {"B", "M", "K"});
      tensor("X", {"B", "K"});
      tensor("Z", {"B", "M"}, true);
      break;
  }
  return w;
}

RepresentationFormat random_format(Rng& rng, const std::vector<std::string>& projection) {
  static const RankKind kinds[] = {RankKind::U, RankKind::UB, RankKind::B, RankKind::CP, RankKind::RLE, RankKind::UOP};
  RepresentationFormat f;
  std::vector<std::string> dims = projection;
  if (coin(rng, 0.3)) std::shuffle(dims.begin(), dims.end(), rng);
  std::size_t i = 0;
  while (i < dims.size()) {
    const auto take = static_cast<std::size_t>(pick(rng, 1, static_cast<std::int64_t>(dims.size() - i)));
    RankFormat r;
    r.kind = kinds[pick(rng, 0, 5)];
    r.dims.assign(dims.begin() + static_cast<std::ptrdiff_t>(i), dims.begin() + static_cast<std::ptrdiff_t>(i + take));
    if (coin(rng, 0.2)) r.width = static_cast<int>(pick(rng, 1, 4));
    f.ranks.push_back(std::move(r));
    i += take;
  }
  return f;
}

}  // namespace

Mapping random_mapping(Rng& rng, const Workload& w, const Architecture& a) {
  const int L = a.num_storage();
  std::vector<std::vector<std::int64_t>> temporal(static_cast<std::size_t>(L)), spatial(static_cast<std::size_t>(L));
  std::vector<std::int64_t> room(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) room[static_cast<std::size_t>(l)] = a.storage[static_cast<std::size_t>(l)].fanout;
  for (auto& v : temporal) v.assign(w.dims.size(), 1);
  for (auto& v : spatial) v.assign(w.dims.size(), 1);

  auto divisor = [&](std::int64_t n, std::int64_t cap) {
    std::vector<std::int64_t> ds;
    for (std::int64_t f = 1; f <= n; ++f)
      if (n % f == 0 && f <= cap) ds.push_back(f);
    return ds[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(ds.size()) - 1))];
  };
  for (std::size_t d = 0; d < w.dims.size(); ++d) {
    std::int64_t rest = w.dims[d].bound;
    for (int l = L - 1; l >= 0; --l) {
      auto& r = room[static_cast<std::size_t>(l)];
      const auto s = coin(rng, 0.5) ? divisor(rest, r) : 1;
      spatial[static_cast<std::size_t>(l)][d] = s;
      r /= s;
      rest /= s;
      if (l > 0) {
        const auto t = divisor(rest, rest);
        temporal[static_cast<std::size_t>(l)][d] = t;
        rest /= t;
      } else {
        temporal[0][d] = rest;
      }
    }
  }

  Mapping m;
  for (int l = 0; l < L; ++l) {
    LevelMapping lm;
    lm.level = a.storage[static_cast<std::size_t>(l)].name;
    for (const auto& t : w.tensors)
      if (l == 0 || coin(rng, 0.6)) lm.keep.push_back(t.name);
    std::vector<std::size_t> order(w.dims.size());
    for (std::size_t d = 0; d < order.size(); ++d) order[d] = d;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto d : order)
      if (temporal[static_cast<std::size_t>(l)][d] > 1 || coin(rng, 0.1))
        lm.loops.push_back({w.dims[d].name, temporal[static_cast<std::size_t>(l)][d], false});
    std::shuffle(order.begin(), order.end(), rng);
    for (auto d : order)
      if (spatial[static_cast<std::size_t>(l)][d] > 1) lm.loops.push_back({w.dims[d].name, spatial[static_cast<std::size_t>(l)][d], true});
    // Interleave spatial and temporal loops now and then.
    if (coin(rng, 0.2)) std::shuffle(lm.loops.begin(), lm.loops.end(), rng);
    m.levels.push_back(std::move(lm));
  }
  return m;
}

SafSpec random_safs(Rng& rng, const Problem& p) {
  const auto& w = p.workload;
  const auto& a = p.architecture;
  const LoopNest nest(w, a, p.mapping);
  SafSpec spec;
  const int out = w.output_index();
  for (int l = 0; l < a.num_storage(); ++l) {
    LevelSafs ls;
    ls.level = a.storage[static_cast<std::size_t>(l)].name;
    std::vector<int> kept;
    for (std::size_t t = 0; t < w.tensors.size(); ++t)
      if (nest.keeps(l, static_cast<int>(t))) kept.push_back(static_cast<int>(t));
    for (int t : kept)
      if (t != out && coin(rng, 0.45))
        ls.formats[w.tensors[static_cast<std::size_t>(t)].name] = random_format(rng, w.tensors[static_cast<std::size_t>(t)].projection);
    std::set<int> targeted;
    for (int t : kept) {
      if (targeted.count(t) || !coin(rng, 0.4)) continue;
      if (t == out && nest.child_of(l, t) != nest.compute_level()) continue;
      std::vector<int> leaders;
      for (int x : kept)
        if (x != t && x != out) leaders.push_back(x);
      if (leaders.empty()) continue;
      std::shuffle(leaders.begin(), leaders.end(), rng);
      leaders.resize(static_cast<std::size_t>(pick(rng, 1, static_cast<std::int64_t>(leaders.size()))));
      ActionOptimization op;
      op.kind = coin(rng) ? SafKind::skip : SafKind::gate;
      op.target = w.tensors[static_cast<std::size_t>(t)].name;
      const bool double_sided = t != out && leaders.size() == 1 && !targeted.count(leaders[0]) && coin(rng, 0.3);
      if (double_sided) op.condition_on.push_back(op.target);
      for (int x : leaders) op.condition_on.push_back(w.tensors[static_cast<std::size_t>(x)].name);
      if (op.kind == SafKind::skip)
        for (const auto& c : op.condition_on)
          if (!ls.formats.count(c) || !ls.formats.at(c).compressed()) op.kind = SafKind::gate;
      targeted.insert(t);
      if (double_sided) targeted.insert(leaders[0]);
      ls.actions.push_back(std::move(op));
    }
    // A format made only of U ranks is not metadata; drop it half the time.
    for (auto it = ls.formats.begin(); it != ls.formats.end();)
      it = !it->second.compressed() && coin(rng) ? ls.formats.erase(it) : std::next(it);
    if (!ls.formats.empty() || !ls.actions.empty()) spec.levels.push_back(std::move(ls));
  }
  if (coin(rng, 0.5)) {
    LevelSafs ls;
    ls.level = a.compute.name;
    ActionOptimization op;
    op.kind = coin(rng) ? SafKind::skip : SafKind::gate;
    op.target = "compute";
    for (std::size_t t = 0; t < w.tensors.size(); ++t)
      if (static_cast<int>(t) != out && coin(rng, 0.6)) op.condition_on.push_back(w.tensors[t].name);
    ls.actions.push_back(std::move(op));
    spec.levels.push_back(std::move(ls));
  }
  // Skipping needs the leader's format; drop skip bindings made illegal above.
  for (auto& ls : spec.levels)
    for (auto& op : ls.actions)
      if (op.kind == SafKind::skip && ls.level != a.compute.name)
        for (const auto& c : op.condition_on)
          if (!spec.format(ls.level, c)) op.kind = SafKind::gate;
  return spec;
}

std::vector<Problem> statistical_problems() {
  const std::string mm = R"(
  dims: {M: 8, N: 8, K: 8}
  tensors:
    - {name: A, projection: [M, K], density: {model: uniform, density: DA}}
    - {name: B, projection: [K, N], density: {model: uniform, density: DB}}
    - {name: Z, projection: [M, N], output: true}
)";
  auto matmul = [&](const char* da, const char* db) {
    std::string s = mm;
    s.replace(s.find("DA"), 2, da);
    s.replace(s.find("DB"), 2, db);
    return s;
  };
  const std::string two = R"(
  storage:
    - {name: DRAM, capacity: 1e9, read_bandwidth: 4, write_bandwidth: 4, fanout: 1}
    - {name: Buffer, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2, fanout: 1}
  compute: {name: MAC, num_units: 1}
)";
  const std::string two_wide = R"(
  storage:
    - {name: DRAM, capacity: 1e9, read_bandwidth: 4, write_bandwidth: 4, fanout: 2}
    - {name: Buffer, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2, fanout: 2}
  compute: {name: MAC, num_units: 4}
)";
  const std::string three = R"(
  storage:
    - {name: DRAM, capacity: 1e9, read_bandwidth: 4, write_bandwidth: 4, fanout: 1}
    - {name: GLB, capacity: 1e7, read_bandwidth: 4, write_bandwidth: 4, fanout: 2}
    - {name: RF, capacity: 1e5, read_bandwidth: 2, write_bandwidth: 2, fanout: 1}
  compute: {name: MAC, num_units: 2}
)";
  const std::string map_mnk = R"(
  - level: DRAM
    keep: [A, B, Z]
    loops: [{dim: M, factor: 2}, {dim: N, factor: 2}, {dim: K, factor: 2}]
  - level: Buffer
    keep: [A, B, Z]
    loops: [{dim: M, factor: 4}, {dim: N, factor: 4}, {dim: K, factor: 4}]
)";
  const std::string map_kmn = R"(
  - level: DRAM
    keep: [A, B, Z]
    loops: [{dim: K, factor: 4}, {dim: M, factor: 2}]
  - level: Buffer
    keep: [A, B]
    loops: [{dim: N, factor: 8}, {dim: M, factor: 4}, {dim: K, factor: 2}]
)";
  const std::string map_wide = R"(
  - level: DRAM
    keep: [A, B, Z]
    loops: [{dim: M, factor: 4}, {dim: K, factor: 2}, {dim: N, factor: 2, spatial: true}]
  - level: Buffer
    keep: [A, B, Z]
    loops: [{dim: N, factor: 4}, {dim: K, factor: 4}, {dim: M, factor: 2, spatial: true}]
)";
  const std::string map_three = R"(
  - level: DRAM
    keep: [A, B, Z]
    loops: [{dim: N, factor: 2}, {dim: M, factor: 2}]
  - level: GLB
    keep: [A, B, Z]
    loops: [{dim: K, factor: 2}, {dim: M, factor: 2}, {dim: N, factor: 2, spatial: true}]
  - level: RF
    keep: [A, B, Z]
    loops: [{dim: K, factor: 4}, {dim: M, factor: 2}, {dim: N, factor: 2}]
)";
  std::vector<Problem> out;
  // Leader-follower gating with a coordinate-list leader.
  out.push_back(yaml_problem(matmul("0.5", "0.5"), two, map_mnk, R"(
  - level: Buffer
    formats: {A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [K]}]}
    actions: [{kind: gate, target: B, condition_on: [A]}]
)"));
  // Skipping B on A plus compute skipping.
  out.push_back(yaml_problem(matmul("0.3", "0.7"), two, map_mnk, R"(
  - level: Buffer
    formats: {A: CSR}
    actions: [{kind: skip, target: B, condition_on: [A]}]
  - level: MAC
    actions: [{kind: skip, target: compute, condition_on: [A, B]}]
)"));
  // Double-sided skipping between compressed operands.
  out.push_back(yaml_problem(matmul("0.4", "0.6"), two, map_mnk, R"(
  - level: Buffer
    formats: {A: CSR, B: [{kind: B, dims: [K, N]}]}
    actions: [{kind: skip, target: A, condition_on: [A, B]}]
)"));
  // Hierarchical skipping: DRAM level on bitmask leader, then innermost.
  out.push_back(yaml_problem(matmul("0.5", "0.5"), two, map_kmn, R"(
  - level: DRAM
    formats: {A: [{kind: B, dims: [M, K]}]}
    actions: [{kind: skip, target: B, condition_on: [A]}]
  - level: Buffer
    formats: {A: [{kind: UB, dims: [M]}, {kind: CP, dims: [K]}]}
    actions: [{kind: skip, target: B, condition_on: [A]}]
  - level: MAC
    actions: [{kind: gate, target: compute, condition_on: []}]
)"));
  // Run-length formats and output gating on both operands.
  out.push_back(yaml_problem(matmul("0.6", "0.4"), two, map_mnk, R"(
  - level: Buffer
    formats: {A: [{kind: U, dims: [M]}, {kind: RLE, dims: [K]}], B: [{kind: RLE, dims: [K, N]}]}
    actions:
      - {kind: skip, target: Z, condition_on: [A, B]}
      - {kind: gate, target: A, condition_on: [B]}
)"));
  // Spatial fanout with multicast and gating.
  out.push_back(yaml_problem(matmul("0.5", "0.7"), two_wide, map_wide, R"(
  - level: Buffer
    formats: {B: [{kind: CP, dims: [K, N]}]}
    actions: [{kind: skip, target: A, condition_on: [B]}]
  - level: MAC
    actions: [{kind: gate, target: compute, condition_on: [A]}]
)"));
  // Three-level hierarchy with formats at every level.
  out.push_back(yaml_problem(matmul("0.5", "0.5"), three, map_three, R"(
  - level: DRAM
    formats: {A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [K]}], B: [{kind: UOP, dims: [K]}, {kind: CP, dims: [N]}]}
  - level: GLB
    formats: {A: [{kind: B, dims: [M, K]}]}
    actions: [{kind: gate, target: B, condition_on: [A]}]
  - level: RF
    formats: {A: [{kind: CP, dims: [M, K]}], B: [{kind: CP, dims: [K, N]}]}
    actions: [{kind: skip, target: B, condition_on: [B, A]}, {kind: gate, target: Z, condition_on: [A]}]
)"));
  // Dense-ish operands with gating only.
  out.push_back(yaml_problem(matmul("0.7", "0.7"), three, map_three, R"(
  - level: GLB
    actions: [{kind: gate, target: A, condition_on: [B]}]
  - level: MAC
    actions: [{kind: gate, target: compute, condition_on: [A, B]}]
)"));
  const std::string mv = R"(
  dims: {M: 16, K: 16}
  tensors:
    - {name: A, projection: [M, K], density: {model: uniform, density: 0.25}}
    - {name: X, projection: [K], density: {model: uniform, density: 0.5}}
    - {name: Z, projection: [M], output: true}
)";
  const std::string map_mv = R"(
  - level: DRAM
    keep: [A, X, Z]
    loops: [{dim: M, factor: 4}, {dim: K, factor: 2}]
  - level: Buffer
    keep: [A, X, Z]
    loops: [{dim: K, factor: 8}, {dim: M, factor: 4}]
)";
  // Matrix-vector: skip the matrix on the vector, run-length vector.
  out.push_back(yaml_problem(mv, two, map_mv, R"(
  - level: Buffer
    formats: {X: [{kind: RLE, dims: [K]}], A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [K]}]}
    actions: [{kind: skip, target: A, condition_on: [X]}, {kind: skip, target: Z, condition_on: [X, A]}]
  - level: MAC
    actions: [{kind: skip, target: compute, condition_on: [A, X]}]
)"));
  // Matrix-vector: gate the vector on the matrix at DRAM.
  out.push_back(yaml_problem(mv, two, map_mv, R"(
  - level: DRAM
    formats: {A: CSR}
    actions: [{kind: gate, target: X, condition_on: [A]}]
  - level: Buffer
    formats: {A: [{kind: B, dims: [M, K]}]}
)"));
  const std::string ew = R"(
  dims: {M: 8, N: 8}
  tensors:
    - {name: A, projection: [M, N], density: {model: uniform, density: 0.5}}
    - {name: B, projection: [M, N], density: {model: uniform, density: 0.75}}
    - {name: Z, projection: [M, N], output: true}
)";
  const std::string map_ew = R"(
  - level: DRAM
    keep: [A, B, Z]
    loops: [{dim: M, factor: 2}]
  - level: Buffer
    keep: [A, B, Z]
    loops: [{dim: M, factor: 4}, {dim: N, factor: 8}]
)";
  // Element-wise product: compute skipping with compressed leaders.
  out.push_back(yaml_problem(ew, two, map_ew, R"(
  - level: Buffer
    formats: {A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [N]}]}
    actions: [{kind: skip, target: B, condition_on: [A]}]
  - level: MAC
    actions: [{kind: skip, target: compute, condition_on: [A, B]}]
)"));
  // Element-wise: gating the output on both operands.
  out.push_back(yaml_problem(ew, two, map_ew, R"(
  - level: Buffer
    actions: [{kind: gate, target: Z, condition_on: [A, B]}]
)"));
  return out;
}

Problem random_problem(Rng& rng, const RandomOptions& o) {
  Problem p;
  p.workload = random_shape(rng, o.max_bound);
  std::vector<std::pair<std::string, std::int64_t>> levels;
  const int L = static_cast<int>(pick(rng, 1, o.max_levels));
  static const std::int64_t fanouts[] = {1, 1, 2, 4};
  for (int l = 0; l < L; ++l) levels.push_back({"L" + std::to_string(l), fanouts[pick(rng, 0, 3)]});
  p.architecture = architecture(levels, 1e12, static_cast<double>(pick(rng, 1, 4)));
  p.energy = full_energy(p.architecture);

  static const double densities[] = {0.1, 0.25, 0.4, 0.5, 0.75, 1.0};
  static const double stat_densities[] = {0.25, 0.5, 0.75};
  for (auto& t : p.workload.tensors) {
    if (t.is_output) continue;
    if (o.dense) {
      t.density = uniform(1.0);
    } else if (o.actual_data) {
      std::vector<std::int64_t> dims;
      for (const auto& d : t.projection) dims.push_back(p.workload.bound(p.workload.dim_index(d)));
      const auto data = random_tensor(dims, uniform(densities[pick(rng, 0, 5)]), t.projection, rng());
      t.density = actual(std::make_shared<const ConcreteTensor>(data));
    } else {
      t.density = uniform(stat_densities[pick(rng, 0, 2)]);
    }
  }
  p.mapping = random_mapping(rng, p.workload, p.architecture);
  if (o.safs) p.safs = random_safs(rng, p);
  return p;
}

ConcreteTensors sample_tensors(const Workload& w, std::uint64_t seed) {
  ConcreteTensors out;
  for (std::size_t t = 0; t < w.tensors.size(); ++t) {
    const auto& decl = w.tensors[t];
    if (decl.is_output) {
      out.push_back(nullptr);
      continue;
    }
    std::vector<std::int64_t> dims;
    for (const auto& d : decl.projection) dims.push_back(w.bound(w.dim_index(d)));
    out.push_back(std::make_shared<const ConcreteTensor>(random_tensor(dims, *decl.density, decl.projection, seed * 7919 + t)));
  }
  return out;
}

std::vector<std::string> compare(const ActionBreakdown& analytic, const ActionBreakdown& oracle, double tol) {
  std::set<EntryKey> keys;
  for (const auto& [k, v] : analytic) keys.insert(k);
  for (const auto& [k, v] : oracle) keys.insert(k);
  std::vector<std::string> out;
  auto close = [&](double x, double y) { return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)}); };
  for (const auto& k : keys) {
    const auto a = analytic.count(k) ? analytic.at(k) : ActionCounts{};
    const auto o = oracle.count(k) ? oracle.at(k) : ActionCounts{};
    if (close(a.dense, o.dense) && close(a.actual, o.actual) && close(a.gated, o.gated)) continue;
    std::ostringstream os;
    os << "level " << k.level << " tensor " << k.tensor << " " << to_string(k.action) << ": analytic (" << a.dense << ", "
       << a.actual << ", " << a.gated << ") oracle (" << o.dense << ", " << o.actual << ", " << o.gated << ")";
    out.push_back(os.str());
  }
  return out;
}

std::string describe(const Problem& p) {
  std::ostringstream os;
  os << emit_workload(p.workload) << emit_architecture(p.architecture) << emit_mapping(p.mapping) << emit_safs(p.safs);
  for (const auto& t : p.workload.tensors) {
    if (!t.density || !t.density->data) continue;
    os << "# " << t.name << " nonzeros:";
    for (const auto& c : t.density->data->nonzeros) {
      os << " (";
      for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace samtest
