#include <doctest.h>

#include "sam/oracle.hpp"
#include "sam/spec_io.hpp"
#include "sam/sparse.hpp"
#include "support.hpp"

using namespace sam;

namespace {

const std::string kMatmul = R"(
  dims: {M: 4, N: 4, K: 4}
  tensors:
    - {name: A, projection: [M, K], density: {model: uniform, density: DA}}
    - {name: B, projection: [K, N], density: {model: uniform, density: DB}}
    - {name: Z, projection: [M, N], output: true}
)";

std::string matmul(const std::string& da, const std::string& db) {
  std::string s = kMatmul;
  s.replace(s.find("DA"), 2, da);
  s.replace(s.find("DB"), 2, db);
  return s;
}

const std::string kBuffer = R"(
  storage:
    - {name: Buffer, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2}
  compute: {name: MAC, num_units: 1}
)";

const std::string kTwoLevels = R"(
  storage:
    - {name: Backing, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2}
    - {name: Buffer, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2}
  compute: {name: MAC, num_units: 1}
)";

// Innermost K: one A value per B access. Innermost M: a column of A.
const std::string kInnerK = R"(
  - {level: Buffer, keep: [A, B, Z], loops: [{dim: M, factor: 4}, {dim: N, factor: 4}, {dim: K, factor: 4}]}
)";
const std::string kInnerM = R"(
  - {level: Buffer, keep: [A, B, Z], loops: [{dim: N, factor: 4}, {dim: K, factor: 4}, {dim: M, factor: 4}]}
)";

const std::string kSkipBonA = R"(
  - level: Buffer
    formats: {A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [K]}]}
    actions: [{kind: skip, target: B, condition_on: [A]}]
)";

const ActionCounts& at(const ActionBreakdown& b, int level, int tensor, ActionKind a) {
  static const ActionCounts none;
  auto it = b.find({level, tensor, a});
  return it == b.end() ? none : it->second;
}

Problem dot_product(const std::string& safs) {
  const std::string dir = std::string(SAM_SOURCE_DIR) + "/specs/dot_product/";
  return parse_problem(read_spec_file(dir + "workload.yaml"), read_spec_file(dir + "arch.yaml"),
                       read_spec_file(dir + safs), read_spec_file(dir + "mapping.yaml"),
                       read_spec_file(dir + "energy.yaml"), dir);
}

const IntersectionBinding* binding_for(const std::vector<IntersectionBinding>& bs, int follower, int leader) {
  for (const auto& b : bs)
    if (b.follower == follower && b.leader == leader) return &b;
  return nullptr;
}

constexpr double kEmptyColumn = 495.0 / 1820.0;  // C(12,4)/C(16,4)

}  // namespace

TEST_CASE("leader tile follows the mapping's reuse") {
  const auto inner_k = samtest::yaml_problem(matmul("0.25", "1.0"), kBuffer, kInnerK, kSkipBonA);
  const auto inner_m = samtest::yaml_problem(matmul("0.25", "1.0"), kBuffer, kInnerM, kSkipBonA);
  const int A = inner_k.workload.tensor_index("A"), B = inner_k.workload.tensor_index("B");
  {
    const LoopNest nest(inner_k.workload, inner_k.architecture, inner_k.mapping);
    const auto bs = resolve_intersection_operands(inner_k, nest);
    const auto* b = binding_for(bs, B, A);
    REQUIRE(b);
    CHECK(b->leader_tile.size() == 1);
    CHECK(b->kind == SafKind::skip);
  }
  {
    const LoopNest nest(inner_m.workload, inner_m.architecture, inner_m.mapping);
    const auto bs = resolve_intersection_operands(inner_m, nest);
    const auto* b = binding_for(bs, B, A);
    REQUIRE(b);
    CHECK(b->leader_tile.size() == 4);
    CHECK(b->leader_tile.extents() == std::vector<std::int64_t>{4, 1});
  }
}

TEST_CASE("double-sided intersection resolves to two bindings") {
  const auto p = samtest::yaml_problem(matmul("0.25", "0.5"), kBuffer, kInnerK, R"(
  - level: Buffer
    formats: {A: CSR, B: CSR}
    actions: [{kind: skip, target: B, condition_on: [A, B]}]
)");
  const LoopNest nest(p.workload, p.architecture, p.mapping);
  const auto bs = resolve_intersection_operands(p, nest);
  const int A = p.workload.tensor_index("A"), B = p.workload.tensor_index("B");
  CHECK(binding_for(bs, B, A));
  CHECK(binding_for(bs, A, B));
}

TEST_CASE("scalar leader skips in proportion to its density") {
  const auto p = samtest::yaml_problem(matmul("0.25", "1.0"), kBuffer, kInnerK, kSkipBonA);
  const auto t = sparse_traffic(p);
  const auto& b = at(t.actions, 0, p.workload.tensor_index("B"), ActionKind::read);
  CHECK(b.dense == 64);
  CHECK(b.actual == doctest::Approx(16));
  CHECK(b.gated == 0);
  CHECK(b.skipped() == doctest::Approx(48));
}

TEST_CASE("column leader skips when the whole column is empty") {
  const auto p = samtest::yaml_problem(matmul("0.25", "1.0"), kBuffer, kInnerM, kSkipBonA);
  const auto t = sparse_traffic(p);
  const auto& b = at(t.actions, 0, p.workload.tensor_index("B"), ActionKind::read);
  REQUIRE(b.dense > 0);
  CHECK(b.skipped() / b.dense == doctest::Approx(kEmptyColumn).epsilon(1e-12));
}

TEST_CASE("compute gating on two independent scalars") {
  const auto p = samtest::yaml_problem(matmul("0.25", "0.5"), kBuffer, kInnerK, R"(
  - level: MAC
    actions: [{kind: gate, target: compute, condition_on: [A, B]}]
)");
  const int C = p.architecture.num_storage();
  const auto t = sparse_traffic(p);
  const auto& c = at(t.actions, C, -1, ActionKind::compute);
  CHECK(c.actual / c.dense == doctest::Approx(0.125));
  CHECK(c.gated / c.dense == doctest::Approx(0.875));

  // Monte-Carlo over random placements.
  double actual = 0;
  const int runs = 2000;
  for (int s = 0; s < runs; ++s)
    actual += at(simulate(p, samtest::sample_tensors(p.workload, static_cast<std::uint64_t>(s))).entries, C, -1,
                 ActionKind::compute).actual;
  CHECK(actual / runs / 64 == doctest::Approx(0.125).epsilon(0.05));
}

TEST_CASE("skipping at the outer level thins inner fills") {
  const auto p = samtest::yaml_problem(matmul("0.25", "1.0"), kTwoLevels, R"(
  - {level: Backing, keep: [A, B, Z], loops: [{dim: N, factor: 4}, {dim: K, factor: 4}]}
  - {level: Buffer, keep: [A, B, Z], loops: [{dim: M, factor: 4}]}
)", R"(
  - level: Backing
    formats: {A: [{kind: UOP, dims: [M]}, {kind: CP, dims: [K]}]}
    actions: [{kind: skip, target: B, condition_on: [A]}]
)");
  const auto t = sparse_traffic(p);
  const auto& fill = at(t.actions, 1, p.workload.tensor_index("B"), ActionKind::fill);
  CHECK(fill.dense == 16);
  CHECK(fill.actual == doctest::Approx(16 * (1 - kEmptyColumn)).epsilon(1e-12));
  CHECK(fill.skipped() == doctest::Approx(16 * kEmptyColumn).epsilon(1e-12));
}

TEST_CASE("an all-zero leader leaves nothing actual below it") {
  auto empty = std::make_shared<ConcreteTensor>();
  empty->dims = {4, 4};
  Problem p;
  p.workload = samtest::matmul(4, 4, 4, samtest::actual(empty), samtest::uniform(1.0));
  p.architecture = samtest::architecture({{"Backing", 1}, {"Buffer", 1}});
  p.mapping.levels = {{"Backing", {{"N", 4, false}, {"K", 4, false}}, {"A", "B", "Z"}},
                      {"Buffer", {{"M", 4, false}}, {"A", "B", "Z"}}};
  LevelSafs ls;
  ls.level = "Backing";
  ls.formats["A"] = describe_classic_format("CSR", {"M", "K"});
  ls.actions.push_back({SafKind::skip, "B", {"A"}});
  p.safs.levels.push_back(ls);
  p.energy = samtest::full_energy(p.architecture);
  const auto t = sparse_traffic(p);
  const int B = p.workload.tensor_index("B");
  CHECK(at(t.actions, 1, B, ActionKind::fill).actual == 0);
  CHECK(at(t.actions, 1, B, ActionKind::read).actual == 0);
  CHECK(at(t.actions, 2, -1, ActionKind::compute).actual == 0);
}

TEST_CASE("without optimizations every count stays actual") {
  samtest::Rng rng(3);
  for (bool dense : {true, false}) {
    samtest::RandomOptions o;
    o.safs = false;
    o.dense = dense;
    o.actual_data = false;
    for (int i = 0; i < 50; ++i) {
      const auto p = samtest::random_problem(rng, o);
      const auto d = dense_traffic(p.workload, p.architecture, p.mapping);
      const auto t = sparse_traffic(p);
      for (const auto& [k, c] : t.actions) {
        CHECK(c.actual == c.dense);
        if (k.action == ActionKind::compute) CHECK(c.dense == static_cast<double>(d.compute_count));
      }
    }
  }
}

TEST_CASE("full density eliminates nothing even with optimizations") {
  samtest::Rng rng(4);
  samtest::RandomOptions o;
  o.dense = true;
  o.actual_data = false;
  for (int i = 0; i < 80; ++i) {
    const auto p = samtest::random_problem(rng, o);
    CAPTURE(samtest::describe(p));
    for (const auto& [k, c] : sparse_traffic(p).actions) {
      CHECK(c.gated == doctest::Approx(0));
      CHECK(c.skipped() == doctest::Approx(0));
    }
  }
}

TEST_CASE("dot product with actual data") {
  const int buffer = 0, mac = 1;
  {
    const auto p = dot_product("safs_none.yaml");
    for (const auto& [k, c] : sparse_traffic(p).actions) {
      CHECK(c.actual == c.dense);
      if (k.action == ActionKind::metadata_read || k.action == ActionKind::metadata_fill) CHECK(c.dense == 0);
    }
  }
  {
    const auto p = dot_product("safs_gate_compute.yaml");
    const auto& c = at(sparse_traffic(p).actions, mac, -1, ActionKind::compute);
    CHECK(c.actual == 1);
    CHECK(c.gated == 3);
    CHECK(c.skipped() == 0);
  }
  {
    const auto p = dot_product("safs_skip_b.yaml");
    const auto t = sparse_traffic(p);
    const auto& b = at(t.actions, buffer, p.workload.tensor_index("B"), ActionKind::read);
    CHECK(b.actual == 2);
    CHECK(b.skipped() == 2);
    // The leader's metadata must be read to decide the skip.
    const auto& meta = at(t.actions, buffer, p.workload.tensor_index("A"), ActionKind::metadata_read);
    CHECK(meta.dense > 0);
    CHECK(meta.actual == meta.dense);
  }
}

TEST_CASE("run-length metadata reads per tile") {
  const auto p = samtest::yaml_problem(R"(
  dims: {K: 8}
  tensors:
    - {name: A, projection: [K], density: {model: uniform, density: 0.5}}
    - {name: B, projection: [K], density: {model: uniform, density: 1.0}}
    - {name: Z, projection: [K], output: true}
)", R"(
  storage:
    - {name: DRAM, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2, metadata_word_width: 3}
    - {name: Buffer, capacity: 1e6, read_bandwidth: 2, write_bandwidth: 2}
  compute: {name: MAC, num_units: 1}
)", R"(
  - {level: DRAM, keep: [A, B, Z], loops: []}
  - {level: Buffer, keep: [A, B, Z], loops: [{dim: K, factor: 8}]}
)", R"(
  - level: DRAM
    formats: {A: [{kind: RLE, dims: [K]}]}
)");
  const auto& m = at(sparse_traffic(p).actions, 0, p.workload.tensor_index("A"), ActionKind::metadata_read);
  CHECK(m.dense == doctest::Approx(4.0));
  CHECK(m.actual == doctest::Approx(4.0));
}

TEST_CASE("gate and skip eliminate the same share") {
  for (const auto& map : {kInnerK, kInnerM}) {
    const auto skip = samtest::yaml_problem(matmul("0.3", "0.6"), kBuffer, map, kSkipBonA);
    std::string gate_safs = kSkipBonA;
    gate_safs.replace(gate_safs.find("skip"), 4, "gate");
    const auto gate = samtest::yaml_problem(matmul("0.3", "0.6"), kBuffer, map, gate_safs);
    const auto ts = sparse_traffic(skip), tg = sparse_traffic(gate);
    const auto& s = at(ts.actions, 0, 1, ActionKind::read);
    const auto& g = at(tg.actions, 0, 1, ActionKind::read);
    CHECK(s.actual == doctest::Approx(g.actual));
    CHECK(s.skipped() == doctest::Approx(g.gated));
    CHECK(s.gated == 0);
    CHECK(g.skipped() == doctest::Approx(0));
  }
}

TEST_CASE("double-sided intersection eliminates at least as much as either side") {
  for (const auto& [da, db] : {std::pair{"0.25", "0.5"}, {"0.5", "0.5"}, {"0.75", "0.25"}, {"1.0", "0.25"}}) {
    for (const auto& map : {kInnerK, kInnerM}) {
      auto run = [&](const char* leaders) {
        const auto p = samtest::yaml_problem(matmul(da, db), kBuffer, map, std::string(R"(
  - level: Buffer
    formats: {A: CSR, B: CSR}
    actions: [{kind: skip, target: A, condition_on: )") + leaders + "}]\n");
        const auto& a = at(sparse_traffic(p).actions, 0, 0, ActionKind::read);
        return (a.dense - a.actual) / a.dense;
      };
      const double both = run("[A, B]");
      CHECK(both >= run("[B]") - 1e-12);
    }
  }
}
