#include "sam/sparse.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

namespace sam {

const char* to_string(ActionKind a) {
  switch (a) {
    case ActionKind::read: return "read";
    case ActionKind::fill: return "fill";
    case ActionKind::update: return "update";
    case ActionKind::metadata_read: return "metadata_read";
    case ActionKind::metadata_fill: return "metadata_fill";
    case ActionKind::compute: return "compute";
  }
  return "?";
}

DensityModels build_density_models(const Workload& workload) {
  DensityModels models;
  for (std::size_t t = 0; t < workload.tensors.size(); ++t) {
    const auto& decl = workload.tensors[t];
    if (decl.is_output || !decl.density) {
      models.push_back(nullptr);
      continue;
    }
    std::vector<std::int64_t> bounds;
    for (int d : workload.tensor_dims(static_cast<int>(t))) bounds.push_back(workload.bound(d));
    models.push_back(make_density_model(*decl.density, decl, bounds));
  }
  return models;
}

// ---------------------------------------------------------------------------

std::vector<IntersectionBinding> resolve_intersection_operands(const Problem& problem, const LoopNest& nest) {
  const auto& w = problem.workload;
  const auto& arch = problem.architecture;
  std::vector<IntersectionBinding> out;
  std::set<std::pair<int, int>> targeted;

  auto tensor_of = [&](const std::string& level, const std::string& name) {
    const int t = w.tensor_index(name);
    if (t < 0) throw ModelError("SAF at '" + level + "' names unknown tensor '" + name + "'");
    return t;
  };

  for (const auto& ls : problem.safs.levels) {
    const bool at_compute = ls.level == arch.compute.name;
    const int level = at_compute ? nest.compute_level() : arch.level_index(ls.level);
    if (level < 0) throw ModelError("SAF names unknown level '" + ls.level + "'");

    for (const auto& a : ls.actions) {
      if (at_compute) {
        if (a.target != "compute") throw ModelError("compute-level SAF must target 'compute'");
        std::vector<int> leaders;
        for (const auto& c : a.condition_on) leaders.push_back(tensor_of(ls.level, c));
        if (leaders.empty())
          for (std::size_t t = 0; t < w.tensors.size(); ++t)
            if (!w.tensors[t].is_output) leaders.push_back(static_cast<int>(t));
        if (!targeted.insert({level, -1}).second)
          throw ModelError("more than one optimization targets compute");
        for (int x : leaders) {
          if (w.tensors[static_cast<std::size_t>(x)].is_output)
            throw ModelError("compute cannot be conditioned on the output tensor");
          IntersectionBinding b;
          b.level = level;
          b.follower = -1;
          b.leader = x;
          b.kind = a.kind;
          b.leader_fixed = nest.all();
          b.leader_tile = nest.region_shape(x, b.leader_fixed);
          out.push_back(std::move(b));
        }
        continue;
      }

      const int target = tensor_of(ls.level, a.target);
      std::vector<int> conds;
      for (const auto& c : a.condition_on) conds.push_back(tensor_of(ls.level, c));
      if (conds.empty()) throw ModelError("SAF on '" + a.target + "' at '" + ls.level + "' has no condition");

      // (follower, leader) pairs
      std::vector<std::pair<int, int>> pairs;
      if (std::find(conds.begin(), conds.end(), target) != conds.end()) {
        if (conds.size() != 2 || conds[0] == conds[1])
          throw ModelError("SAF on '" + a.target + "' at '" + ls.level + "' names itself as its only condition");
        const int other = conds[0] == target ? conds[1] : conds[0];
        pairs = {{target, other}, {other, target}};
      } else {
        for (int x : conds) pairs.emplace_back(target, x);
      }

      for (const auto& [f, x] : pairs) {
        const auto& fname = w.tensors[static_cast<std::size_t>(f)].name;
        const auto& xname = w.tensors[static_cast<std::size_t>(x)].name;
        if (!nest.keeps(level, f)) throw ModelError("SAF target '" + fname + "' is not kept at '" + ls.level + "'");
        if (!nest.keeps(level, x)) throw ModelError("SAF condition '" + xname + "' is not kept at '" + ls.level + "'");
        if (w.tensors[static_cast<std::size_t>(x)].is_output)
          throw ModelError("SAF at '" + ls.level + "' cannot be conditioned on the output tensor");
        if (a.kind == SafKind::skip && !problem.safs.format(ls.level, xname))
          throw ModelError("skipping at '" + ls.level + "' needs leader '" + xname +
                           "' stored with metadata (compressed or bitmask format)");
        IntersectionBinding b;
        b.level = level;
        b.follower = f;
        b.leader = x;
        b.kind = a.kind;
        if (w.tensors[static_cast<std::size_t>(f)].is_output) {
          if (nest.child_of(level, f) != nest.compute_level())
            throw ModelError("output SAF must sit at the innermost level keeping '" + fname + "'");
          b.leader_fixed = nest.all();
        } else {
          b.leader_fixed = nest.residency_mask(nest.child_of(level, f), f);
        }
        b.leader_tile = nest.region_shape(x, b.leader_fixed);
        b.follower_tile = nest.tile_extents(nest.child_of(level, f), f);
        out.push_back(std::move(b));
      }
      std::set<int> followers;
      for (const auto& pr : pairs) followers.insert(pr.first);
      for (int f : followers)
        if (!targeted.insert({level, f}).second)
          throw ModelError("more than one optimization targets '" + w.tensors[static_cast<std::size_t>(f)].name +
                           "' at '" + ls.level + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// P(every cause region is nonempty) for statistically judged leaders.
double prob_all_nonempty(const CauseSet& causes, const LoopNest& nest, const DensityModels& models,
                         bool skip_only) {
  std::map<int, std::vector<LoopMask>> by_leader;
  for (const auto& c : causes) {
    if (skip_only && c.kind != SafKind::skip) continue;
    by_leader[c.leader].push_back(c.fixed & nest.relevant(c.leader));
  }
  double p = 1.0;
  for (auto& [leader, masks] : by_leader) {
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    // Regions with the most loops held are the smallest; a superset region
    // is nonempty whenever a region inside it is.
    for (LoopMask m : masks) {
      bool minimal = true;
      for (LoopMask o : masks)
        if (o != m && (o & m) == m) minimal = false;
      if (!minimal) continue;
      const auto& model = models[static_cast<std::size_t>(leader)];
      if (!model) throw ModelError("leader tensor has no density model");
      p *= 1.0 - model->prob_empty(nest.region_shape(leader, m));
    }
  }
  return p;
}

struct Totals {
  std::vector<double> dense, actual, gated;
  explicit Totals(std::size_t n) : dense(n, 0), actual(n, 0), gated(n, 0) {}
};

class Composer {
 public:
  Composer(const Problem& problem, const LoopNest& nest, const DensityModels& models)
      : p_(problem), nest_(nest), models_(models) {}

  bool deterministic(int t) const {
    const auto& m = models_[static_cast<std::size_t>(t)];
    return m && m->coordinate_dependent();
  }

  const RepresentationFormat* format(int level, int t) const {
    if (level >= nest_.num_levels()) return nullptr;
    return p_.safs.format(p_.architecture.storage[static_cast<std::size_t>(level)].name,
                          p_.workload.tensors[static_cast<std::size_t>(t)].name);
  }

  // Quantities per event: {dense words, stored words, metadata words} of the
  // tile of tensor `t` resident at `tile_level`, encoded in `fmt_level`'s
  // format. `values` null asks for the expectation over placements.
  std::vector<double> tile_quantities(int t, int tile_level, int fmt_level, const std::vector<std::int64_t>* values) const {
    const double dense = static_cast<double>(tile_level >= nest_.num_levels() ? 1 : nest_.tile_words(tile_level, t));
    const auto* fmt = format(fmt_level, t);
    if (!fmt) return {dense, dense, 0.0};
    const auto& decl = p_.workload.tensors[static_cast<std::size_t>(t)];
    const auto& model = *models_[static_cast<std::size_t>(t)];
    FormatFootprint fp;
    if (values) {
      fp = tensor_representation_size(*fmt, decl.projection, nest_.region_at(t, nest_.above(tile_level), *values), model);
    } else {
      std::vector<std::int64_t> ext(decl.projection.size(), 1);
      if (tile_level < nest_.num_levels()) ext = nest_.tile_extents(tile_level, t);
      fp = tensor_representation_size(*fmt, decl.projection, ext, model);
    }
    const double mdw = p_.architecture.storage[static_cast<std::size_t>(fmt_level)].metadata_width();
    return {dense, fp.data_words, fp.metadata_bits / mdw};
  }

  // Sums per-event quantities over the events in `mask`. Quantity 0 is the
  // dense count; the rest are split by the causes into actual and gated.
  // `word_tensor` >= 0 when the quantities depend on that tensor's data.
  using QuantityFn = std::function<std::vector<double>(const std::vector<std::int64_t>*)>;
  Totals accumulate(LoopMask mask, const CauseSet& causes, int word_tensor, const QuantityFn& fn) const {
    bool enumerate = word_tensor >= 0 && deterministic(word_tensor);
    for (const auto& c : causes) enumerate = enumerate || deterministic(c.leader);

    const double events = static_cast<double>(nest_.product(mask));
    if (!enumerate) {
      const auto q = fn(nullptr);
      const auto f = per_tile_action_breakdown(causes, nest_, models_);
      Totals tot(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) {
        tot.dense[i] = q[i] * events;
        tot.actual[i] = q[i] * events * f.actual;
        tot.gated[i] = q[i] * events * f.gated;
      }
      // Dense count of each quantity ignores causes.
      return tot;
    }

    CauseSet stat, det;
    LoopMask effective = 0;
    for (const auto& c : causes) {
      (deterministic(c.leader) ? det : stat).push_back(c);
      if (deterministic(c.leader)) effective |= c.fixed & nest_.relevant(c.leader);
    }
    if (word_tensor >= 0 && deterministic(word_tensor)) effective |= nest_.relevant(word_tensor);
    effective &= mask;
    const double multiplicity = events / static_cast<double>(nest_.product(effective));
    const double stat_none = prob_all_nonempty(stat, nest_, models_, false);
    const double stat_noskip = prob_all_nonempty(stat, nest_, models_, true);

    std::optional<std::vector<double>> fixed_q;
    if (word_tensor < 0 || !deterministic(word_tensor)) fixed_q = fn(nullptr);

    Totals tot(fixed_q ? fixed_q->size() : 3);
    nest_.for_each_assignment(effective, [&](const std::vector<std::int64_t>& values) {
      bool none = true, noskip = true;
      for (const auto& c : det) {
        const auto region = nest_.region_at(c.leader, c.fixed, values);
        if (models_[static_cast<std::size_t>(c.leader)]->occupancy_at(region) == 0) {
          none = false;
          if (c.kind == SafKind::skip) noskip = false;
        }
      }
      const double pn = none ? stat_none : 0.0;
      const double ps = noskip ? stat_noskip : 0.0;
      const auto q = fixed_q ? *fixed_q : fn(&values);
      if (tot.dense.size() != q.size()) tot = Totals(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) {
        tot.dense[i] += q[i] * multiplicity;
        tot.actual[i] += q[i] * pn * multiplicity;
        tot.gated[i] += q[i] * (ps - pn) * multiplicity;
      }
    });
    return tot;
  }

 private:
  const Problem& p_;
  const LoopNest& nest_;
  const DensityModels& models_;
};

void add(ActionBreakdown& out, EntryKey key, double dense, double actual, double gated) {
  auto& e = out[key];
  e.dense += dense;
  e.actual += actual;
  e.gated += gated;
}

void add_dense(ActionBreakdown& out, EntryKey key, double count) { add(out, key, count, count, 0.0); }

void dedupe(CauseSet& s) {
  CauseSet out;
  for (const auto& c : s)
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  s = std::move(out);
}

}  // namespace

EventFractions per_tile_action_breakdown(const CauseSet& causes, const LoopNest& nest, const DensityModels& models) {
  const double none = prob_all_nonempty(causes, nest, models, false);
  const double noskip = prob_all_nonempty(causes, nest, models, true);
  return {none, noskip - none, 1.0 - noskip};
}

SavingsPlan propagate_savings(const std::vector<IntersectionBinding>& bindings, const LoopNest& nest,
                              const DenseTraffic& dense) {
  SavingsPlan plan;
  std::map<std::pair<int, int>, CauseSet> resident;  // (level, tensor)

  auto leads_at = [&](int level, int t) {
    return std::any_of(bindings.begin(), bindings.end(),
                       [&](const IntersectionBinding& b) { return b.level == level && b.leader == t; });
  };

  for (const auto& b : dense.boundaries) {
    SavingsPlan::Hop hop;
    hop.boundary = b;
    if (!b.output) {
      const CauseSet inherited = resident[{b.parent, b.tensor}];
      hop.residency = inherited;
      hop.parent_read = inherited;
      for (const auto& ib : bindings) {
        if (ib.level != b.parent || ib.follower != b.tensor) continue;
        hop.residency.push_back({ib.kind, ib.leader, b.residency});
        hop.parent_read.push_back({ib.kind, ib.leader, b.parent_events});
      }
      hop.metadata_read = leads_at(b.parent, b.tensor) ? inherited : hop.parent_read;
      dedupe(hop.residency);
      dedupe(hop.parent_read);
      dedupe(hop.metadata_read);
      resident[{b.child, b.tensor}] = hop.residency;
    }
    plan.hops.push_back(std::move(hop));
  }

  const auto& w = nest.workload();
  for (std::size_t t = 0; t < w.tensors.size(); ++t) {
    if (w.tensors[t].is_output) continue;
    const auto& r = resident[{nest.compute_level(), static_cast<int>(t)}];
    plan.compute.insert(plan.compute.end(), r.begin(), r.end());
  }
  for (const auto& ib : bindings)
    if (ib.follower < 0) plan.compute.push_back({ib.kind, ib.leader, nest.all()});
  dedupe(plan.compute);

  const int z = w.output_index();
  plan.output_update = plan.compute;
  if (z >= 0 && !nest.chain(z).empty()) {
    plan.output_level = nest.chain(z).back();
    for (const auto& ib : bindings)
      if (ib.follower == z && ib.level == plan.output_level) plan.output_update.push_back({ib.kind, ib.leader, nest.all()});
  }
  dedupe(plan.output_update);
  return plan;
}

ActionBreakdown compose_format_and_actions(const Problem& problem, const LoopNest& nest, const SavingsPlan& plan,
                                           const DensityModels& models) {
  ActionBreakdown out;
  const Composer comp(problem, nest, models);
  const int compute = nest.compute_level();
  const double ops = static_cast<double>(nest.workload().total_operations());

  for (const auto& hop : plan.hops) {
    const auto& b = hop.boundary;
    const int t = b.tensor;
    const double words = static_cast<double>(b.words_per_tile);
    if (b.output) {
      if (b.child == compute) {
        const auto tot = comp.accumulate(nest.all(), plan.output_update, -1,
                                         [](const std::vector<std::int64_t>*) { return std::vector<double>{1.0}; });
        add(out, {b.parent, t, ActionKind::update}, ops, tot.actual[0], tot.gated[0]);
        continue;
      }
      const double res = static_cast<double>(b.tiles_transferred);
      add_dense(out, {b.child, t, ActionKind::fill}, res * words);
      add_dense(out, {b.child, t, ActionKind::read}, res * words);
      add_dense(out, {b.parent, t, ActionKind::read}, (res - static_cast<double>(b.distinct_tiles)) * words);
      add_dense(out, {b.parent, t, ActionKind::update}, res * words);
      continue;
    }

    if (b.child != compute) {
      const auto fill = comp.accumulate(b.residency, hop.residency, t, [&](const std::vector<std::int64_t>* v) {
        return comp.tile_quantities(t, b.child, b.child, v);
      });
      // Words elided by the child's format count as skipped.
      add(out, {b.child, t, ActionKind::fill}, fill.dense[0], fill.actual[1], fill.gated[1]);
      if (comp.format(b.child, t))
        add(out, {b.child, t, ActionKind::metadata_fill}, fill.dense[2], fill.actual[2], fill.gated[2]);
    }

    const auto read = comp.accumulate(b.parent_events, hop.parent_read, t, [&](const std::vector<std::int64_t>* v) {
      return comp.tile_quantities(t, b.child, b.parent, v);
    });
    add(out, {b.parent, t, ActionKind::read}, read.dense[0], read.actual[1], read.gated[1]);
    if (comp.format(b.parent, t)) {
      const auto meta = hop.metadata_read == hop.parent_read
                            ? read
                            : comp.accumulate(b.parent_events, hop.metadata_read, t,
                                              [&](const std::vector<std::int64_t>* v) {
                                                return comp.tile_quantities(t, b.child, b.parent, v);
                                              });
      add(out, {b.parent, t, ActionKind::metadata_read}, meta.dense[2], meta.actual[2], meta.gated[2]);
    }
  }

  const auto tot = comp.accumulate(nest.all(), plan.compute, -1,
                                   [](const std::vector<std::int64_t>*) { return std::vector<double>{1.0}; });
  add(out, {compute, -1, ActionKind::compute}, ops, tot.actual[0], tot.gated[0]);
  return out;
}

SparseTraffic sparse_traffic(const Problem& problem, const LoopNest& nest, const DenseTraffic& dense,
                             const DensityModels& models) {
  SparseTraffic st;
  const auto bindings = resolve_intersection_operands(problem, nest);
  const auto plan = propagate_savings(bindings, nest, dense);
  st.actions = compose_format_and_actions(problem, nest, plan, models);

  for (const auto& b : dense.boundaries)
    if (!b.output) st.read_multicast[{b.parent, b.tensor}] = b.multicast;
  for (int l = 0; l <= nest.num_levels(); ++l) st.active_instances.push_back(nest.product(nest.above(l) & nest.spatial()));

  const auto& w = problem.workload;
  const auto& arch = problem.architecture;
  st.footprints.assign(static_cast<std::size_t>(nest.num_levels()), std::vector<TensorFootprint>(w.tensors.size()));
  for (int l = 0; l < nest.num_levels(); ++l) {
    const auto& level = arch.storage[static_cast<std::size_t>(l)];
    for (int t = 0; t < static_cast<int>(w.tensors.size()); ++t) {
      if (!nest.keeps(l, t)) continue;
      auto& fp = st.footprints[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      const auto ext = nest.tile_extents(l, t);
      const auto* fmt = problem.safs.format(level.name, w.tensors[static_cast<std::size_t>(t)].name);
      const auto& model = models[static_cast<std::size_t>(t)];
      if (fmt && model) {
        const auto f = tensor_representation_size(*fmt, w.tensors[static_cast<std::size_t>(t)].projection, ext, *model);
        fp.data_bits = f.data_words * level.word_width;
        fp.worst_data_bits = f.worst_data_words * level.word_width;
        fp.metadata_bits = f.metadata_bits;
        fp.worst_metadata_bits = f.worst_metadata_bits;
      } else {
        std::int64_t words = 1;
        for (auto e : ext) words *= e;
        fp.data_bits = fp.worst_data_bits = static_cast<double>(words * level.word_width);
      }
    }
  }
  return st;
}

SparseTraffic sparse_traffic(const Problem& problem) {
  const LoopNest nest(problem.workload, problem.architecture, problem.mapping);
  return sparse_traffic(problem, nest, dense_traffic(nest), build_density_models(problem.workload));
}

}  // namespace sam
