#include "sam/mapper.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "sam/spec_io.hpp"

namespace sam {

const char* to_string(Objective o) {
  switch (o) {
    case Objective::cycles: return "cycles";
    case Objective::energy: return "energy";
    case Objective::edp: return "edp";
  }
  return "?";
}

Objective parse_objective(const std::string& s) {
  if (s == "cycles") return Objective::cycles;
  if (s == "energy") return Objective::energy;
  if (s == "edp") return Objective::edp;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

namespace {

// Per dim, every split of its bound over (temporal, spatial) slots of each
// level that the per-level constraints allow. Slot 2l is temporal, 2l+1 spatial.
class Space {
 public:
  Space(const Workload& w, const Architecture& a, const MapspaceConstraints& c) : w_(w), a_(a), c_(c) {
    const int L = a.num_storage();
    keep_.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const auto* lc = c.find(a.storage[static_cast<std::size_t>(l)].name);
      if (lc && lc->keep && l > 0) keep_[static_cast<std::size_t>(l)] = *lc->keep;
      else
        for (const auto& t : w.tensors) keep_[static_cast<std::size_t>(l)].push_back(t.name);
    }
    splits_.resize(w.dims.size());
    for (std::size_t d = 0; d < w.dims.size(); ++d) {
      std::vector<std::int64_t> slots(static_cast<std::size_t>(2 * L), 1);
      split(static_cast<int>(d), 0, w.dims[d].bound, slots);
      if (splits_[d].empty()) empty_ = true;
    }
  }

  bool empty() const { return empty_; }
  int levels() const { return a_.num_storage(); }
  const std::vector<std::vector<std::int64_t>>& splits(std::size_t d) const { return splits_[d]; }

  bool fanout_ok(const std::vector<std::size_t>& choice) const {
    for (int l = 0; l < levels(); ++l) {
      std::int64_t s = 1;
      for (std::size_t d = 0; d < choice.size(); ++d) s *= splits_[d][choice[d]][static_cast<std::size_t>(2 * l + 1)];
      if (s > a_.storage[static_cast<std::size_t>(l)].fanout) return false;
    }
    return true;
  }

  /// Temporal dims with a nontrivial factor at level l, in every allowed order.
  std::vector<std::vector<int>> orders(int l, const std::vector<std::size_t>& choice) const {
    std::vector<int> dims;
    for (std::size_t d = 0; d < choice.size(); ++d)
      if (splits_[d][choice[d]][static_cast<std::size_t>(2 * l)] > 1) dims.push_back(static_cast<int>(d));
    std::vector<int> rank(w_.dims.size(), -1);
    if (const auto* lc = c_.find(a_.storage[static_cast<std::size_t>(l)].name))
      for (std::size_t i = 0; i < lc->order.size(); ++i) rank[static_cast<std::size_t>(w_.dim_index(lc->order[i]))] = static_cast<int>(i);
    std::vector<std::vector<int>> out;
    do {
      int last = -1;
      bool ok = true;
      for (int d : dims) {
        const int r = rank[static_cast<std::size_t>(d)];
        if (r < 0) continue;
        if (r < last) ok = false;
        last = r;
      }
      if (ok) out.push_back(dims);
    } while (std::next_permutation(dims.begin(), dims.end()));
    return out;
  }

  Mapping build(const std::vector<std::size_t>& choice, const std::vector<const std::vector<int>*>& order) const {
    Mapping m;
    for (int l = 0; l < levels(); ++l) {
      LevelMapping lm;
      lm.level = a_.storage[static_cast<std::size_t>(l)].name;
      lm.keep = keep_[static_cast<std::size_t>(l)];
      for (int d : *order[static_cast<std::size_t>(l)])
        lm.loops.push_back({w_.dims[static_cast<std::size_t>(d)].name,
                            splits_[static_cast<std::size_t>(d)][choice[static_cast<std::size_t>(d)]][static_cast<std::size_t>(2 * l)], false});
      for (std::size_t d = 0; d < choice.size(); ++d) {
        const auto s = splits_[d][choice[d]][static_cast<std::size_t>(2 * l + 1)];
        if (s > 1) lm.loops.push_back({w_.dims[d].name, s, true});
      }
      m.levels.push_back(std::move(lm));
    }
    return m;
  }

 private:
  bool allowed(int d, int slot, std::int64_t f) const {
    const int l = slot / 2;
    const bool spatial = slot % 2 == 1;
    const auto& level = a_.storage[static_cast<std::size_t>(l)];
    if (spatial && f > level.fanout) return false;
    const auto* lc = c_.find(level.name);
    if (!lc) return true;
    const auto& name = w_.dims[static_cast<std::size_t>(d)].name;
    const auto& pinned = spatial ? lc->spatial_factors : lc->temporal_factors;
    if (auto it = pinned.find(name); it != pinned.end() && it->second != f) return false;
    return true;
  }

  bool level_multiple_ok(int d, const std::vector<std::int64_t>& slots) const {
    const auto& name = w_.dims[static_cast<std::size_t>(d)].name;
    for (int l = 0; l < levels(); ++l) {
      const auto* lc = c_.find(a_.storage[static_cast<std::size_t>(l)].name);
      if (!lc) continue;
      if (auto it = lc->factor_multiple_of.find(name); it != lc->factor_multiple_of.end())
        if ((slots[static_cast<std::size_t>(2 * l)] * slots[static_cast<std::size_t>(2 * l + 1)]) % it->second != 0) return false;
    }
    return true;
  }

  void split(int d, int slot, std::int64_t rest, std::vector<std::int64_t>& slots) {
    const int last = 2 * levels() - 1;
    if (slot == last) {
      if (!allowed(d, slot, rest)) return;
      slots[static_cast<std::size_t>(slot)] = rest;
      if (level_multiple_ok(d, slots)) splits_[static_cast<std::size_t>(d)].push_back(slots);
      return;
    }
    for (std::int64_t f = 1; f <= rest; ++f) {
      if (rest % f != 0 || !allowed(d, slot, f)) continue;
      slots[static_cast<std::size_t>(slot)] = f;
      split(d, slot + 1, rest / f, slots);
    }
  }

  const Workload& w_;
  const Architecture& a_;
  const MapspaceConstraints& c_;
  std::vector<std::vector<std::string>> keep_;
  std::vector<std::vector<std::vector<std::int64_t>>> splits_;
  bool empty_ = false;
};

// Odometer over per-level orders; returns false when the visitor stopped.
bool visit_orders(const Space& space, const std::vector<std::size_t>& choice,
                  const std::function<bool(const Mapping&)>& visit) {
  const int L = space.levels();
  std::vector<std::vector<std::vector<int>>> orders;
  for (int l = 0; l < L; ++l) orders.push_back(space.orders(l, choice));
  for (const auto& o : orders)
    if (o.empty()) return true;
  std::vector<std::size_t> idx(static_cast<std::size_t>(L), 0);
  while (true) {
    std::vector<const std::vector<int>*> pick;
    for (int l = 0; l < L; ++l) pick.push_back(&orders[static_cast<std::size_t>(l)][idx[static_cast<std::size_t>(l)]]);
    if (!visit(space.build(choice, pick))) return false;
    int l = L - 1;
    while (l >= 0 && ++idx[static_cast<std::size_t>(l)] == orders[static_cast<std::size_t>(l)].size()) idx[static_cast<std::size_t>(l--)] = 0;
    if (l < 0) return true;
  }
}

}  // namespace

void enumerate_mapspace(const Workload& workload, const Architecture& arch, const MapspaceConstraints& constraints,
                        const std::function<bool(const Mapping&)>& visit) {
  const Space space(workload, arch, constraints);
  if (space.empty()) return;
  const std::size_t D = workload.dims.size();
  std::vector<std::size_t> choice(D, 0);
  while (true) {
    if (space.fanout_ok(choice) && !visit_orders(space, choice, visit)) return;
    std::size_t d = D;
    while (d > 0) {
      --d;
      if (++choice[d] < space.splits(d).size()) break;
      choice[d] = 0;
      if (d == 0) return;
    }
    if (D == 0) return;
  }
}

std::int64_t mapspace_size(const Workload& workload, const Architecture& arch, const MapspaceConstraints& constraints) {
  std::int64_t n = 0;
  enumerate_mapspace(workload, arch, constraints, [&](const Mapping&) {
    ++n;
    return true;
  });
  return n;
}

double objective_value(const PerformanceReport& report, Objective objective) {
  switch (objective) {
    case Objective::cycles: return static_cast<double>(report.cycles);
    case Objective::energy: return report.energy.total;
    case Objective::edp: return report.edp;
  }
  return 0;
}

SearchResult search(const Problem& base, const MapspaceConstraints& constraints, Objective objective,
                    const SearchBudget& budget, const EvalOptions& options) {
  const auto models = build_density_models(base.workload);
  SearchResult best;
  std::string best_key;
  bool found = false;

  auto consider = [&](const Mapping& m) {
    ++best.evaluated;
    Problem p = base;
    p.mapping = m;
    PerformanceReport r;
    try {
      r = evaluate(p, models, options);
    } catch (const ModelError&) {
      return;  // e.g. a SAF whose operands are not kept under this mapping
    }
    if (!r.valid) return;
    ++best.valid;
    const double v = objective_value(r, objective);
    const auto key = emit_mapping(m);
    if (found) {
      const double bv = objective_value(best.report, objective);
      if (v > bv || (v == bv && key >= best_key)) return;
    }
    found = true;
    best.mapping = m;
    best.report = std::move(r);
    best_key = key;
  };

  if (budget.mode == SearchBudget::Mode::exhaustive) {
    enumerate_mapspace(base.workload, base.architecture, constraints, [&](const Mapping& m) {
      consider(m);
      return budget.max_evaluations <= 0 || best.evaluated < budget.max_evaluations;
    });
  } else {
    const Space space(base.workload, base.architecture, constraints);
    const std::int64_t want = budget.max_evaluations > 0 ? budget.max_evaluations : 1000;
    std::mt19937_64 rng(budget.seed);
    std::set<std::string> seen;
    for (std::int64_t attempt = 0; !space.empty() && attempt < 100 * want && best.evaluated < want; ++attempt) {
      std::vector<std::size_t> choice;
      for (std::size_t d = 0; d < base.workload.dims.size(); ++d)
        choice.push_back(std::uniform_int_distribution<std::size_t>(0, space.splits(d).size() - 1)(rng));
      if (!space.fanout_ok(choice)) continue;
      std::vector<std::vector<std::vector<int>>> orders;
      std::vector<const std::vector<int>*> pick;
      for (int l = 0; l < space.levels(); ++l) orders.push_back(space.orders(l, choice));
      bool ok = true;
      for (const auto& o : orders) {
        if (o.empty()) ok = false;
        else pick.push_back(&o[std::uniform_int_distribution<std::size_t>(0, o.size() - 1)(rng)]);
      }
      if (!ok) continue;
      const auto m = space.build(choice, pick);
      if (!seen.insert(emit_mapping(m)).second) continue;
      consider(m);
    }
  }
  if (best.evaluated == 0) throw ModelError("the constrained mapspace is empty");
  if (!found) throw ModelError("no valid mapping among " + std::to_string(best.evaluated) + " evaluated");
  return best;
}

}  // namespace sam
