#include "sam/microarch.hpp"

#include <algorithm>
#include <cmath>

namespace sam {

CapacityCheck check_capacity(const Architecture& arch, const SparseTraffic& traffic, const EvalOptions& options) {
  CapacityCheck out;
  for (std::size_t l = 0; l < traffic.footprints.size(); ++l) {
    double bits = 0;
    for (const auto& fp : traffic.footprints[l])
      bits += options.capacity == CapacityQuantile::worst_case ? fp.worst_data_bits + fp.worst_metadata_bits
                                                               : fp.data_bits + fp.metadata_bits;
    const double cap = arch.storage[l].capacity_bits;
    if (bits > cap + 1e-9) {
      out.valid = false;
      out.level = static_cast<int>(l);
      out.required_bits = bits;
      out.available_bits = cap;
      return out;
    }
  }
  return out;
}

CycleReport compute_cycles(const SparseTraffic& traffic, const Architecture& arch, const EvalOptions& options) {
  const std::size_t nl = arch.storage.size();
  std::vector<double> reads(nl, 0), writes(nl, 0);
  double computes = 0;
  for (const auto& [key, c] : traffic.actions) {
    const double busy = c.actual + c.gated;
    if (key.action == ActionKind::compute) {
      computes += busy;
      continue;
    }
    const auto l = static_cast<std::size_t>(key.level);
    switch (key.action) {
      case ActionKind::read: {
        double slots = busy;
        if (options.multicast_costs_per_child) {
          auto it = traffic.read_multicast.find({key.level, key.tensor});
          if (it != traffic.read_multicast.end()) slots *= static_cast<double>(it->second);
        }
        reads[l] += slots;
        break;
      }
      case ActionKind::metadata_read: reads[l] += busy; break;
      default: writes[l] += busy; break;
    }
  }

  CycleReport out;
  double worst = 0;
  auto instances = [&](std::size_t l) {
    return l < traffic.active_instances.size() ? static_cast<double>(traffic.active_instances[l]) : 1.0;
  };
  auto throttle = [&](double words, double bw, const std::string& name) {
    if (words <= 0) return 0.0;
    if (bw <= 0) throw ModelError("level '" + name + "' has zero bandwidth but carries traffic");
    return words / bw;
  };
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& level = arch.storage[l];
    const double n = instances(l);
    const double c = std::max(throttle(reads[l] / n, level.read_bandwidth, level.name),
                              throttle(writes[l] / n, level.write_bandwidth, level.name));
    out.level_cycles.push_back(c);
    worst = std::max(worst, c);
  }
  const double units = instances(nl);
  const double cc = computes / units;
  out.level_cycles.push_back(cc);
  worst = std::max(worst, cc);
  out.cycles = static_cast<std::int64_t>(std::ceil(worst - 1e-9));
  return out;
}

EnergyAction energy_action(ActionKind kind) {
  switch (kind) {
    case ActionKind::read: return EnergyAction::read;
    case ActionKind::fill:
    case ActionKind::update: return EnergyAction::write;
    case ActionKind::metadata_read: return EnergyAction::metadata_read;
    case ActionKind::metadata_fill: return EnergyAction::metadata_write;
    case ActionKind::compute: return EnergyAction::compute;
  }
  return EnergyAction::read;
}

EnergyReport compute_energy(const SparseTraffic& traffic, const Architecture& arch, const EnergyTable& table) {
  EnergyReport out;
  for (const auto& [key, c] : traffic.actions) {
    const std::string& component = key.action == ActionKind::compute
                                       ? arch.compute.name
                                       : arch.storage[static_cast<std::size_t>(key.level)].name;
    const auto action = energy_action(key.action);
    const auto* cost = table.find(component, action);
    if (!cost) {
      if (c.actual + c.gated > 0)
        throw ModelError(std::string("energy table has no entry for ") + component + " " + to_string(action));
      continue;
    }
    const double e = c.actual * cost->actual + c.gated * cost->gated;
    out.per_component[component] += e;
    out.total += e;
  }
  return out;
}

void finish_report(PerformanceReport& report, const Problem& problem, const EvalOptions& options) {
  const auto& arch = problem.architecture;
  report.level_names.clear();
  for (const auto& l : arch.storage) report.level_names.push_back(l.name);
  report.level_names.push_back(arch.compute.name);
  report.tensor_names.clear();
  for (const auto& t : problem.workload.tensors) report.tensor_names.push_back(t.name);

  report.metadata_bits.assign(arch.storage.size(), 0.0);
  for (std::size_t l = 0; l < report.traffic.footprints.size(); ++l)
    for (const auto& fp : report.traffic.footprints[l]) report.metadata_bits[l] += fp.metadata_bits;

  report.capacity = check_capacity(arch, report.traffic, options);
  if (!report.capacity.valid) {
    report.valid = false;
    report.reason = "capacity exceeded at " + arch.storage[static_cast<std::size_t>(report.capacity.level)].name;
    return;
  }
  const auto cycles = compute_cycles(report.traffic, arch, options);
  report.cycles = cycles.cycles;
  report.utilization.clear();
  for (double c : cycles.level_cycles)
    report.utilization.push_back(report.cycles > 0 ? c / static_cast<double>(report.cycles) : 0.0);
  report.energy = compute_energy(report.traffic, arch, problem.energy);
  report.edp = static_cast<double>(report.cycles) * report.energy.total;
}

PerformanceReport evaluate(const Problem& problem, const DensityModels& models, const EvalOptions& options) {
  PerformanceReport report;
  if (auto v = validate_mapping_structure(problem.mapping, problem.workload, problem.architecture); !v.empty()) {
    report.valid = false;
    report.reason = v.front();
    return report;
  }
  const LoopNest nest(problem.workload, problem.architecture, problem.mapping);
  report.traffic = sparse_traffic(problem, nest, dense_traffic(nest), models);
  finish_report(report, problem, options);
  return report;
}

PerformanceReport evaluate(const Problem& problem, const EvalOptions& options) {
  return evaluate(problem, build_density_models(problem.workload), options);
}

}  // namespace sam
