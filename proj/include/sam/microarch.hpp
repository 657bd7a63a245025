#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sam/sparse.hpp"
#include "sam/types.hpp"

namespace sam {

enum class CapacityQuantile { expected, worst_case };

struct EvalOptions {
  CapacityQuantile capacity = CapacityQuantile::worst_case;
  /// Charge a multicast read one bandwidth slot per receiving child
  /// instead of one slot in total.
  bool multicast_costs_per_child = false;
};

struct CapacityCheck {
  bool valid = true;
  int level = -1;  // first offending level
  double required_bits = 0;
  double available_bits = 0;
};

CapacityCheck check_capacity(const Architecture& arch, const SparseTraffic& traffic, const EvalOptions& options = {});

struct CycleReport {
  std::int64_t cycles = 0;
  std::vector<double> level_cycles;  // per storage level, then compute
};

CycleReport compute_cycles(const SparseTraffic& traffic, const Architecture& arch, const EvalOptions& options = {});

struct EnergyReport {
  double total = 0;
  std::map<std::string, double> per_component;
};

EnergyReport compute_energy(const SparseTraffic& traffic, const Architecture& arch, const EnergyTable& table);

/// Energy-table action a traffic entry is charged as.
EnergyAction energy_action(ActionKind kind);

struct PerformanceReport {
  bool valid = true;
  std::string reason;  // set when invalid
  CapacityCheck capacity;
  std::int64_t cycles = 0;
  EnergyReport energy;
  double edp = 0;
  SparseTraffic traffic;
  std::vector<double> utilization;       // per storage level, then compute
  std::vector<double> metadata_bits;     // per storage level, expected
  std::vector<std::string> level_names;  // storage levels, then compute
  std::vector<std::string> tensor_names;
};

/// Dataflow, sparse analysis, capacity, cycles and energy in one pass.
PerformanceReport evaluate(const Problem& problem, const EvalOptions& options = {});

/// Same, with caller-supplied density models (e.g. sampled tensors).
PerformanceReport evaluate(const Problem& problem, const DensityModels& models, const EvalOptions& options = {});

/// Cycles and energy from externally produced counts (used by the oracle).
void finish_report(PerformanceReport& report, const Problem& problem, const EvalOptions& options);

}  // namespace sam
