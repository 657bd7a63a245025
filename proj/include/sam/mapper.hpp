#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sam/microarch.hpp"
#include "sam/types.hpp"

namespace sam {

enum class Objective { cycles, energy, edp };

const char* to_string(Objective o);
Objective parse_objective(const std::string& s);  // throws std::invalid_argument

struct SearchBudget {
  enum class Mode { exhaustive, random } mode = Mode::exhaustive;
  std::int64_t max_evaluations = 0;  // 0 = no limit (exhaustive only)
  std::uint64_t seed = 0;
};

/// Streams every structurally valid mapping that honors the constraints, in a
/// fixed order. Stops early when `visit` returns false. Levels without a keep
/// constraint keep every tensor.
void enumerate_mapspace(const Workload& workload, const Architecture& arch, const MapspaceConstraints& constraints,
                        const std::function<bool(const Mapping&)>& visit);

std::int64_t mapspace_size(const Workload& workload, const Architecture& arch, const MapspaceConstraints& constraints);

struct SearchResult {
  Mapping mapping;
  PerformanceReport report;
  std::int64_t evaluated = 0;
  std::int64_t valid = 0;
};

double objective_value(const PerformanceReport& report, Objective objective);

/// Best mapping under the objective. Ties go to the lexicographically
/// smallest canonical mapping text. Throws ModelError when nothing valid is
/// found.
SearchResult search(const Problem& base, const MapspaceConstraints& constraints, Objective objective,
                    const SearchBudget& budget, const EvalOptions& options = {});

}  // namespace sam
