#pragma once

#include <iosfwd>
#include <string>

#include "sam/microarch.hpp"
#include "sam/types.hpp"

namespace sam {

/// Named source text of one specification file.
struct SpecText {
  std::string text;
  std::string source;  // file name used in error locations
};

/// Parses and cross-validates the five specifications. Relative actual-data
/// paths resolve against `base_dir`.
Problem parse_problem(const SpecText& workload, const SpecText& arch, const SpecText& safs, const SpecText& mapping,
                      const SpecText& energy, const std::string& base_dir = ".");

/// Convenience overload for in-memory specs.
Problem parse_problem(const std::string& workload, const std::string& arch, const std::string& safs,
                      const std::string& mapping, const std::string& energy, const std::string& base_dir = ".");

Workload parse_workload(const SpecText& text, const std::string& base_dir = ".");
Architecture parse_architecture(const SpecText& text);
SafSpec parse_safs(const SpecText& text, const Workload& workload, const Architecture& arch);
Mapping parse_mapping(const SpecText& text, const Workload& workload, const Architecture& arch);
EnergyTable parse_energy(const SpecText& text, const Architecture& arch);
MapspaceConstraints parse_constraints(const SpecText& text, const Workload& workload, const Architecture& arch);

/// Cross-checks of the SAF spec against the mapping (keep sets, metadata
/// needed for skipping, placement of output optimizations).
void validate_safs_against_mapping(const SafSpec& safs, const Problem& problem, const std::string& source = "");

/// Reads a whole file; throws an io SpecError when it cannot.
SpecText read_spec_file(const std::string& path);

/// Canonical YAML of each section; re-parsing yields an equal Problem.
std::string emit_workload(const Workload& w);
std::string emit_architecture(const Architecture& a);
std::string emit_safs(const SafSpec& s);
std::string emit_mapping(const Mapping& m);
std::string emit_energy(const EnergyTable& e);

enum class ReportFormat { csv, text };

/// CSV: one row per (level, tensor, action, status). Text: summary with
/// counts rounded to two decimals.
std::string emit_report(const PerformanceReport& report, ReportFormat format);

/// Shortest decimal that round-trips the value.
std::string format_number(double v);

}  // namespace sam
