#pragma once

// Problem builders, random generators and exact comparison helpers shared by
// the unit tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "sam/microarch.hpp"
#include "sam/oracle.hpp"
#include "sam/types.hpp"

namespace samtest {

using Rng = std::mt19937_64;

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi);  // inclusive
bool coin(Rng& rng, double p = 0.5);

sam::DensityModelSpec uniform(double d);
sam::DensityModelSpec actual(std::shared_ptr<const sam::ConcreteTensor> data);

/// Z[m,n] = A[m,k] B[k,n] with the given operand densities.
sam::Workload matmul(std::int64_t M, std::int64_t N, std::int64_t K, const sam::DensityModelSpec& a,
                     const sam::DensityModelSpec& b);

/// Storage levels outermost first as (name, fanout); compute units follow.
sam::Architecture architecture(const std::vector<std::pair<std::string, std::int64_t>>& levels,
                               double capacity_bits = 1e12, double bandwidth = 1e6);

/// An energy entry for every component and action.
sam::EnergyTable full_energy(const sam::Architecture& arch);

struct RandomOptions {
  std::int64_t max_bound = 8;
  int max_levels = 3;
  bool safs = true;
  bool dense = false;        // density 1.0 everywhere
  bool actual_data = true;   // otherwise uniform statistical models
};

/// Problem from YAML bodies of each section (top-level keys are added);
/// the energy table comes from full_energy.
sam::Problem yaml_problem(const std::string& workload, const std::string& arch, const std::string& mapping,
                          const std::string& safs);

/// Hand-built problems with uniform models covering the SAF and format mix.
std::vector<sam::Problem> statistical_problems();

/// A random well-formed problem: einsum shape, hierarchy, mapping, SAFs.
/// Every tensor model is actual data (or uniform, or dense per options).
sam::Problem random_problem(Rng& rng, const RandomOptions& options);

/// A random structurally valid mapping for the given workload/architecture.
sam::Mapping random_mapping(Rng& rng, const sam::Workload& w, const sam::Architecture& a);

/// A random SAF spec legal for the problem's mapping (may be empty).
sam::SafSpec random_safs(Rng& rng, const sam::Problem& p);

/// Concrete tensors sampled from the workload's models.
sam::ConcreteTensors sample_tensors(const sam::Workload& w, std::uint64_t seed);

/// Entry-by-entry differences beyond `tol` (relative to max(1, |x|)).
std::vector<std::string> compare(const sam::ActionBreakdown& analytic, const sam::ActionBreakdown& oracle,
                                 double tol = 1e-9);

std::string describe(const sam::Problem& p);

}  // namespace samtest
