// Command-line front end: `sam model ...` and `sam search ...`.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sam/mapper.hpp"
#include "sam/oracle.hpp"
#include "sam/spec_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalidMapping = 1;
constexpr int kSpecError = 2;

struct Paths {
  std::string workload, arch, safs, mapping, energy, constraints, out;
};

std::string dir_of(const std::string& path) {
  const auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

// Replaces the analytic action counts with oracle counts averaged over
// `samples` concrete draws (or the actual data itself).
void apply_oracle(sam::PerformanceReport& report, const sam::Problem& problem, int samples) {
  using namespace sam;
  ActionBreakdown mean;
  const bool all_actual = std::all_of(problem.workload.tensors.begin(), problem.workload.tensors.end(), [](const auto& t) {
    return t.is_output || t.density->kind == DensityKind::actual_data;
  });
  if (all_actual) samples = 1;
  for (int s = 0; s < samples; ++s) {
    ConcreteTensors tensors;
    for (const auto& t : problem.workload.tensors) {
      if (t.is_output) {
        tensors.push_back(nullptr);
        continue;
      }
      std::vector<std::int64_t> dims;
      for (int d : problem.workload.tensor_dims(problem.workload.tensor_index(t.name))) dims.push_back(problem.workload.bound(d));
      tensors.push_back(std::make_shared<const ConcreteTensor>(
          random_tensor(dims, *t.density, t.projection, static_cast<std::uint64_t>(s))));
    }
    for (const auto& [key, c] : simulate(problem, tensors).entries) {
      auto& m = mean[key];
      m.dense += c.dense / samples;
      m.actual += c.actual / samples;
      m.gated += c.gated / samples;
    }
  }
  report.traffic.actions = mean;
  report.valid = true;
  finish_report(report, problem, {});
}

int run_model(const Paths& p, int density_samples, bool oracle) {
  const auto problem = sam::parse_problem(sam::read_spec_file(p.workload), sam::read_spec_file(p.arch),
                                          sam::read_spec_file(p.safs), sam::read_spec_file(p.mapping),
                                          sam::read_spec_file(p.energy), dir_of(p.workload));
  auto report = sam::evaluate(problem);
  if (report.valid && (oracle || density_samples > 0)) apply_oracle(report, problem, std::max(1, density_samples));
  std::cout << sam::emit_report(report, sam::ReportFormat::text);
  if (!p.out.empty()) {
    std::ofstream f(p.out);
    if (!f) throw sam::SpecError(sam::ErrorKind::io, {p.out, 0, 0}, "report", "cannot write file");
    f << sam::emit_report(report, sam::ReportFormat::csv);
  }
  return report.valid ? kOk : kInvalidMapping;
}

int run_search(const Paths& p, const std::string& objective, std::int64_t budget, std::uint64_t seed, bool random) {
  using namespace sam;
  const auto base_dir = dir_of(p.workload);
  Problem problem;
  problem.workload = parse_workload(read_spec_file(p.workload), base_dir);
  problem.architecture = parse_architecture(read_spec_file(p.arch));
  const auto safs_text = read_spec_file(p.safs);
  problem.safs = parse_safs(safs_text, problem.workload, problem.architecture);
  problem.energy = parse_energy(read_spec_file(p.energy), problem.architecture);
  const auto constraints = parse_constraints(read_spec_file(p.constraints), problem.workload, problem.architecture);

  SearchBudget b;
  b.mode = random ? SearchBudget::Mode::random : SearchBudget::Mode::exhaustive;
  b.max_evaluations = budget;
  b.seed = seed;
  SearchResult r;
  try {
    r = search(problem, constraints, parse_objective(objective), b);
  } catch (const ModelError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kInvalidMapping;
  }
  std::cout << "# evaluated " << r.evaluated << " mappings, " << r.valid << " valid\n";
  std::cout << "# " << objective << ": " << format_number(objective_value(r.report, parse_objective(objective))) << "\n";
  std::cout << emit_mapping(r.mapping);
  if (!p.out.empty()) {
    std::ofstream f(p.out);
    f << emit_report(r.report, ReportFormat::csv);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytical model of sparse tensor accelerators"};
  app.require_subcommand(1);
  Paths p;
  int density_samples = 0;
  bool oracle = false;

  auto* model = app.add_subcommand("model", "Evaluate one mapping");
  model->add_option("--workload", p.workload)->required();
  model->add_option("--arch", p.arch)->required();
  model->add_option("--safs", p.safs)->required();
  model->add_option("--mapping", p.mapping)->required();
  model->add_option("--energy", p.energy)->required();
  model->add_option("--out", p.out, "CSV action breakdown");
  model->add_option("--density-samples", density_samples,
                    "Average counts over N simulated tensors drawn from the density models");
  model->add_flag("--oracle", oracle)->group("");

  std::string objective = "edp";
  std::int64_t budget = 0;
  std::uint64_t seed = 0;
  bool random = false;
  auto* srch = app.add_subcommand("search", "Search the constrained mapspace");
  srch->add_option("--workload", p.workload)->required();
  srch->add_option("--arch", p.arch)->required();
  srch->add_option("--safs", p.safs)->required();
  srch->add_option("--constraints", p.constraints)->required();
  srch->add_option("--energy", p.energy)->required();
  srch->add_option("--objective", objective)->check(CLI::IsMember({"cycles", "energy", "edp"}));
  srch->add_option("--budget", budget, "Maximum mappings to evaluate (0 = all)");
  srch->add_option("--seed", seed, "Seed for random search");
  srch->add_flag("--random", random, "Sample the mapspace instead of enumerating it");
  srch->add_option("--out", p.out, "CSV action breakdown of the best mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSpecError;
  }

  try {
    if (*model) return run_model(p, density_samples, oracle);
    return run_search(p, objective, budget, seed, random);
  } catch (const sam::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  } catch (const sam::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  }
}
