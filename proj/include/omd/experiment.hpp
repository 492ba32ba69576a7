#ifndef OMD_EXPERIMENT_HPP
#define OMD_EXPERIMENT_HPP

#include <filesystem>
#include <vector>

#include "omd/io.hpp"
#include "omd/offline.hpp"
#include "omd/solvers.hpp"

namespace omd {

// How a sweep picks epsilon for each T.
struct EpsRule {
  enum class Kind { InvSqrtT, Thm1, Cor2Case2, Cor2Case3, Fixed };
  Kind kind = Kind::InvSqrtT;
  double alpha = 0.25;       // Cor2Case3
  double fixed_value = 0.1;  // Fixed

  static EpsRule from_string(const std::string& name, double alpha,
                             double fixed_value);
  std::string name() const;
};

struct ExperimentSpec {
  int n = 100;
  int m = 10;
  std::vector<int> t_list;
  EpsRule eps_rule;
  std::vector<Algorithm> algorithms;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";
  int jobs = 0;  // 0 => hardware concurrency
  InstanceOptions instance_options;
  OracleBudget oracle;
  bool write_artifacts = true;  // trace CSV + analysis JSON per run

  void validate() const;
};

double epsilon_for(const EpsRule& rule, const OnlineProblem& problem, int t);
EpsSchedule schedule_of(const EpsRule& rule);

// One instance file per (seed, T); returns the written paths.
std::vector<std::filesystem::path> cmd_generate(const ExperimentSpec& spec);

// Full sweep over algorithms x seeds x T. Per run: solver trace, offline
// oracle, bound checks, trace CSV + analysis JSON. Failures are isolated
// into their summary rows. Rows come back sorted by (algorithm, seed, T)
// regardless of the worker count; the summary CSV is also written to
// output_dir/summary.csv.
std::vector<SummaryRow> run_sweep(const ExperimentSpec& spec);

std::filesystem::path run_artifact_stem(const ExperimentSpec& spec,
                                        Algorithm algorithm,
                                        std::uint64_t seed, int t);

}  // namespace omd

#endif  // OMD_EXPERIMENT_HPP
