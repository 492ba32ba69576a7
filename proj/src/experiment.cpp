#include "omd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "omd/analysis.hpp"

namespace omd {

EpsRule EpsRule::from_string(const std::string& name, double alpha,
                             double fixed_value) {
  EpsRule rule;
  rule.alpha = alpha;
  rule.fixed_value = fixed_value;
  if (name == "invsqrt") {
    rule.kind = Kind::InvSqrtT;
  } else if (name == "thm1") {
    rule.kind = Kind::Thm1;
  } else if (name == "cor2case2") {
    rule.kind = Kind::Cor2Case2;
  } else if (name == "cor2case3") {
    rule.kind = Kind::Cor2Case3;
  } else if (name == "fixed") {
    rule.kind = Kind::Fixed;
  } else {
    throw std::invalid_argument("unknown eps rule: " + name);
  }
  return rule;
}

std::string EpsRule::name() const {
  switch (kind) {
    case Kind::InvSqrtT: return "invsqrt";
    case Kind::Thm1: return "thm1";
    case Kind::Cor2Case2: return "cor2case2";
    case Kind::Cor2Case3: return "cor2case3";
    case Kind::Fixed: return "fixed";
  }
  throw std::logic_error("EpsRule::name: unknown kind");
}

void ExperimentSpec::validate() const {
  if (t_list.empty()) throw std::invalid_argument("spec: empty T list");
  if (seeds.empty()) throw std::invalid_argument("spec: empty seed list");
  if (algorithms.empty()) {
    throw std::invalid_argument("spec: empty algorithm list");
  }
  if (n < 1 || m < 1) throw std::invalid_argument("spec: n, m must be >= 1");
  for (int t : t_list) {
    if (t < 1) throw std::invalid_argument("spec: T values must be >= 1");
  }
}

double epsilon_for(const EpsRule& rule, const OnlineProblem& problem, int t) {
  switch (rule.kind) {
    case EpsRule::Kind::InvSqrtT:
      return 1.0 / std::sqrt(double(t));
    case EpsRule::Kind::Fixed:
      return rule.fixed_value;
    case EpsRule::Kind::Thm1: {
      ScheduleParams p;
      p.M = problem.lipschitz_bound(t);
      p.mu = problem.min_strong_convexity(t);
      p.T = t;
      return epsilon_schedule(EpsSchedule::Thm1, p);
    }
    case EpsRule::Kind::Cor2Case2: {
      const RegularizerD reg = RegularizerD::for_ball(problem.setup.radius);
      ScheduleParams p;
      p.M = problem.lipschitz_bound(t);
      p.A2 = reg.A2;
      p.M_d = reg.M_d;
      p.T = t;
      return epsilon_schedule(EpsSchedule::Cor2Case2, p);
    }
    case EpsRule::Kind::Cor2Case3: {
      const RegularizerD reg = RegularizerD::for_ball(problem.setup.radius);
      ScheduleParams p;
      p.M = problem.lipschitz_bound(t);
      p.A2 = reg.A2;
      p.M_d = reg.M_d;
      p.alpha = rule.alpha;
      p.T = t;
      return epsilon_schedule(EpsSchedule::Cor2Case3, p);
    }
  }
  throw std::logic_error("epsilon_for: unknown rule");
}

EpsSchedule schedule_of(const EpsRule& rule) {
  switch (rule.kind) {
    case EpsRule::Kind::Thm1: return EpsSchedule::Thm1;
    case EpsRule::Kind::Cor2Case2: return EpsSchedule::Cor2Case2;
    case EpsRule::Kind::Cor2Case3: return EpsSchedule::Cor2Case3;
    default: return EpsSchedule::Custom;
  }
}

std::filesystem::path run_artifact_stem(const ExperimentSpec& spec,
                                        Algorithm algorithm,
                                        std::uint64_t seed, int t) {
  return spec.output_dir /
         (to_string(algorithm) + "_n" + std::to_string(spec.n) + "_m" +
          std::to_string(spec.m) + "_T" + std::to_string(t) + "_seed" +
          std::to_string(seed));
}

std::vector<std::filesystem::path> cmd_generate(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);
  std::vector<std::filesystem::path> written;
  for (std::uint64_t seed : spec.seeds) {
    for (int t : spec.t_list) {
      const auto problem =
          generate_instance(spec.n, spec.m, t, seed, spec.instance_options);
      const auto path =
          spec.output_dir / ("instance_n" + std::to_string(spec.n) + "_m" +
                             std::to_string(spec.m) + "_T" + std::to_string(t) +
                             "_seed" + std::to_string(seed) + ".json");
      save_instance(path, problem);
      written.push_back(path);
    }
  }
  return written;
}

namespace {

struct Task {
  Algorithm algorithm;
  std::uint64_t seed;
  int t;
};

SummaryRow execute_task(const ExperimentSpec& spec, const Task& task) {
  SummaryRow row;
  row.algorithm = to_string(task.algorithm);
  row.seed = task.seed;
  row.T = task.t;
  try {
    const OnlineProblem problem = generate_instance(
        spec.n, spec.m, task.t, task.seed, spec.instance_options);

    SolverConfig config;
    config.algorithm = task.algorithm;
    config.epsilon = epsilon_for(spec.eps_rule, problem, task.t);
    config.target_productive_T = task.t;
    if (task.algorithm == Algorithm::Alg1) {
      config.mu_global = problem.min_strong_convexity(task.t);
    }
    if (task.algorithm == Algorithm::Alg3 ||
        task.algorithm == Algorithm::Alg5) {
      config.regularizer = RegularizerD::for_ball(problem.setup.radius);
    }

    const auto start = std::chrono::steady_clock::now();
    const RunTrace trace = run_solver(problem, config);
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    row.T = trace.productive_count;
    row.T_J = trace.nonproductive_count;
    double mean_obj = std::numeric_limits<double>::quiet_NaN();
    if (trace.productive_count > 0) {
      double sum = 0.0;
      for (const auto& s : trace.steps) {
        if (s.kind == StepKind::Productive) sum += s.f_value;
      }
      mean_obj = sum / double(trace.productive_count);
    }
    row.mean_productive_objective = mean_obj;

    if (trace.productive_count > 0) {
      const OfflineSolution offline =
          solve_offline(problem, trace.productive_count, spec.oracle);
      const AnalysisReport report = check_theorem_bounds(
          trace, problem, offline, schedule_of(spec.eps_rule));
      row.delta = report.delta;
      row.regret = report.regret;
      row.bounds_passed = std::to_string(report.passed_count()) + "/" +
                          std::to_string(report.evaluated_count());
      if (spec.write_artifacts) {
        const auto stem =
            run_artifact_stem(spec, task.algorithm, task.seed, task.t);
        save_trace_csv(stem.string() + ".trace.csv", trace, task.seed);
        save_report_json(stem.string() + ".analysis.json", report);
      }
    } else {
      row.delta = std::numeric_limits<double>::quiet_NaN();
      row.regret = std::numeric_limits<double>::quiet_NaN();
      row.bounds_passed = "0/0";
      row.error = "no productive steps (step cap exceeded)";
      if (spec.write_artifacts) {
        const auto stem =
            run_artifact_stem(spec, task.algorithm, task.seed, task.t);
        save_trace_csv(stem.string() + ".trace.csv", trace, task.seed);
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.delta = std::numeric_limits<double>::quiet_NaN();
    row.regret = std::numeric_limits<double>::quiet_NaN();
    row.bounds_passed = "0/0";
  }
  return row;
}

}  // namespace

std::vector<SummaryRow> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.write_artifacts) {
    std::filesystem::create_directories(spec.output_dir);
  }

  std::vector<Task> tasks;
  for (Algorithm a : spec.algorithms) {
    for (std::uint64_t seed : spec.seeds) {
      for (int t : spec.t_list) tasks.push_back({a, seed, t});
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    const auto ka = std::make_tuple(to_string(a.algorithm), a.seed, a.t);
    const auto kb = std::make_tuple(to_string(b.algorithm), b.seed, b.t);
    return ka < kb;
  });

  std::vector<SummaryRow> rows(tasks.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned jobs =
      spec.jobs > 0 ? unsigned(spec.jobs) : std::min(hw, unsigned(tasks.size()));

  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      rows[i] = execute_task(spec, tasks[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1)) {
          rows[i] = execute_task(spec, tasks[i]);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  if (spec.write_artifacts) {
    save_summary_csv(spec.output_dir / "summary.csv", rows);
  }
  return rows;
}

}  // namespace omd
