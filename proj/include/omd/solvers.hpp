#ifndef OMD_SOLVERS_HPP
#define OMD_SOLVERS_HPP

#include <optional>
#include <string>
#include <vector>

#include "omd/problems.hpp"

namespace omd {

enum class Algorithm { Alg1, Alg2, Alg3, Alg4, Alg5, AdaptiveBaseline };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

enum class StepKind { Productive, NonProductive };
enum class Termination { ReachedT, StepCapExceeded };

// Regularizer d(x) = 0.5*||x||^2 with grad d(x) = x; M_d is its relative
// Lipschitz constant on Q and A2 = sup_Q d. On the unit ball: M_d = 1,
// A2 = 1/2.
struct RegularizerD {
  double M_d = 1.0;
  double A2 = 0.5;

  static RegularizerD for_ball(double radius) {
    return {radius, 0.5 * radius * radius};
  }
};

// Per-round strong-convexity accounting. FromProblem reads mu_t off the
// consumed loss (productive) or the violated constraint term
// (non-productive). Power uses mu_t = t^{-alpha} on the global counter;
// valid when every instance term is at least that strongly convex.
struct MuSchedule {
  enum class Kind { FromProblem, Power };
  Kind kind = Kind::FromProblem;
  double alpha = 0.0;
};

// Lambda rule for the regularized algorithms. Adaptive solves the
// per-round quadratic; FixedFirst uses lambda_1 = value, 0 afterwards;
// Zero disables regularization accounting.
struct LambdaPolicy {
  enum class Kind { Adaptive, FixedFirst, Zero };
  Kind kind = Kind::Adaptive;
  double lambda1 = 0.0;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::Alg4;
  double epsilon = 0.1;
  int target_productive_T = 100;
  double mu_global = 0.0;  // Alg1 only, > 0
  std::optional<RegularizerD> regularizer;  // required for Alg3/Alg5
  int step_cap = 0;  // 0 => 20 * target_productive_T
  Vec x1;            // empty => default_start(setup)
  MuSchedule mu_schedule;
  LambdaPolicy lambda_policy;
  double baseline_eta_max = 1e6;  // step cap when the subgradient vanishes

  int effective_step_cap() const {
    return step_cap > 0 ? step_cap : 20 * target_productive_T;
  }
};

struct StepRecord {
  int t = 0;  // global counter, 1-based, advances on both step kinds
  StepKind kind = StepKind::Productive;
  double eta = 0.0;
  double lambda = 0.0;   // 0 when the algorithm has no regularization
  double g_value = 0.0;  // g(x_t); -1 surrogate when the constraint is ignored
  int loss_index = -1;   // consumed stream position; -1 on non-productive steps
  double f_value = 0.0;  // f_t(x_t) on productive steps, NaN otherwise
  Vec x;                 // iterate x_t the step was taken from
};

struct RunTrace {
  SolverConfig config;  // echo of the configuration that produced the run
  std::vector<StepRecord> steps;
  std::vector<double> mu_prefix;      // mu_{1:t} after each step
  std::vector<double> lambda_prefix;  // lambda_{1:t} after each step
  int productive_count = 0;           // T
  int nonproductive_count = 0;        // T_J
  Termination terminated = Termination::ReachedT;
  Vec x_final;
  double m_bound = 0.0;  // M = max{M_t, M_g} over the planned stream

  int total_steps() const { return int(steps.size()); }
};

// Nonnegative root of lambda * (prefix + lambda) = 2*m^2 / d, i.e. the
// closed form 0.5*(sqrt(prefix^2 + 8 m^2/d) - prefix) evaluated stably.
double lambda_root(double prefix, double m, double d);

RunTrace run_solver(const OnlineProblem& problem, const SolverConfig& config);

RunTrace run_alg1(const OnlineProblem& problem, SolverConfig config);
RunTrace run_alg2(const OnlineProblem& problem, SolverConfig config);
RunTrace run_alg3(const OnlineProblem& problem, SolverConfig config);
RunTrace run_alg4(const OnlineProblem& problem, SolverConfig config);
RunTrace run_alg5(const OnlineProblem& problem, SolverConfig config);
RunTrace run_adaptive_baseline(const OnlineProblem& problem,
                               SolverConfig config);

}  // namespace omd

#endif  // OMD_SOLVERS_HPP
