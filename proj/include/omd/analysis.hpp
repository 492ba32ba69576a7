#ifndef OMD_ANALYSIS_HPP
#define OMD_ANALYSIS_HPP

#include <span>
#include <string>
#include <vector>

#include "omd/offline.hpp"
#include "omd/solvers.hpp"

namespace omd {

enum class CheckStatus { Pass, Fail, Skipped };

std::string to_string(CheckStatus status);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  CheckStatus status = CheckStatus::Skipped;
  std::string note;

  double margin() const { return rhs - lhs; }
};

// How the run's epsilon was chosen; Custom covers fixed values and the
// 1/sqrt(T) experiment rule.
enum class EpsSchedule { Custom, Thm1, Cor1, Cor2Case1, Cor2Case2, Cor2Case3 };

std::string to_string(EpsSchedule schedule);
EpsSchedule eps_schedule_from_string(const std::string& name);

struct ScheduleParams {
  double M = 0.0;
  double mu = 0.0;
  double A2 = 0.0;
  double M_d = 0.0;
  double alpha = 0.0;
  long T = 0;
};

// Closed-form epsilon for a schedule; throws on missing/invalid parameters.
double epsilon_schedule(EpsSchedule schedule, const ScheduleParams& params);

struct AnalysisReport {
  double regret = 0.0;
  double delta = 0.0;  // NaN when the algorithm has no certificate formula
  int T = 0;
  int T_J = 0;
  double epsilon_used = 0.0;
  EpsSchedule epsilon_schedule = EpsSchedule::Custom;
  double oracle_residual = 0.0;
  double tj_ratio = 0.0;
  bool regret_nonnegative = false;
  std::vector<BoundCheck> bound_checks;

  bool all_passed() const;
  int passed_count() const;
  int evaluated_count() const;  // Pass + Fail
};

// Sum of f_t(x_t) over productive steps minus the offline optimum;
// re-evaluates the losses at the recorded iterates.
double regret(const RunTrace& trace, const OnlineProblem& problem,
              const OfflineSolution& offline);

// A-posteriori guaranteed accuracy from the trace (Alg4/Alg5 only).
double delta_certificate(const RunTrace& trace, const OnlineProblem& problem);

// Evaluates every bound applicable to the trace's algorithm. Regret-side
// tolerances are 1e-8*max(1,|rhs|) plus the oracle residual; checks whose
// theorems assume Regret_T >= 0 are Skipped when it is negative.
AnalysisReport check_theorem_bounds(const RunTrace& trace,
                                    const OnlineProblem& problem,
                                    const OfflineSolution& offline,
                                    EpsSchedule schedule = EpsSchedule::Custom);

struct Lemma1Result {
  double lhs = 0.0;    // H_T at the recursive lambda
  double rhs = 0.0;    // 2 * approximate inf H_T
  double ratio = 0.0;  // lhs / inf (0 when both vanish)
  bool pass = false;
};

// Evaluates H_T({lambda_t}) = lambda_{1:T} + sum C_t/(mu_{1:t}+lambda_{1:t})
// at the per-round fixed point lambda_t = C_t/(mu_{1:t}+lambda_{1:t}) and
// compares against twice the grid-refined infimum. T <= 4.
Lemma1Result check_lemma1(std::span<const double> c_values,
                          std::span<const double> mu_values);

// Max violation of the per-step descent inequality
//   f_t(x_t) - f_t(x*) <= eta*M_t^2 + (V(x*,x_t) - V(x*,x_{t+1}))/eta
//                         - mu_t*V(x*,x_t)
// over an Alg2 trace.
double per_step_descent_violation(const RunTrace& trace,
                                  const OnlineProblem& problem,
                                  const Vec& x_star);

// Infimum (grid + coordinate refinement) of
//   (A2 + 2 M_d^2) * sum(lam) + sum_t (m_t + lam_t*M_d)^2 /
//   (mu_{1:t} + lam_{1:t})
// over lam >= 0; used for the second Theorem 3/5 inequalities at tiny T.
double regularizer_inf(std::span<const double> m_values,
                       std::span<const double> mu_values, double a2,
                       double m_d);

}  // namespace omd

#endif  // OMD_ANALYSIS_HPP
