#ifndef OMD_OFFLINE_HPP
#define OMD_OFFLINE_HPP

#include "omd/problems.hpp"

namespace omd {

enum class OfflineMethod { HighAccuracyProjectedSubgradient, GridBruteForce };

std::string to_string(OfflineMethod method);

// Offline minimizer of the consumed loss sum over {x in Q : g(x) <= 0}.
// x_star is feasible for the exact constraint (g(x_star) <= 0).
struct OfflineSolution {
  Vec x_star;
  double objective_sum = 0.0;
  OfflineMethod method = OfflineMethod::HighAccuracyProjectedSubgradient;
  double residual_estimate = 0.0;
};

struct OracleBudget {
  int restarts = 6;            // >= 5 distinct starting points
  int switching_iters = 3000;  // projected-subgradient iterations per restart
  long max_total_iters = 1000000;
  double eps_oracle = 1e-6;    // feasibility threshold for switching steps
  bool newton_polish = true;   // barrier-Newton refinement (euclidean ball)
  bool grid_crosscheck = true; // brute-force cross-check when dim <= 3
};

// Sum of the first `consumed_losses` stream losses at x.
double objective_sum(const OnlineProblem& problem, int consumed_losses,
                     const Vec& x);

// Multi-restart switching projected-subgradient with a deterministic
// barrier-Newton polish; throws std::runtime_error when the feasible set
// appears empty. residual_estimate combines the spread of restart values
// with the polish accuracy estimate.
OfflineSolution solve_offline(const OnlineProblem& problem,
                              int consumed_losses,
                              const OracleBudget& budget = {});

struct GridResult {
  Vec x;
  double value = 0.0;
};

// Dense feasible-grid search with zoom refinement; dim <= 3 only.
GridResult grid_minimize(const OnlineProblem& problem, int consumed_losses,
                         int points_per_dim, int refine_rounds);

}  // namespace omd

#endif  // OMD_OFFLINE_HPP
