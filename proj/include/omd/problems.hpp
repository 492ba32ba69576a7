#ifndef OMD_PROBLEMS_HPP
#define OMD_PROBLEMS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "omd/geometry.hpp"

namespace omd {

// One online loss f(x) = |<a,x> - b| + (mu/2)*||x||^2.
struct LossTerm {
  Vec a;
  double b = 0.0;
  double mu = 0.0;  // strong-convexity parameter, > 0
};

// One constraint piece g_i(x) = <alpha,x> - beta + (mu_hat/2)*||x||^2.
// The functional constraint is g(x) = max_i g_i(x).
struct ConstraintTerm {
  Vec alpha;
  double beta = 0.0;
  double mu_hat = 0.0;
};

struct InstanceOptions {
  double radius = 1.0;
  // All mu_i and mu_hat_i set to this value instead of uniform draws.
  std::optional<double> fixed_mu;
  // mu_i = i^{-alpha} in stream order, mu_hat_i = 1. Realizes the
  // power-decay strong-convexity schedule on an otherwise random instance.
  std::optional<double> mu_power_alpha;
};

struct OnlineProblem {
  ProxSetup setup;
  std::vector<LossTerm> losses;            // the online stream, in order
  std::vector<ConstraintTerm> constraints; // empty => unconstrained (g == -1)
  std::vector<double> loss_lipschitz;      // M_t = sup_Q ||subgrad f_t||
  double constraint_lipschitz = 0.0;       // M_g
  double constraint_mu = 0.0;              // min_i mu_hat_i
  std::uint64_t seed = 0;                  // 0 for hand-built instances

  int dim() const { return setup.dim; }
  bool has_constraint() const { return !constraints.empty(); }

  // M = max{M_t over the first `first_losses` stream entries, M_g}.
  double lipschitz_bound(int first_losses) const;
  // min over the first `first_losses` mu_t and all mu_hat_i.
  double min_strong_convexity(int first_losses) const;
};

double loss_value(const LossTerm& term, const Vec& x);

// s*a + mu*x with s = sign(<a,x> - b), s = 0 exactly at the kink.
Vec loss_subgrad(const LossTerm& term, const Vec& x);

struct ConstraintEval {
  double value = -1.0;  // g(x) = max_i g_i(x); -1 for the unconstrained surrogate
  int index = -1;
};

// Max mode: index = argmax (lowest index on ties).
ConstraintEval constraint_value(const OnlineProblem& problem, const Vec& x);
// Violation mode: index = first i with g_i(x) > eps; value is still the max.
// Falls back to the argmax index when no term exceeds eps.
ConstraintEval constraint_value(const OnlineProblem& problem, const Vec& x,
                                double eps);

Vec constraint_subgrad(const OnlineProblem& problem, const Vec& x, int index);

double constraint_term_value(const ConstraintTerm& term, const Vec& x);

// Deterministic uniform draws from the raw 64-bit stream; identical across
// platforms (std::uniform_real_distribution is not).
double uniform01(std::mt19937_64& rng);       // [0,1)
double uniform_open01(std::mt19937_64& rng);  // (0,1)

// Random instance on the euclidean ball: a_i, alpha_i entrywise uniform
// [0,1); b_i, beta_i uniform [0,1); mu_i, mu_hat_i uniform (0,1).
// Constraint terms are drawn before the loss stream, so instances sharing a
// seed share constraints and loss prefixes across different capacities.
OnlineProblem generate_instance(int n, int m, int t_capacity,
                                std::uint64_t seed,
                                const InstanceOptions& options = {});

// Copy with the constraint dropped (g == -1 surrogate).
OnlineProblem strip_constraints(const OnlineProblem& problem);

// Recomputes M_t, M_g and constraint_mu analytically from the terms.
// Call after hand-building or editing an instance.
void finalize_parameters(OnlineProblem& problem);

}  // namespace omd

#endif  // OMD_PROBLEMS_HPP
