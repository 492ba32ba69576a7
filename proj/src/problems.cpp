#include "omd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace omd {

namespace {

void check_dim(const Vec& v, const Vec& x, const char* who) {
  if (v.size() != x.size()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

double sup_norm_on_setup(const ProxSetup& setup) {
  // max ||x||_2 over Q
  return setup.kind == ProxKind::EuclideanBall ? setup.radius : 1.0;
}

}  // namespace

double OnlineProblem::lipschitz_bound(int first_losses) const {
  const int k = std::min<int>(first_losses, int(loss_lipschitz.size()));
  double m = constraint_lipschitz;
  for (int i = 0; i < k; ++i) m = std::max(m, loss_lipschitz[i]);
  return m;
}

double OnlineProblem::min_strong_convexity(int first_losses) const {
  const int k = std::min<int>(first_losses, int(losses.size()));
  double mu = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) mu = std::min(mu, losses[i].mu);
  for (const auto& c : constraints) mu = std::min(mu, c.mu_hat);
  return mu;
}

double loss_value(const LossTerm& term, const Vec& x) {
  check_dim(term.a, x, "loss_value");
  return std::abs(term.a.dot(x) - term.b) + 0.5 * term.mu * x.squaredNorm();
}

Vec loss_subgrad(const LossTerm& term, const Vec& x) {
  check_dim(term.a, x, "loss_subgrad");
  const double r = term.a.dot(x) - term.b;
  const double s = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  return s * term.a + term.mu * x;
}

double constraint_term_value(const ConstraintTerm& term, const Vec& x) {
  check_dim(term.alpha, x, "constraint_term_value");
  return term.alpha.dot(x) - term.beta + 0.5 * term.mu_hat * x.squaredNorm();
}

ConstraintEval constraint_value(const OnlineProblem& problem, const Vec& x) {
  if (!problem.has_constraint()) return {-1.0, -1};
  ConstraintEval best{-std::numeric_limits<double>::infinity(), 0};
  for (int i = 0; i < int(problem.constraints.size()); ++i) {
    const double v = constraint_term_value(problem.constraints[i], x);
    if (v > best.value) best = {v, i};
  }
  return best;
}

ConstraintEval constraint_value(const OnlineProblem& problem, const Vec& x,
                                double eps) {
  if (!problem.has_constraint()) return {-1.0, -1};
  double max_value = -std::numeric_limits<double>::infinity();
  int max_index = 0;
  int first_violated = -1;
  for (int i = 0; i < int(problem.constraints.size()); ++i) {
    const double v = constraint_term_value(problem.constraints[i], x);
    if (v > max_value) {
      max_value = v;
      max_index = i;
    }
    if (first_violated < 0 && v > eps) first_violated = i;
  }
  return {max_value, first_violated >= 0 ? first_violated : max_index};
}

Vec constraint_subgrad(const OnlineProblem& problem, const Vec& x, int index) {
  if (index < 0 || index >= int(problem.constraints.size())) {
    throw std::invalid_argument("constraint_subgrad: index out of range");
  }
  const auto& term = problem.constraints[index];
  check_dim(term.alpha, x, "constraint_subgrad");
  return term.alpha + term.mu_hat * x;
}

double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

double uniform_open01(std::mt19937_64& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u == 0.0);
  return u;
}

void finalize_parameters(OnlineProblem& problem) {
  const double r = sup_norm_on_setup(problem.setup);
  problem.loss_lipschitz.resize(problem.losses.size());
  for (std::size_t i = 0; i < problem.losses.size(); ++i) {
    problem.loss_lipschitz[i] =
        problem.losses[i].a.norm() + problem.losses[i].mu * r;
  }
  problem.constraint_lipschitz = 0.0;
  problem.constraint_mu = 0.0;
  if (!problem.constraints.empty()) {
    double mg = 0.0;
    double mu = std::numeric_limits<double>::infinity();
    for (const auto& c : problem.constraints) {
      mg = std::max(mg, c.alpha.norm() + c.mu_hat * r);
      mu = std::min(mu, c.mu_hat);
    }
    problem.constraint_lipschitz = mg;
    problem.constraint_mu = mu;
  }
}

OnlineProblem generate_instance(int n, int m, int t_capacity,
                                std::uint64_t seed,
                                const InstanceOptions& options) {
  if (n < 1 || m < 1 || t_capacity < 1) {
    throw std::invalid_argument("generate_instance: n, m, T must be >= 1");
  }
  std::mt19937_64 rng(seed);
  OnlineProblem problem;
  problem.setup = ProxSetup::euclidean_ball(n, options.radius);
  problem.seed = seed;

  problem.constraints.resize(m);
  for (auto& c : problem.constraints) {
    c.alpha.resize(n);
    for (int j = 0; j < n; ++j) c.alpha[j] = uniform01(rng);
    c.beta = uniform01(rng);
    c.mu_hat = uniform_open01(rng);
    if (options.fixed_mu) c.mu_hat = *options.fixed_mu;
    if (options.mu_power_alpha) c.mu_hat = 1.0;
  }

  problem.losses.resize(t_capacity);
  for (int i = 0; i < t_capacity; ++i) {
    auto& f = problem.losses[i];
    f.a.resize(n);
    for (int j = 0; j < n; ++j) f.a[j] = uniform01(rng);
    f.b = uniform01(rng);
    f.mu = uniform_open01(rng);
    if (options.fixed_mu) f.mu = *options.fixed_mu;
    if (options.mu_power_alpha) {
      f.mu = std::pow(double(i + 1), -*options.mu_power_alpha);
    }
  }

  finalize_parameters(problem);
  return problem;
}

OnlineProblem strip_constraints(const OnlineProblem& problem) {
  OnlineProblem out = problem;
  out.constraints.clear();
  out.constraint_lipschitz = 0.0;
  out.constraint_mu = 0.0;
  return out;
}

}  // namespace omd
