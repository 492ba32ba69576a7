#include "omd/offline.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace omd {

std::string to_string(OfflineMethod method) {
  switch (method) {
    case OfflineMethod::HighAccuracyProjectedSubgradient:
      return "HighAccuracyProjectedSubgradient";
    case OfflineMethod::GridBruteForce:
      return "GridBruteForce";
  }
  throw std::logic_error("to_string: unknown offline method");
}

double objective_sum(const OnlineProblem& problem, int consumed_losses,
                     const Vec& x) {
  if (consumed_losses < 0 || consumed_losses > int(problem.losses.size())) {
    throw std::invalid_argument("objective_sum: consumed_losses out of range");
  }
  double s = 0.0;
  for (int i = 0; i < consumed_losses; ++i) {
    s += loss_value(problem.losses[i], x);
  }
  return s;
}

namespace {

using Mat = Eigen::MatrixXd;

// Cached form of sum_{t<T} f_t: rows of A are the a_t, mu_sum = sum mu_t.
struct StackedObjective {
  Mat A;
  Vec b;
  double mu_sum = 0.0;

  static StackedObjective build(const OnlineProblem& problem, int count) {
    StackedObjective obj;
    obj.A.resize(count, problem.dim());
    obj.b.resize(count);
    for (int i = 0; i < count; ++i) {
      obj.A.row(i) = problem.losses[i].a.transpose();
      obj.b[i] = problem.losses[i].b;
      obj.mu_sum += problem.losses[i].mu;
    }
    return obj;
  }

  double value(const Vec& x) const {
    return (A * x - b).lpNorm<1>() + 0.5 * mu_sum * x.squaredNorm();
  }

  Vec subgrad(const Vec& x) const {
    Vec r = A * x - b;
    Vec s(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      s[i] = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
    }
    return A.transpose() * s + mu_sum * x;
  }
};

double constraint_max(const OnlineProblem& problem, const Vec& x) {
  return constraint_value(problem, x).value;
}

bool strictly_feasible(const OnlineProblem& problem, const Vec& x) {
  if (x.norm() >= problem.setup.radius * (1.0 - 1e-12)) return false;
  return !problem.has_constraint() || constraint_max(problem, x) < 0.0;
}

// Minimize g by projected subgradient; used both as a feasibility probe and
// to produce a strictly interior anchor for the barrier phase.
struct FeasibilityProbe {
  Vec point;
  double g_value = -1.0;
};

FeasibilityProbe probe_feasibility(const OnlineProblem& problem, int iters) {
  FeasibilityProbe best;
  Vec x = Vec::Zero(problem.dim());
  best.point = x;
  best.g_value = constraint_max(problem, x);
  const double mu = std::max(problem.constraint_mu, 1e-12);
  for (int k = 1; k <= iters && best.g_value >= -1e-9; ++k) {
    const ConstraintEval g = constraint_value(problem, x);
    const Vec dir = constraint_subgrad(problem, x, g.index);
    x = mirror_step(problem.setup, x, dir, 1.0 / (mu * double(k)));
    const double v = constraint_max(problem, x);
    if (v < best.g_value) {
      best.g_value = v;
      best.point = x;
    }
  }
  // Pull slightly inside the ball so the anchor is strictly interior.
  const double r = best.point.norm();
  if (r > problem.setup.radius * (1.0 - 1e-9) && r > 0.0) {
    best.point *= problem.setup.radius * (1.0 - 1e-9) / r;
    best.g_value = constraint_max(problem, best.point);
  }
  return best;
}

Vec switching_phase(const OnlineProblem& problem, const StackedObjective& obj,
                    Vec x, int iters, double eps_oracle) {
  Vec best = x;
  double best_value = std::numeric_limits<double>::infinity();
  const bool constrained = problem.has_constraint();
  if (!constrained || constraint_max(problem, x) <= eps_oracle) {
    best_value = obj.value(x);
  }
  for (int k = 1; k <= iters; ++k) {
    Vec dir;
    if (constrained) {
      const ConstraintEval g = constraint_value(problem, x, eps_oracle);
      if (g.value > eps_oracle) {
        dir = constraint_subgrad(problem, x, g.index);
      } else {
        dir = obj.subgrad(x);
      }
    } else {
      dir = obj.subgrad(x);
    }
    x = mirror_step(problem.setup, x, dir, 1.0 / (obj.mu_sum * double(k)));
    if (!constrained || constraint_max(problem, x) <= eps_oracle) {
      const double v = obj.value(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
  }
  return best_value < std::numeric_limits<double>::infinity() ? best : x;
}

// Barrier-Newton path following on the euclidean ball: smooth the |.|
// kinks, add log barriers for the ball and each g_i <= 0, cool the barrier
// weight geometrically from a hot start down to 1e-9. Returns nullopt when
// no strictly feasible start can be produced or the very first stage fails.
struct PolishResult {
  Vec x;
  double gap_estimate = 0.0;
};

std::optional<PolishResult> newton_polish(const OnlineProblem& problem,
                                          const StackedObjective& obj,
                                          Vec x,
                                          const std::optional<Vec>& anchor) {
  const int n = problem.dim();
  const double R = problem.setup.radius;
  const double R2 = R * R;

  // Start strictly inside the ball.
  if (x.norm() > R * (1.0 - 1e-9)) {
    x *= R * (1.0 - 1e-9) / x.norm();
  }
  if (anchor) {
    // Blend toward the interior anchor until the slack is a healthy
    // fraction of the anchor's own; a barely-feasible start pins the
    // barrier Newton iteration to the boundary.
    const double margin =
        problem.has_constraint()
            ? 0.25 * std::max(0.0, -constraint_max(problem, *anchor))
            : 0.0;
    const auto good_start = [&](const Vec& z) {
      if (!strictly_feasible(problem, z)) return false;
      return !problem.has_constraint() ||
             constraint_max(problem, z) <= -margin;
    };
    for (int j = 0; j < 200 && !good_start(x); ++j) {
      x = 0.5 * (x + *anchor);
    }
  }
  if (!strictly_feasible(problem, x)) return std::nullopt;

  const auto barrier_value = [&](const Vec& z, double tau,
                                 double delta) -> double {
    const double s = R2 - z.squaredNorm();
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    Vec r = obj.A * z - obj.b;
    double v = 0.5 * obj.mu_sum * z.squaredNorm() - tau * std::log(s);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      v += std::sqrt(r[i] * r[i] + delta * delta);
    }
    for (const auto& c : problem.constraints) {
      const double g = constraint_term_value(c, z);
      if (g >= 0.0) return std::numeric_limits<double>::infinity();
      v -= tau * std::log(-g);
    }
    return v;
  };

  // Path following: start hot so the first central point sits deep inside
  // the feasible set (reachable from any start), then cool geometrically.
  const double tau_hot = 10.0 * std::max(1.0, std::abs(obj.value(x)));
  const double tau_cold = 1e-9;
  double completed_tau = -1.0;
  double tau = tau_hot;
  bool first_stage = true;
  while (true) {
    const double delta =
        std::min(1e-2, std::max(1e-9, tau / double(obj.b.size() + 1)));
    bool stage_ok = true;
    const int max_newton = first_stage ? 300 : 40;
    for (int iter = 0; iter < max_newton; ++iter) {
      const Vec r = obj.A * x - obj.b;
      Vec psi(r.size()), w(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double q = std::sqrt(r[i] * r[i] + delta * delta);
        psi[i] = r[i] / q;
        w[i] = delta * delta / (q * q * q);
      }
      const double s = R2 - x.squaredNorm();
      Vec grad = obj.A.transpose() * psi + obj.mu_sum * x +
                 tau * 2.0 * x / s;
      Mat hess = obj.A.transpose() * w.asDiagonal() * obj.A;
      hess.diagonal().array() += obj.mu_sum + tau * 2.0 / s;
      hess += (tau * 4.0 / (s * s)) * (x * x.transpose());
      for (const auto& c : problem.constraints) {
        const double g = constraint_term_value(c, x);
        const Vec gg = c.alpha + c.mu_hat * x;
        grad += tau * gg / (-g);
        hess += (tau / (g * g)) * (gg * gg.transpose());
        hess.diagonal().array() += tau * c.mu_hat / (-g);
      }

      // Damped Newton: retry with growing ridge when the factorization or
      // the descent test fails on an ill-conditioned barrier Hessian.
      Vec d(n);
      double decrement = -1.0;
      double ridge = 0.0;
      bool solved = false;
      for (int attempt = 0; attempt < 9; ++attempt) {
        Mat h = hess;
        if (ridge > 0.0) h.diagonal().array() += ridge;
        Eigen::LDLT<Mat> ldlt(h);
        if (ldlt.info() == Eigen::Success) {
          d = ldlt.solve(-grad);
          decrement = -grad.dot(d);
          if (std::isfinite(decrement) && decrement >= 0.0) {
            solved = true;
            break;
          }
        }
        ridge = ridge == 0.0
                    ? 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff())
                    : ridge * 100.0;
      }
      if (!solved) {
        stage_ok = false;
        break;
      }
      const double phi0 = barrier_value(x, tau, delta);
      if (decrement * 0.5 < 1e-15 * (1.0 + std::abs(phi0))) break;

      // Fraction-to-boundary with a tau-scaled slack floor: no step may
      // shrink a slack by more than 99% or push it below the floor, else
      // the iterate glues itself to a constraint and the Hessian blows up
      // beyond what the ridge retries can absorb.
      const double ball_slack = R2 - x.squaredNorm();
      std::vector<double> slacks;
      slacks.reserve(problem.constraints.size());
      for (const auto& c : problem.constraints) {
        slacks.push_back(-constraint_term_value(c, x));
      }
      const double slack_floor = 1e-4 * std::min(tau, 1.0);
      const auto required = [&](double old_slack) {
        return std::min(old_slack, std::max(0.01 * old_slack, slack_floor));
      };
      const auto keeps_slack = [&](const Vec& cand) {
        if (R2 - cand.squaredNorm() < required(ball_slack)) return false;
        for (std::size_t i = 0; i < slacks.size(); ++i) {
          if (-constraint_term_value(problem.constraints[i], cand) <
              required(slacks[i])) {
            return false;
          }
        }
        return true;
      };

      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec cand = x + alpha * d;
        if (keeps_slack(cand)) {
          const double phi = barrier_value(cand, tau, delta);
          if (std::isfinite(phi) && phi <= phi0 - 1e-4 * alpha * decrement) {
            x = cand;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    if (!stage_ok) break;
    completed_tau = tau;
    first_stage = false;
    if (tau <= tau_cold) break;
    tau = std::max(tau_cold, tau * 0.2);
  }

  const bool feasible =
      x.norm() <= R &&
      (!problem.has_constraint() || constraint_max(problem, x) <= 0.0);
  if (completed_tau < 0.0 || !feasible) return std::nullopt;
  PolishResult out;
  out.x = std::move(x);
  // Barrier suboptimality plus the smoothing shift at the coldest stage
  // that completed.
  const double delta_done =
      std::min(1e-2, std::max(1e-9, completed_tau / double(obj.b.size() + 1)));
  out.gap_estimate = completed_tau * double(problem.constraints.size() + 1) +
                     2.0 * delta_done * double(obj.b.size());
  return out;
}

// Deterministic restart point from the instance seed and restart index.
Vec seeded_start(const OnlineProblem& problem, int restart) {
  std::mt19937_64 rng(problem.seed * 0x9E3779B97F4A7C15ULL +
                      0xD1B54A32D192ED03ULL * std::uint64_t(restart + 1));
  const int n = problem.dim();
  if (problem.setup.kind == ProxKind::EntropySimplex) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = -std::log(uniform_open01(rng));
    return x / x.sum();
  }
  Vec z(n);
  for (int i = 0; i < n; ++i) {
    // Box-Muller from the deterministic uniform stream.
    const double u1 = uniform_open01(rng);
    const double u2 = uniform01(rng);
    z[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  const double norm = z.norm();
  if (norm == 0.0) return Vec::Zero(n);
  const double radial = std::pow(uniform_open01(rng), 1.0 / double(n));
  return z * (problem.setup.radius * radial / norm);
}

// Largest point on the segment [anchor, x] with g <= 0; keeps the exact
// feasibility invariant when the polish phase was unavailable.
Vec pull_to_feasible(const OnlineProblem& problem, Vec x, const Vec& anchor) {
  if (!problem.has_constraint() || constraint_max(problem, x) <= 0.0) return x;
  double lo = 0.0, hi = 1.0;  // theta: anchor + theta * (x - anchor)
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Vec cand = anchor + mid * (x - anchor);
    if (constraint_max(problem, cand) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return anchor + lo * (x - anchor);
}

}  // namespace

GridResult grid_minimize(const OnlineProblem& problem, int consumed_losses,
                         int points_per_dim, int refine_rounds) {
  const int n = problem.dim();
  if (n > 3) throw std::invalid_argument("grid_minimize: dim must be <= 3");
  if (points_per_dim < 2) {
    throw std::invalid_argument("grid_minimize: need >= 2 points per dim");
  }
  if (problem.setup.kind != ProxKind::EuclideanBall) {
    throw std::invalid_argument("grid_minimize: euclidean ball only");
  }
  const StackedObjective obj = StackedObjective::build(problem, consumed_losses);
  const double R = problem.setup.radius;

  Vec lo = Vec::Constant(n, -R);
  Vec hi = Vec::Constant(n, R);
  GridResult best;
  best.value = std::numeric_limits<double>::infinity();

  for (int round = 0; round <= refine_rounds; ++round) {
    Vec x(n);
    std::vector<int> idx(n, 0);
    bool done = false;
    while (!done) {
      for (int d = 0; d < n; ++d) {
        x[d] = lo[d] + (hi[d] - lo[d]) * double(idx[d]) /
                           double(points_per_dim - 1);
      }
      if (x.norm() <= R &&
          (!problem.has_constraint() || constraint_max(problem, x) <= 0.0)) {
        const double v = obj.value(x);
        if (v < best.value) {
          best.value = v;
          best.x = x;
        }
      }
      int d = 0;
      while (d < n && ++idx[d] == points_per_dim) {
        idx[d] = 0;
        ++d;
      }
      done = d == n;
    }
    if (!std::isfinite(best.value)) {
      throw std::runtime_error("grid_minimize: no feasible grid point");
    }
    // Zoom around the incumbent.
    for (int d = 0; d < n; ++d) {
      const double span = (hi[d] - lo[d]) * 2.0 / double(points_per_dim - 1);
      lo[d] = std::max(best.x[d] - span, -R);
      hi[d] = std::min(best.x[d] + span, R);
    }
  }
  best.value = objective_sum(problem, consumed_losses, best.x);
  return best;
}

OfflineSolution solve_offline(const OnlineProblem& problem,
                              int consumed_losses, const OracleBudget& budget) {
  if (consumed_losses < 1 ||
      consumed_losses > int(problem.losses.size())) {
    throw std::invalid_argument("solve_offline: consumed_losses out of range");
  }
  const StackedObjective obj =
      StackedObjective::build(problem, consumed_losses);
  const bool ball = problem.setup.kind == ProxKind::EuclideanBall;

  std::optional<Vec> interior;
  Vec feasible_anchor = Vec::Zero(problem.dim());
  if (problem.has_constraint()) {
    const FeasibilityProbe probe = probe_feasibility(problem, 2000);
    if (probe.g_value > budget.eps_oracle) {
      throw std::runtime_error(
          "solve_offline: feasible set appears empty (min g estimate " +
          std::to_string(probe.g_value) + ")");
    }
    if (strictly_feasible(problem, probe.point)) interior = probe.point;
    if (probe.g_value <= 0.0) feasible_anchor = probe.point;
    if (constraint_max(problem, Vec::Zero(problem.dim())) <= 0.0) {
      feasible_anchor = Vec::Zero(problem.dim());
    }
  }

  const int restarts = std::max(budget.restarts, 5);
  std::vector<Vec> starts;
  starts.push_back(default_start(problem.setup));
  if (ball) starts.push_back(Vec::Zero(problem.dim()));
  if (interior) starts.push_back(*interior);
  for (int r = 0; int(starts.size()) < restarts; ++r) {
    starts.push_back(seeded_start(problem, r));
  }

  long iters_left = budget.max_total_iters;
  double best_value = std::numeric_limits<double>::infinity();
  Vec best_x;
  double spread_lo = std::numeric_limits<double>::infinity();
  double spread_hi = -std::numeric_limits<double>::infinity();
  double gap_estimate = 0.0;

  for (int r = 0; r < restarts; ++r) {
    const int iters =
        int(std::min<long>(budget.switching_iters, std::max<long>(iters_left, 0)));
    iters_left -= iters;
    Vec x = switching_phase(problem, obj, starts[r], iters, budget.eps_oracle);
    double gap = 0.0;
    bool polished = false;
    if (ball && budget.newton_polish) {
      if (auto res = newton_polish(problem, obj, x, interior)) {
        x = res->x;
        gap = res->gap_estimate;
        polished = true;
      }
    }
    if (!polished) {
      x = pull_to_feasible(problem, std::move(x), feasible_anchor);
      // Residual contribution of an unpolished subgradient endpoint.
      const double mf = obj.A.rowwise().norm().sum() +
                        obj.mu_sum * problem.setup.radius;
      gap = mf * mf * (1.0 + std::log(double(std::max(iters, 2)))) /
            (obj.mu_sum * double(std::max(iters, 2)));
    }
    const double v = objective_sum(problem, consumed_losses, x);
    spread_lo = std::min(spread_lo, v);
    spread_hi = std::max(spread_hi, v);
    gap_estimate = std::max(gap_estimate, gap);
    if (v < best_value) {
      best_value = v;
      best_x = x;
    }
  }

  OfflineMethod method = OfflineMethod::HighAccuracyProjectedSubgradient;
  if (ball && budget.grid_crosscheck && problem.dim() <= 3) {
    const int pts = problem.dim() == 1 ? 2001 : (problem.dim() == 2 ? 201 : 41);
    GridResult grid = grid_minimize(problem, consumed_losses, pts, 4);
    Vec gx = grid.x;
    if (budget.newton_polish) {
      if (auto res = newton_polish(problem, obj, gx, interior)) gx = res->x;
    }
    gx = pull_to_feasible(problem, std::move(gx), feasible_anchor);
    const double gv = objective_sum(problem, consumed_losses, gx);
    if (gv < best_value - 1e-12) {
      best_value = gv;
      best_x = gx;
      method = OfflineMethod::GridBruteForce;
    }
  }

  OfflineSolution out;
  out.x_star = std::move(best_x);
  out.objective_sum = best_value;
  out.method = method;
  out.residual_estimate = (spread_hi - spread_lo) + gap_estimate;
  return out;
}

}  // namespace omd
