#include "omd/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace omd {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Alg1: return "alg1";
    case Algorithm::Alg2: return "alg2";
    case Algorithm::Alg3: return "alg3";
    case Algorithm::Alg4: return "alg4";
    case Algorithm::Alg5: return "alg5";
    case Algorithm::AdaptiveBaseline: return "baseline";
  }
  throw std::logic_error("to_string: unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "alg1") return Algorithm::Alg1;
  if (name == "alg2") return Algorithm::Alg2;
  if (name == "alg3") return Algorithm::Alg3;
  if (name == "alg4") return Algorithm::Alg4;
  if (name == "alg5") return Algorithm::Alg5;
  if (name == "baseline") return Algorithm::AdaptiveBaseline;
  throw std::invalid_argument("unknown algorithm name: " + name);
}

double lambda_root(double prefix, double m, double d) {
  if (!(d > 0.0)) {
    throw std::invalid_argument("lambda_root: A^2 + 2*M_d^2 must be > 0");
  }
  if (prefix < 0.0) {
    throw std::invalid_argument("lambda_root: negative prefix");
  }
  const double c = 2.0 * m * m / d;
  // 0.5*(sqrt(p^2+4c) - p) rewritten to avoid cancellation for large p.
  return 2.0 * c / (std::sqrt(prefix * prefix + 4.0 * c) + prefix);
}

namespace {

bool uses_constraint(Algorithm a) {
  return a == Algorithm::Alg1 || a == Algorithm::Alg4 ||
         a == Algorithm::Alg5 || a == Algorithm::AdaptiveBaseline;
}

bool uses_regularizer(Algorithm a) {
  return a == Algorithm::Alg3 || a == Algorithm::Alg5;
}

void validate(const OnlineProblem& problem, const SolverConfig& config) {
  if (!(config.epsilon > 0.0)) {
    throw std::invalid_argument("solver: epsilon must be > 0");
  }
  if (config.target_productive_T < 1) {
    throw std::invalid_argument("solver: target_productive_T must be >= 1");
  }
  if (int(problem.losses.size()) < config.target_productive_T) {
    throw std::invalid_argument(
        "solver: loss stream shorter than target_productive_T");
  }
  if (config.effective_step_cap() < config.target_productive_T) {
    throw std::invalid_argument("solver: step_cap below target_productive_T");
  }
  if (config.algorithm == Algorithm::Alg1 && !(config.mu_global > 0.0)) {
    throw std::invalid_argument("solver: Alg1 requires mu_global > 0");
  }
  if (uses_regularizer(config.algorithm)) {
    if (!config.regularizer) {
      throw std::invalid_argument("solver: Alg3/Alg5 require a regularizer");
    }
    const auto& reg = *config.regularizer;
    if (reg.A2 < 0.0 || reg.M_d < 0.0 ||
        !(reg.A2 + 2.0 * reg.M_d * reg.M_d > 0.0)) {
      throw std::invalid_argument(
          "solver: regularizer needs A^2 + 2*M_d^2 > 0");
    }
  }
  if (config.lambda_policy.kind == LambdaPolicy::Kind::FixedFirst &&
      config.lambda_policy.lambda1 < 0.0) {
    throw std::invalid_argument("solver: lambda1 must be >= 0");
  }
  if (config.mu_schedule.kind == MuSchedule::Kind::Power &&
      config.mu_schedule.alpha < 0.0) {
    throw std::invalid_argument("solver: mu schedule alpha must be >= 0");
  }
  if (config.x1.size() != 0 &&
      !in_feasible_set(problem.setup, config.x1, 1e-12)) {
    throw std::invalid_argument("solver: x1 not in the feasible set");
  }
}

}  // namespace

RunTrace run_solver(const OnlineProblem& problem, const SolverConfig& config) {
  validate(problem, config);
  const Algorithm alg = config.algorithm;
  const int target = config.target_productive_T;
  const int cap = config.effective_step_cap();
  const bool constrained = uses_constraint(alg) && problem.has_constraint();
  const bool regularized = uses_regularizer(alg);
  const RegularizerD reg = regularized ? *config.regularizer : RegularizerD{};
  const double reg_denom = reg.A2 + 2.0 * reg.M_d * reg.M_d;

  RunTrace trace;
  trace.config = config;
  trace.m_bound = problem.lipschitz_bound(target);
  trace.steps.reserve(cap);
  trace.mu_prefix.reserve(cap);
  trace.lambda_prefix.reserve(cap);

  Vec x = config.x1.size() != 0 ? config.x1 : default_start(problem.setup);
  double mu_prefix = 0.0;      // mu_{1:t}
  double lambda_prefix = 0.0;  // lambda_{1:t}
  int consumed = 0;            // productive steps taken
  int t = 0;                   // global counter

  trace.terminated = Termination::ReachedT;
  while (consumed < target) {
    if (int(trace.steps.size()) >= cap) {
      trace.terminated = Termination::StepCapExceeded;
      break;
    }
    ++t;

    ConstraintEval g = constrained
                           ? constraint_value(problem, x, config.epsilon)
                           : ConstraintEval{-1.0, -1};
    const bool productive = g.value <= config.epsilon;

    double mu_t = 0.0;
    double round_m = 0.0;  // per-round Lipschitz bound, Alg3's lambda input
    Vec direction;
    if (productive) {
      const LossTerm& term = problem.losses[consumed];
      mu_t = term.mu;
      round_m = problem.loss_lipschitz[consumed];
      direction = loss_subgrad(term, x);
    } else {
      mu_t = problem.constraints[g.index].mu_hat;
      round_m = problem.constraint_lipschitz;
      direction = constraint_subgrad(problem, x, g.index);
    }
    if (alg == Algorithm::Alg1) mu_t = config.mu_global;
    if (config.mu_schedule.kind == MuSchedule::Kind::Power) {
      mu_t = std::pow(double(t), -config.mu_schedule.alpha);
    }
    mu_prefix += mu_t;

    double lambda_t = 0.0;
    if (regularized) {
      switch (config.lambda_policy.kind) {
        case LambdaPolicy::Kind::Adaptive: {
          const double m = alg == Algorithm::Alg5 ? trace.m_bound : round_m;
          lambda_t = lambda_root(mu_prefix + lambda_prefix, m, reg_denom);
          break;
        }
        case LambdaPolicy::Kind::FixedFirst:
          lambda_t = t == 1 ? config.lambda_policy.lambda1 : 0.0;
          break;
        case LambdaPolicy::Kind::Zero:
          lambda_t = 0.0;
          break;
      }
    }
    lambda_prefix += lambda_t;

    double eta = 0.0;
    switch (alg) {
      case Algorithm::Alg1:
        eta = 1.0 / (config.mu_global * double(t));
        break;
      case Algorithm::Alg2:
      case Algorithm::Alg4:
        eta = 1.0 / mu_prefix;
        break;
      case Algorithm::Alg3:
      case Algorithm::Alg5:
        eta = 1.0 / (mu_prefix + lambda_prefix);
        break;
      case Algorithm::AdaptiveBaseline: {
        const double sq = direction.squaredNorm();
        eta = sq > 0.0 ? config.epsilon / sq : config.baseline_eta_max;
        eta = std::min(eta, config.baseline_eta_max);
        break;
      }
    }

    StepRecord record;
    record.t = t;
    record.kind = productive ? StepKind::Productive : StepKind::NonProductive;
    record.eta = eta;
    record.lambda = lambda_t;
    record.g_value = g.value;
    record.loss_index = productive ? consumed : -1;
    record.f_value = productive
                         ? loss_value(problem.losses[consumed], x)
                         : std::numeric_limits<double>::quiet_NaN();
    record.x = x;

    if (regularized && lambda_t != 0.0) direction += lambda_t * x;
    x = mirror_step(problem.setup, x, direction, eta);

    trace.steps.push_back(std::move(record));
    trace.mu_prefix.push_back(mu_prefix);
    trace.lambda_prefix.push_back(lambda_prefix);
    if (productive) ++consumed;
  }

  trace.productive_count = consumed;
  trace.nonproductive_count = int(trace.steps.size()) - consumed;
  trace.x_final = std::move(x);
  return trace;
}

namespace {
RunTrace run_as(const OnlineProblem& problem, SolverConfig config,
                Algorithm alg) {
  config.algorithm = alg;
  return run_solver(problem, config);
}
}  // namespace

RunTrace run_alg1(const OnlineProblem& problem, SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::Alg1);
}
RunTrace run_alg2(const OnlineProblem& problem, SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::Alg2);
}
RunTrace run_alg3(const OnlineProblem& problem, SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::Alg3);
}
RunTrace run_alg4(const OnlineProblem& problem, SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::Alg4);
}
RunTrace run_alg5(const OnlineProblem& problem, SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::Alg5);
}
RunTrace run_adaptive_baseline(const OnlineProblem& problem,
                               SolverConfig config) {
  return run_as(problem, std::move(config), Algorithm::AdaptiveBaseline);
}

}  // namespace omd
