#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "omd/problems.hpp"

using omd::Vec;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec x(Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (double v : values) x[i++] = v;
  return x;
}

Vec random_ball(std::mt19937_64& rng, int n) {
  Vec z(n);
  for (int i = 0; i < n; ++i) {
    z[i] = std::sqrt(-2.0 * std::log(omd::uniform_open01(rng))) *
           std::cos(2.0 * M_PI * omd::uniform01(rng));
  }
  const double norm = z.norm();
  if (norm == 0.0) return Vec::Zero(n);
  return z * (std::pow(omd::uniform_open01(rng), 1.0 / n) / norm);
}

}  // namespace

TEST_CASE("loss value examples") {
  CHECK(omd::loss_value({vec({1, 0}), 0.0, 2.0}, vec({3, 0})) ==
        doctest::Approx(12.0));
  CHECK(omd::loss_value({vec({0.7, -0.2}), 0.5, 1.0}, vec({0, 0})) ==
        doctest::Approx(0.5));
  CHECK(omd::loss_value({vec({1, 1}), 2.0, 0.0}, vec({1, 1})) ==
        doctest::Approx(0.0));
}

TEST_CASE("loss subgradient examples") {
  const Vec g1 = omd::loss_subgrad({vec({1, 0}), 0.0, 2.0}, vec({3, 0}));
  CHECK(g1[0] == doctest::Approx(7.0));
  CHECK(g1[1] == doctest::Approx(0.0));

  // Kink: s = 0 by convention.
  const Vec g2 = omd::loss_subgrad({vec({1, 1}), 2.0, 0.0}, vec({1, 1}));
  CHECK(g2.norm() == 0.0);

  const Vec g3 = omd::loss_subgrad({vec({0, 1}), 5.0, 1.0}, vec({0, 1}));
  CHECK(g3.norm() == 0.0);
}

TEST_CASE("constraint value and subgradient examples") {
  omd::OnlineProblem problem;
  problem.setup = omd::ProxSetup::euclidean_ball(2, 1.0);
  problem.constraints.push_back({vec({1, 0}), 1.0, 0.0});
  omd::finalize_parameters(problem);

  const auto single = omd::constraint_value(problem, vec({0, 0}));
  CHECK(single.value == doctest::Approx(-1.0));
  CHECK(single.index == 0);

  problem.constraints.push_back({vec({1, 0}), 1.0, 0.0});
  omd::finalize_parameters(problem);
  CHECK(omd::constraint_value(problem, vec({0.5, 0})).index == 0);

  omd::OnlineProblem two;
  two.setup = problem.setup;
  two.constraints.push_back({vec({0, 0}), -0.2, 0.0});  // g_0 = 0.2
  two.constraints.push_back({vec({0, 0}), -0.7, 0.0});  // g_1 = 0.7
  omd::finalize_parameters(two);
  const auto val = omd::constraint_value(two, vec({0, 0}));
  CHECK(val.value == doctest::Approx(0.7));
  CHECK(val.index == 1);
  // Violation mode picks the first term above eps.
  CHECK(omd::constraint_value(two, vec({0, 0}), 0.1).index == 0);
  CHECK(omd::constraint_value(two, vec({0, 0}), 0.5).index == 1);

  omd::OnlineProblem sub;
  sub.setup = problem.setup;
  sub.constraints.push_back({vec({1, 0}), 0.0, 1.0});
  omd::finalize_parameters(sub);
  const Vec g = omd::constraint_subgrad(sub, vec({0, 1}), 0);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK((omd::constraint_subgrad(sub, vec({0, 0}), 0) - vec({1, 0})).norm() ==
        0.0);
}

TEST_CASE("generator determinism and feasibility of the origin") {
  const auto a = omd::generate_instance(13, 4, 9, 123);
  const auto b = omd::generate_instance(13, 4, 9, 123);
  REQUIRE(a.losses.size() == b.losses.size());
  for (std::size_t i = 0; i < a.losses.size(); ++i) {
    CHECK((a.losses[i].a.array() == b.losses[i].a.array()).all());
    CHECK(a.losses[i].b == b.losses[i].b);
    CHECK(a.losses[i].mu == b.losses[i].mu);
  }
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    CHECK((a.constraints[i].alpha.array() == b.constraints[i].alpha.array())
              .all());
    CHECK(a.constraints[i].beta == b.constraints[i].beta);
    CHECK(a.constraints[i].mu_hat == b.constraints[i].mu_hat);
  }

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = omd::generate_instance(5, 3, 4, seed);
    CHECK(omd::constraint_value(p, Vec::Zero(5)).value <= 0.0);
  }
}

TEST_CASE("generator matches the experiment scale parameters") {
  const auto p = omd::generate_instance(1000, 10, 25, 77);
  CHECK(p.dim() == 1000);
  CHECK(p.constraints.size() == 10);
  CHECK(p.losses.size() == 25);
  for (const auto& f : p.losses) {
    CHECK(f.a.minCoeff() >= 0.0);
    CHECK(f.a.maxCoeff() < 1.0);
    CHECK(f.b >= 0.0);
    CHECK(f.b < 1.0);
    CHECK(f.mu > 0.0);
    CHECK(f.mu < 1.0);
  }
  for (std::size_t i = 0; i < p.losses.size(); ++i) {
    CHECK(p.loss_lipschitz[i] ==
          doctest::Approx(p.losses[i].a.norm() + p.losses[i].mu));
  }
  double mg = 0.0;
  for (const auto& c : p.constraints) {
    mg = std::max(mg, c.alpha.norm() + c.mu_hat);
  }
  CHECK(p.constraint_lipschitz == doctest::Approx(mg));
}

TEST_CASE("instances share constraints and loss prefixes across capacities") {
  const auto small = omd::generate_instance(6, 3, 5, 42);
  const auto large = omd::generate_instance(6, 3, 50, 42);
  for (std::size_t i = 0; i < small.constraints.size(); ++i) {
    CHECK((small.constraints[i].alpha.array() ==
           large.constraints[i].alpha.array())
              .all());
    CHECK(small.constraints[i].beta == large.constraints[i].beta);
  }
  for (std::size_t i = 0; i < small.losses.size(); ++i) {
    CHECK((small.losses[i].a.array() == large.losses[i].a.array()).all());
    CHECK(small.losses[i].b == large.losses[i].b);
    CHECK(small.losses[i].mu == large.losses[i].mu);
  }
}

TEST_CASE("loss certificates on random points") {
  std::mt19937_64 rng(2024);
  const auto p = omd::generate_instance(8, 2, 6, 5);
  const auto setup = p.setup;

  double worst_sc = 0.0, worst_lip = 0.0, worst_rel = 0.0, worst_subgrad = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x = random_ball(rng, 8);
    const Vec y = random_ball(rng, 8);
    for (std::size_t i = 0; i < p.losses.size(); ++i) {
      const auto& f = p.losses[i];
      // Lipschitz certificate: ||subgrad|| <= M_t.
      worst_lip = std::max(
          worst_lip, omd::loss_subgrad(f, x).norm() - p.loss_lipschitz[i]);
      // Strong convexity with the euclidean Bregman divergence.
      const double gap = omd::loss_value(f, x) - omd::loss_value(f, y) -
                         omd::loss_subgrad(f, y).dot(x - y);
      worst_sc = std::max(worst_sc,
                          f.mu * omd::bregman(setup, x, y) - gap);
      // Relative Lipschitz inequality.
      const double rel =
          omd::loss_subgrad(f, x).dot(y - x) +
          p.loss_lipschitz[i] * std::sqrt(2.0 * omd::bregman(setup, y, x));
      worst_rel = std::max(worst_rel, -rel);
      // Plain convexity (subgradient validity).
      const double conv = omd::loss_value(f, y) - omd::loss_value(f, x) -
                          omd::loss_subgrad(f, x).dot(y - x);
      worst_subgrad = std::max(worst_subgrad, -conv);
    }
  }
  CHECK(worst_lip <= 1e-12);
  CHECK(worst_sc <= 1e-10);
  CHECK(worst_rel <= 1e-10);
  CHECK(worst_subgrad <= 1e-10);
}

TEST_CASE("instance options") {
  omd::InstanceOptions fixed;
  fixed.fixed_mu = 0.5;
  const auto pf = omd::generate_instance(4, 2, 6, 3, fixed);
  for (const auto& f : pf.losses) CHECK(f.mu == 0.5);
  for (const auto& c : pf.constraints) CHECK(c.mu_hat == 0.5);

  omd::InstanceOptions power;
  power.mu_power_alpha = 0.75;
  const auto pp = omd::generate_instance(4, 2, 6, 3, power);
  for (int i = 0; i < 6; ++i) {
    CHECK(pp.losses[i].mu ==
          doctest::Approx(std::pow(double(i + 1), -0.75)).epsilon(1e-15));
  }
  for (const auto& c : pp.constraints) CHECK(c.mu_hat == 1.0);

  CHECK_THROWS_AS(omd::generate_instance(0, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(omd::generate_instance(1, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("strip_constraints yields the unconstrained surrogate") {
  const auto p = omd::generate_instance(5, 2, 4, 11);
  const auto u = omd::strip_constraints(p);
  CHECK_FALSE(u.has_constraint());
  const auto eval = omd::constraint_value(u, Vec::Zero(5));
  CHECK(eval.value == doctest::Approx(-1.0));
  CHECK(eval.index == -1);
}
