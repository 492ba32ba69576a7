#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "omd/geometry.hpp"
#include "omd/problems.hpp"

using omd::Vec;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec x(Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (double v : values) x[i++] = v;
  return x;
}

Vec random_ball(std::mt19937_64& rng, int n, double radius = 1.0) {
  Vec z(n);
  for (int i = 0; i < n; ++i) {
    z[i] = std::sqrt(-2.0 * std::log(omd::uniform_open01(rng))) *
           std::cos(2.0 * M_PI * omd::uniform01(rng));
  }
  const double norm = z.norm();
  if (norm == 0.0) return Vec::Zero(n);
  return z * (radius * std::pow(omd::uniform_open01(rng), 1.0 / n) / norm);
}

Vec random_simplex(std::mt19937_64& rng, int n) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = -std::log(omd::uniform_open01(rng));
  return x / x.sum();
}

// grad h reconstructed by central differences; independent of grad_h().
Vec fd_grad_h(const omd::ProxSetup& setup, const Vec& x, double step = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (omd::h_value(setup, hi) - omd::h_value(setup, lo)) / (2.0 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("euclidean bregman closed forms") {
  const auto ball = omd::ProxSetup::euclidean_ball(2, 1.0);
  CHECK(omd::bregman(ball, vec({0.3, -0.4}), vec({0.3, -0.4})) ==
        doctest::Approx(0.0));
  CHECK(omd::bregman(ball, vec({1, 0}), vec({0, 0})) == doctest::Approx(0.5));
}

TEST_CASE("entropy bregman equals KL on the simplex") {
  const auto simplex = omd::ProxSetup::entropy_simplex(2);
  const Vec y = vec({0.5, 0.5});
  const Vec x = vec({0.25, 0.75});
  const double v = omd::bregman(simplex, y, x);
  // 0.5*ln(0.5/0.25) + 0.5*ln(0.5/0.75) = 0.5*ln(4/3)
  CHECK(v == doctest::Approx(0.14384103622589045).epsilon(1e-12));
  const double kl = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  CHECK(v == doctest::Approx(kl).epsilon(1e-14));
  // Cross-check the gradient term with finite differences of h.
  const double v_fd = omd::h_value(simplex, y) - omd::h_value(simplex, x) -
                      fd_grad_h(simplex, x).dot(y - x);
  CHECK(std::abs(v - v_fd) < 1e-6);
}

TEST_CASE("grad_h closed forms") {
  const auto ball = omd::ProxSetup::euclidean_ball(2, 1.0);
  CHECK((omd::grad_h(ball, vec({3, -1})) - vec({3, -1})).norm() == 0.0);
  CHECK(omd::grad_h(ball, vec({0, 0})).norm() == 0.0);

  const int n = 5;
  const auto simplex = omd::ProxSetup::entropy_simplex(n);
  const Vec g = omd::grad_h(simplex, Vec::Constant(n, 1.0 / n));
  for (int i = 0; i < n; ++i) {
    CHECK(g[i] == doctest::Approx(1.0 + std::log(1.0 / n)).epsilon(1e-14));
  }
}

TEST_CASE("mirror step closed forms") {
  const auto ball = omd::ProxSetup::euclidean_ball(2, 1.0);
  const Vec stepped = omd::mirror_step(ball, vec({0, 0}), vec({2, 0}), 1.0);
  CHECK(stepped[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(stepped[1] == doctest::Approx(0.0));

  // Zero direction leaves the point unchanged, any setup.
  const Vec same = omd::mirror_step(ball, vec({0.1, 0.2}), vec({0, 0}), 0.7);
  CHECK((same - vec({0.1, 0.2})).norm() == 0.0);

  const auto simplex = omd::ProxSetup::entropy_simplex(3);
  const Vec upd = omd::mirror_step(simplex, Vec::Constant(3, 1.0 / 3),
                                   vec({1, 0, 0}), std::log(2.0));
  CHECK(upd[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(upd[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(upd[2] == doctest::Approx(0.4).epsilon(1e-14));
  const Vec same2 =
      omd::mirror_step(simplex, Vec::Constant(3, 1.0 / 3), vec({0, 0, 0}), 2.0);
  CHECK((same2 - Vec::Constant(3, 1.0 / 3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("bregman projection closed forms") {
  const auto ball = omd::ProxSetup::euclidean_ball(2, 1.0);
  CHECK((omd::bregman_project(ball, vec({0.5, 0})) - vec({0.5, 0})).norm() ==
        0.0);
  const Vec proj = omd::bregman_project(ball, vec({0, 3}));
  CHECK(proj[0] == doctest::Approx(0.0));
  CHECK(proj[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto simplex = omd::ProxSetup::entropy_simplex(3);
  const Vec on = vec({0.2, 0.3, 0.5});
  CHECK((omd::bregman_project(simplex, on) - on).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("domain and dimension errors") {
  const auto ball = omd::ProxSetup::euclidean_ball(2, 1.0);
  const auto simplex = omd::ProxSetup::entropy_simplex(2);
  CHECK_THROWS_AS(omd::bregman(ball, vec({1, 2, 3}), vec({1, 2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(omd::bregman(simplex, vec({0.5, 0.5}), vec({0.0, 1.0})),
                  std::domain_error);
  CHECK_THROWS_AS(omd::grad_h(simplex, vec({-0.1, 1.1})), std::domain_error);
  CHECK_THROWS_AS(omd::mirror_step(ball, vec({0, 0}), vec({1, 0}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      omd::mirror_step(simplex, vec({0.5, 0.5}),
                       vec({std::numeric_limits<double>::infinity(), 0.0}),
                       1.0),
      std::invalid_argument);
}

TEST_CASE("bregman nonnegativity on random pairs") {
  std::mt19937_64 rng(7);
  const int n = 6;
  const auto ball = omd::ProxSetup::euclidean_ball(n, 1.0);
  const auto simplex = omd::ProxSetup::entropy_simplex(n);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    worst = std::max(
        worst, -omd::bregman(ball, random_ball(rng, n), random_ball(rng, n)));
    worst = std::max(worst, -omd::bregman(simplex, random_simplex(rng, n),
                                          random_simplex(rng, n)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("euclidean mirror step equals projected gradient step") {
  std::mt19937_64 rng(8);
  const int n = 7;
  const auto ball = omd::ProxSetup::euclidean_ball(n, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x = random_ball(rng, n);
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir[i] = 4.0 * omd::uniform01(rng) - 2.0;
    const double eta = 0.01 + 2.0 * omd::uniform01(rng);
    Vec raw = x - eta * dir;
    if (raw.norm() > 1.0) raw /= raw.norm();
    worst = std::max(worst, (omd::mirror_step(ball, x, dir, eta) - raw)
                                .cwiseAbs()
                                .maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("generalized pythagorean inequality") {
  std::mt19937_64 rng(9);
  const int n = 5;
  const auto ball = omd::ProxSetup::euclidean_ball(n, 1.0);
  const auto simplex = omd::ProxSetup::entropy_simplex(n);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = 6.0 * omd::uniform01(rng) - 3.0;
    const Vec u = random_ball(rng, n);
    const Vec p = omd::bregman_project(ball, y);
    worst = std::max(worst, omd::bregman(ball, u, p) + omd::bregman(ball, p, y) -
                                omd::bregman(ball, u, y));

    Vec ys(n);
    for (int i = 0; i < n; ++i) ys[i] = 2.0 * omd::uniform_open01(rng);
    const Vec us = random_simplex(rng, n);
    const Vec ps = omd::bregman_project(simplex, ys);
    worst = std::max(worst, omd::bregman(simplex, us, ps) +
                                omd::bregman(simplex, ps, ys) -
                                omd::bregman(simplex, us, ys));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("three-point identity") {
  std::mt19937_64 rng(10);
  const int n = 5;
  const auto ball = omd::ProxSetup::euclidean_ball(n, 1.0);
  const auto simplex = omd::ProxSetup::entropy_simplex(n);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    for (int which = 0; which < 2; ++which) {
      const auto& setup = which == 0 ? ball : simplex;
      const Vec x = which == 0 ? random_ball(rng, n) : random_simplex(rng, n);
      const Vec y = which == 0 ? random_ball(rng, n) : random_simplex(rng, n);
      const Vec z = which == 0 ? random_ball(rng, n) : random_simplex(rng, n);
      const double lhs =
          (x - y).dot(omd::grad_h(setup, z) - omd::grad_h(setup, y));
      const double rhs = omd::bregman(setup, x, y) - omd::bregman(setup, x, z) +
                         omd::bregman(setup, y, z);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("default start is feasible") {
  for (int n : {1, 2, 17}) {
    const auto ball = omd::ProxSetup::euclidean_ball(n, 1.0);
    CHECK(omd::in_feasible_set(ball, omd::default_start(ball)));
    const auto simplex = omd::ProxSetup::entropy_simplex(n);
    CHECK(omd::in_feasible_set(simplex, omd::default_start(simplex)));
  }
}
