#include "omd/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace omd {

namespace {

// Entries this small are clamped before taking logs so grad h stays finite.
constexpr double kEntropyFloor = 1e-300;

void check_dim(const ProxSetup& setup, const Vec& x, const char* who) {
  if (x.size() != setup.dim) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(setup.dim) + ")");
  }
}

void check_finite(const Vec& x, const char* who) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite entry");
  }
}

void check_entropy_domain(const Vec& x, const char* who) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw std::domain_error(std::string(who) +
                              ": nonpositive entry at index " +
                              std::to_string(i));
    }
  }
}

double safe_log(double v) { return std::log(std::max(v, kEntropyFloor)); }

}  // namespace

ProxSetup ProxSetup::euclidean_ball(int n, double r) {
  if (n < 1) throw std::invalid_argument("ProxSetup: dimension must be >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("ProxSetup: radius must be > 0");
  return ProxSetup{ProxKind::EuclideanBall, n, r};
}

ProxSetup ProxSetup::entropy_simplex(int n) {
  if (n < 1) throw std::invalid_argument("ProxSetup: dimension must be >= 1");
  return ProxSetup{ProxKind::EntropySimplex, n, 0.0};
}

double h_value(const ProxSetup& setup, const Vec& x) {
  check_dim(setup, x, "h_value");
  check_finite(x, "h_value");
  switch (setup.kind) {
    case ProxKind::EuclideanBall:
      return 0.5 * x.squaredNorm();
    case ProxKind::EntropySimplex: {
      check_entropy_domain(x, "h_value");
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * safe_log(x[i]);
      return s;
    }
  }
  throw std::logic_error("h_value: unknown setup");
}

Vec grad_h(const ProxSetup& setup, const Vec& x) {
  check_dim(setup, x, "grad_h");
  check_finite(x, "grad_h");
  switch (setup.kind) {
    case ProxKind::EuclideanBall:
      return x;
    case ProxKind::EntropySimplex: {
      check_entropy_domain(x, "grad_h");
      Vec g(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = 1.0 + safe_log(x[i]);
      return g;
    }
  }
  throw std::logic_error("grad_h: unknown setup");
}

double bregman(const ProxSetup& setup, const Vec& y, const Vec& x) {
  check_dim(setup, y, "bregman");
  check_dim(setup, x, "bregman");
  if (setup.kind == ProxKind::EuclideanBall) {
    check_finite(y, "bregman");
    check_finite(x, "bregman");
    return 0.5 * (y - x).squaredNorm();
  }
  return h_value(setup, y) - h_value(setup, x) -
         grad_h(setup, x).dot(y - x);
}

Vec bregman_project(const ProxSetup& setup, const Vec& y) {
  check_dim(setup, y, "bregman_project");
  check_finite(y, "bregman_project");
  switch (setup.kind) {
    case ProxKind::EuclideanBall: {
      const double norm = y.norm();
      if (norm <= setup.radius) return y;
      return y * (setup.radius / norm);
    }
    case ProxKind::EntropySimplex: {
      check_entropy_domain(y, "bregman_project");
      return y / y.sum();
    }
  }
  throw std::logic_error("bregman_project: unknown setup");
}

Vec mirror_step(const ProxSetup& setup, const Vec& x, const Vec& direction,
                double eta) {
  check_dim(setup, x, "mirror_step");
  check_dim(setup, direction, "mirror_step");
  check_finite(x, "mirror_step");
  check_finite(direction, "mirror_step");
  if (!(eta > 0.0)) throw std::invalid_argument("mirror_step: eta must be > 0");

  switch (setup.kind) {
    case ProxKind::EuclideanBall:
      return bregman_project(setup, Vec(x - eta * direction));
    case ProxKind::EntropySimplex: {
      check_entropy_domain(x, "mirror_step");
      Vec z = eta * direction;
      if (!z.allFinite()) {
        throw StepError("mirror_step: exponent overflow on simplex",
                        direction.cwiseAbs().maxCoeff() * eta);
      }
      // Shift by the smallest exponent; the common factor cancels in the
      // normalization and keeps every exp() argument <= 0.
      const double zmin = z.minCoeff();
      Vec w(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        w[i] = x[i] * std::exp(-(z[i] - zmin));
      }
      const double s = w.sum();
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw StepError("mirror_step: degenerate normalizer on simplex",
                        z.cwiseAbs().maxCoeff());
      }
      return w / s;
    }
  }
  throw std::logic_error("mirror_step: unknown setup");
}

bool in_feasible_set(const ProxSetup& setup, const Vec& x, double tol) {
  if (x.size() != setup.dim || !x.allFinite()) return false;
  switch (setup.kind) {
    case ProxKind::EuclideanBall:
      return x.norm() <= setup.radius + tol;
    case ProxKind::EntropySimplex: {
      if (x.minCoeff() < -tol) return false;
      return std::abs(x.sum() - 1.0) <= tol;
    }
  }
  return false;
}

Vec default_start(const ProxSetup& setup) {
  switch (setup.kind) {
    case ProxKind::EuclideanBall: {
      const double norm = std::min(1.0, setup.radius);
      return Vec::Constant(setup.dim, norm / std::sqrt(double(setup.dim)));
    }
    case ProxKind::EntropySimplex:
      return Vec::Constant(setup.dim, 1.0 / double(setup.dim));
  }
  throw std::logic_error("default_start: unknown setup");
}

}  // namespace omd
