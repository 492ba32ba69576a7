#ifndef OMD_GEOMETRY_HPP
#define OMD_GEOMETRY_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace omd {

using Vec = Eigen::VectorXd;

// Proximal setups. h is the distance-generating function of the geometry;
// V(y,x) = h(y) - h(x) - <grad h(x), y - x> is the induced Bregman divergence.
//
//  EuclideanBall:  h(x) = 0.5*||x||^2,        Q = { ||x||_2 <= radius }
//  EntropySimplex: h(x) = sum_i x_i ln x_i,   Q = probability simplex
enum class ProxKind { EuclideanBall, EntropySimplex };

struct ProxSetup {
  ProxKind kind = ProxKind::EuclideanBall;
  int dim = 1;
  double radius = 1.0;  // EuclideanBall only

  static ProxSetup euclidean_ball(int n, double r = 1.0);
  static ProxSetup entropy_simplex(int n);
};

// Thrown when a mirror step cannot be evaluated (non-finite exponent /
// degenerate normalizer on the simplex). Carries the offending magnitude.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, double magnitude)
      : std::runtime_error(what), magnitude_(magnitude) {}
  double magnitude() const { return magnitude_; }

 private:
  double magnitude_;
};

double h_value(const ProxSetup& setup, const Vec& x);
Vec grad_h(const ProxSetup& setup, const Vec& x);

// V(y,x); nonnegative for y, x in the domain of h.
double bregman(const ProxSetup& setup, const Vec& y, const Vec& x);

// argmin_{z in Q} V(z, y). Closed forms: radial scaling onto the ball,
// normalization onto the simplex.
Vec bregman_project(const ProxSetup& setup, const Vec& y);

// Solves grad h(y) = grad h(x) - eta * direction, then projects y onto Q.
// Ball: euclidean projection of x - eta*direction. Simplex: multiplicative
// update x_i * exp(-eta * d_i), renormalized.
Vec mirror_step(const ProxSetup& setup, const Vec& x, const Vec& direction,
                double eta);

bool in_feasible_set(const ProxSetup& setup, const Vec& x, double tol = 1e-12);

// Common starting point: (1/sqrt(n),...) on the ball, uniform on the simplex.
Vec default_start(const ProxSetup& setup);

}  // namespace omd

#endif  // OMD_GEOMETRY_HPP
