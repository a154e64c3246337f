#pragma once

#include <map>
#include <stdexcept>
#include <vector>

namespace robin::radial {

class ShootingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First Dirichlet eigenpair of the p-Laplacian on the N-ball of radius R,
/// normalized by v(0) = 1.
struct RadialEigen {
  int dimension = 2;
  double p = 2.0;
  double radius = 1.0;
  double lambda = 0.0;
  std::vector<double> r;        // uniform grid on [0, R]
  std::vector<double> profile;  // v(r_i)
  std::map<double, double> norms;  // q -> ||v||_q over the ball

  /// Throws std::out_of_range if q was not requested when solving.
  double norm(double q) const;
};

/// 2 pi / (p sin(pi / p)).
double pi_p(double p);

/// Surface measure of the unit sphere in R^N.
double sphere_measure(int N);

/// Shooting from the origin with lambda-bisection. Norms are filled for
/// q in {1, p - 1, p} and every entry of `extra_exponents`.
RadialEigen ball_dirichlet_eigen(double p, int N, double R, const std::vector<double>& extra_exponents = {},
                                 int profile_points = 201);

/// ||v||_r / ||v||_q for the ball whose first Dirichlet eigenvalue equals
/// lambda_target. Requires 0 < q <= r.
double reverse_holder_constant(double p, double q, double r, double lambda_target, int N);

/// ||v||_p^p / ||v||_{p-1}^p, i.e. reverse_holder_constant(p, p - 1, p, ...)^p.
double kbar(double p, double lambda_target, int N);

/// (p - 1) (pi_p / 2)^p / (R + (pi_p / 2) beta^(-1/(p-1)))^p.
double hersch_lower_bound(double p, double beta, double inradius);

}  // namespace robin::radial
