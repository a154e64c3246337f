#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "robin/eigensolve.hpp"
#include "robin/mesh.hpp"

namespace robin::bounds {

inline constexpr double kDefaultSlack = 0.02;

struct BoundRecord {
  double value = 0.0;
  bool satisfied = false;
  /// Relative slack: (bound - lambda) / bound for upper bounds,
  /// (lambda - bound) / bound for lower bounds.
  double margin = 0.0;
  bool lower = false;
};

struct CertificateRecord {
  std::string f_id;
  double j_value = 0.0;
  double energy_v = 0.0;  // integral of |grad v|^p for the constant-flux solve
  double rhs = 0.0;       // energy_v + beta^(-1/(p-1)) (int f)^p' / P^(1/(p-1))
  double slack = 0.0;     // rhs - j_value
  bool satisfied = false;
  bool converged = false;
};

struct BoundsReport {
  std::string domain;
  double p = 2.0;
  double beta = 0.0;
  double lambda_robin = 0.0;
  double lambda_dirichlet = 0.0;
  double torsion_value = 0.0;
  double kbar = 0.0;
  double slack_budget = kDefaultSlack;
  std::map<std::string, BoundRecord> bounds;
  std::vector<CertificateRecord> certificates;
  /// Derived quantities that are reported but never asserted.
  std::map<std::string, double> info;

  bool all_satisfied() const;
};

/// Integral of |V|^p' plus beta^(-1/(p-1)) times the boundary integral of
/// |flux|^p' (flux given at the boundary quadrature points).
double dual_objective(const Mesh& mesh, double p, double beta, const VectorField& V, const BoundaryFlux& flux);

/// Fills upper_dirichlet, upper_torsion, trivial_min, polya_p2 (p = 2 and
/// convex) and hersch (convex) for the computed eigenvalue.
BoundsReport evaluate_upper_bounds(const Mesh& mesh, double p, double beta, const EigenResult& eigen,
                                   const EigenResult& dirichlet, double torsion_value,
                                   const GeometryStats& stats, double slack = kDefaultSlack);

/// Checks J_f(beta) against the constant-flux comparison value.
CertificateRecord lower_bound_certificate(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                          const SolverOptions& opts = {}, std::string f_id = "f");
/// Same, reusing a constant-flux solve for f.
CertificateRecord lower_bound_certificate(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                          const NeumannFluxResult& neumann, const SolverOptions& opts = {},
                                          std::string f_id = "f");

/// min over the family of int f^p' / int |grad v_f|^p. An upper bound for nu_p.
double nu_p_estimate(const Mesh& mesh, double p, const std::vector<ScalarField>& family,
                     const SolverOptions& opts = {});

/// Records the family estimate of nu_p and the right-hand side
/// 1/nu + (|Omega| / (beta P))^(1/(p-1)) next to both reciprocal forms of lambda.
/// Informational only: nu is an upper estimate, so nothing is asserted.
void attach_nu_estimate(BoundsReport& report, double nu, const GeometryStats& stats);

/// f = 1 and three bumps of radius 0.6 * inradius around interior points.
std::vector<std::pair<std::string, ScalarField>> default_source_family(const Mesh& mesh);

struct ConvexityRecord {
  double lhs = 0.0;  // J_f(beta)
  double rhs = 0.0;  // J_f(alpha) + (beta^(-1/(p-1)) - alpha^(-1/(p-1))) H(alpha)
  double slack = 0.0;
  bool satisfied = false;
};

ConvexityRecord convexity_check(const Mesh& mesh, double p, const ScalarField& f, double alpha, double beta,
                                const SolverOptions& opts = {}, double tolerance = 1e-6);

struct SlopeRecord {
  std::vector<double> betas;
  std::vector<double> slopes;  // lambda(beta) / beta, NaN where the solve failed
  std::vector<std::string> errors;
  double limit_estimate = 0.0;
  /// Same for -beta when negative values were requested (empty otherwise).
  std::vector<double> negative_slopes;
  std::vector<std::string> negative_errors;
  double negative_limit_estimate = 0.0;
  double target = 0.0;  // P / |Omega|
};

/// Grid values must lie in (0, 1] and decrease.
SlopeRecord limit_slope_beta0(const Mesh& mesh, double p, const std::vector<double>& beta_grid,
                              bool include_negative, const SolverOptions& opts = {});

struct GapRecord {
  std::vector<double> betas;
  std::vector<double> gaps;  // lambda_D - lambda(beta)
  double lambda_dirichlet = 0.0;
  double final_gap = 0.0;
  bool monotone = false;  // strictly decreasing
  bool nonnegative = false;
};

GapRecord beta_infinity_gap(const Mesh& mesh, double p, const std::vector<double>& beta_grid,
                            const SolverOptions& opts = {});

/// Extrapolates s(beta) linearly to beta = 0 from two samples.
double richardson_limit(double b1, double s1, double b2, double s2);

}  // namespace robin::bounds
