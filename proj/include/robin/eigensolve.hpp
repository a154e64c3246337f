#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "robin/fem.hpp"
#include "robin/mesh.hpp"

namespace robin {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tol = 1e-10;            // relative eigenvalue change
  int max_outer = 2000;
  int max_inner = 80;            // Newton iterations per inner solve
  double epsilon_reg = 1e-10;    // final gradient regularization
  std::uint64_t seed = 20240607; // initial-guess perturbation
  double residual_tol = 1e-6;    // relative weak residual at convergence
  /// For beta < 0 the solve aborts once lambda < floor_ratio * beta * P / |Omega|.
  double negative_floor_ratio = 10.0;

  void validate() const;
};

struct EigenResult {
  double lambda = 0.0;
  ScalarField eigenfunction;  // nonnegative, integral of u^p equal to 1
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // lambda per outer iteration
};

/// Normal flux values V.nu at the boundary quadrature points (3 per edge,
/// edge-major, as fem::boundary_point_values).
using BoundaryFlux = Eigen::VectorXd;

struct RobinSolveResult {
  ScalarField u_f;
  double j_value = 0.0;  // integral of f u_f
  /// Boundary integral of |flux|^p' with the flux taken from the Robin
  /// condition, flux = beta |u|^(p-2) u at the boundary quadrature points.
  double flux_pprime_norm = 0.0;
  /// Same quantity with the flux recovered from the constant gradient of the
  /// triangle adjacent to each boundary edge.
  double flux_pprime_norm_recovered = 0.0;
  BoundaryFlux boundary_flux;  // Robin-condition flux
  double energy = 0.0;         // integral of |grad u_f|^p
  double boundary_term = 0.0;  // integral over the boundary of |u_f|^p
  bool converged = false;
};

struct NeumannFluxResult {
  ScalarField v;                // zero boundary mean
  double flux_constant = 0.0;   // |grad v|^(p-2) dv/dnu = -(1/P) integral of f
  double trace_constant = 0.0;  // K = ((1/P) integral of f)^(1/(p-1))
  double energy = 0.0;          // integral of |grad v|^p
  bool converged = false;
};

struct DirichletSourceResult {
  ScalarField u;
  double work = 0.0;    // integral of f u
  double energy = 0.0;  // integral of |grad u|^p
  bool converged = false;
};

struct TorsionResult {
  double value = 0.0;           // integral of u
  double energy = 0.0;          // integral of |grad u|^p
  double relative_gap = 0.0;    // |value - energy| / value
  ScalarField u;
  bool converged = false;
};

/// First Robin eigenpair of the p-Laplacian. beta = 0 returns the constant
/// eigenfunction with lambda = 0. Negative beta is supported while the
/// quotient stays above the configured floor (SolverError otherwise).
EigenResult robin_eigenvalue(const Mesh& mesh, double p, double beta, const SolverOptions& opts = {});
/// First Dirichlet eigenpair (boundary vertices held at zero).
EigenResult dirichlet_eigenvalue(const Mesh& mesh, double p, const SolverOptions& opts = {});

/// -Delta_p u = f with |grad u|^(p-2) du/dnu + beta |u|^(p-2) u = 0.
RobinSolveResult robin_source_solve(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                    const SolverOptions& opts = {});
/// -Delta_p v = f with constant outward flux -(1/P) integral of f and zero
/// boundary mean.
NeumannFluxResult neumann_flux_solve(const Mesh& mesh, double p, const ScalarField& f,
                                     const SolverOptions& opts = {});
/// -Delta_p u = f with u = 0 on the boundary.
DirichletSourceResult dirichlet_source_solve(const Mesh& mesh, double p, const ScalarField& f,
                                             const SolverOptions& opts = {});
/// p-torsional rigidity: integral of u for -Delta_p u = 1, u = 0 on the boundary.
TorsionResult torsion(const Mesh& mesh, double p, const SolverOptions& opts = {});

/// Flux V.nu at boundary quadrature points, V piecewise constant per triangle.
BoundaryFlux normal_flux(const Mesh& mesh, const VectorField& V);
/// |grad u|^(p-2) grad u per triangle.
VectorField p_flux(const Mesh& mesh, const ScalarField& u, double p);

}  // namespace robin
