#pragma once

// Regularized p-energy functionals on P1 fields and a damped Newton
// minimizer over the free (non-Dirichlet) degrees of freedom.

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "robin/mesh.hpp"

namespace robin::detail {

/// Phi(u) = (grad_coeff/p)     sum_T |T| (|grad u|^2 + eps^2)^(p/2)
///        + (boundary_coeff/p) sum_e |e| sum_g w_g (u_g^2 + eps^2)^(p/2)
///        + (mass_coeff/p)     sum_T |T| sum_q w_q (u_q^2 + eps^2)^(p/2)
///        - linear . u
struct FunctionalTerms {
  double p = 2.0;
  double grad_coeff = 1.0;
  double boundary_coeff = 0.0;
  double mass_coeff = 0.0;
  double epsilon = 0.0;
  Eigen::VectorXd linear;  // full length, or empty
};

class PFunctional {
 public:
  /// `fixed` marks vertices held at their value in the full vector.
  PFunctional(const Mesh& mesh, FunctionalTerms terms, std::vector<bool> fixed);

  Eigen::Index num_free() const { return static_cast<Eigen::Index>(free_.size()); }
  const std::vector<int>& free_dofs() const { return free_; }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
  /// Writes reduced values into a copy of `base` (which supplies fixed values).
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced, const Eigen::VectorXd& base) const;

  double value(const Eigen::VectorXd& full) const;
  /// Reduced gradient and (optionally) reduced Hessian.
  void gradient_hessian(const Eigen::VectorXd& full, Eigen::VectorXd& grad,
                        Eigen::SparseMatrix<double>* hess) const;

  FunctionalTerms& terms() { return terms_; }
  const FunctionalTerms& terms() const { return terms_; }

 private:
  const Mesh& mesh_;
  FunctionalTerms terms_;
  std::vector<int> free_;
  std::vector<int> reduced_index_;  // -1 for fixed
};

struct NewtonOptions {
  int max_iterations = 60;
  double gradient_tol = 1e-11;  // relative to reference_norm
  double reference_norm = 1.0;
};

struct NewtonResult {
  Eigen::VectorXd full;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// Damped Newton with Armijo backtracking. Indefinite Hessians are shifted
/// towards the identity until the LDL^T factorization has positive pivots.
NewtonResult minimize(const PFunctional& functional, Eigen::VectorXd start_full,
                      const NewtonOptions& options);

}  // namespace robin::detail
