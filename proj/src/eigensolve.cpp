#include "robin/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "pfunctional.hpp"

namespace robin {

using detail::FunctionalTerms;
using detail::PFunctional;

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("iteration caps must be >= 1");
  if (!(epsilon_reg >= 0.0)) throw std::invalid_argument("epsilon_reg must be nonnegative");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be positive");
}

namespace {

constexpr double kEpsilonStart = 1e-2;

std::vector<bool> boundary_mask(const Mesh& mesh) {
  std::vector<bool> mask(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) mask[i] = mesh.is_boundary_vertex(i);
  return mask;
}

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) a += mesh.triangle_area(t);
  return a;
}

double total_perimeter(const Mesh& mesh) {
  double s = 0.0;
  for (const auto& e : mesh.boundary_edges()) s += e.length;
  return s;
}

// b_i = boundary integral of phi_i.
Eigen::VectorXd boundary_load(const Mesh& mesh) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (const auto& e : mesh.boundary_edges()) {
    b[e.v[0]] += 0.5 * e.length;
    b[e.v[1]] += 0.5 * e.length;
  }
  return b;
}

// m_i = integral of |u|^(p-2) u phi_i with the volume quadrature.
Eigen::VectorXd mass_gradient(const Mesh& mesh, const ScalarField& u, double p) {
  const auto& rule = fem::triangle_rule();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(u.size());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.triangle_area(t);
    for (int q = 0; q < 6; ++q) {
      const auto& bc = rule.points[q];
      const double v = bc[0] * u[tri[0]] + bc[1] * u[tri[1]] + bc[2] * u[tri[2]];
      const double w = area * rule.weights[q] * std::copysign(std::pow(std::abs(v), p - 1.0), v);
      for (int i = 0; i < 3; ++i) m[tri[i]] += w * bc[i];
    }
  }
  return m;
}

SparseMatrix restrict_matrix(const SparseMatrix& a, const std::vector<int>& reduced_index, Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int r = reduced_index[static_cast<std::size_t>(it.row())];
      const int c = reduced_index[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

ScalarField initial_guess(const Mesh& mesh, const std::vector<bool>& fixed, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField u(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const double r = dist(rng);
    u[static_cast<Eigen::Index>(i)] = (!fixed.empty() && fixed[i]) ? 0.0 : 1.0 + 1e-3 * r;
  }
  return u;
}

void normalize(const Mesh& mesh, ScalarField& u, double p) {
  const double mass = fem::volume_p_integral(mesh, u, p);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw SolverError("eigen iteration collapsed to zero");
  u /= std::pow(mass, 1.0 / p);
  if (fem::integral(mesh, u) < 0.0) u = -u;
}

// Clamps round-off negatives of a first eigenfunction and renormalizes.
void finalize_eigenfunction(const Mesh& mesh, EigenResult& r, double p, double beta) {
  const double scale = r.eigenfunction.cwiseAbs().maxCoeff();
  for (auto& v : r.eigenfunction)
    if (v < 0.0 && v >= -1e-10 * scale) v = 0.0;
  normalize(mesh, r.eigenfunction, p);
  r.lambda = fem::rayleigh_quotient(mesh, r.eigenfunction, p, beta);
}

struct EigenProblem {
  const Mesh& mesh;
  double p;
  double beta;
  std::vector<bool> fixed;
  const SolverOptions& opts;
  double floor = -std::numeric_limits<double>::infinity();
};

void check_floor(const EigenProblem& prob, double lambda) {
  if (lambda < prob.floor)
    throw SolverError("Robin quotient fell below the floor " + std::to_string(prob.floor) +
                      " (beta too negative for a reliable discrete eigenvalue)");
}

bool converged_step(double lambda, double previous, double residual, const SolverOptions& opts) {
  return std::abs(lambda - previous) <= opts.tol * std::max(std::abs(previous), 1.0) &&
         residual <= opts.residual_tol;
}

// Shifted inverse iteration on the linear pencil (K + beta B + s M, M).
EigenResult inverse_power_linear(const EigenProblem& prob, double shift) {
  const Mesh& mesh = prob.mesh;
  PFunctional layout(mesh, FunctionalTerms{}, prob.fixed);
  std::vector<int> reduced_index(mesh.num_vertices(), -1);
  for (std::size_t k = 0; k < layout.free_dofs().size(); ++k)
    reduced_index[static_cast<std::size_t>(layout.free_dofs()[k])] = static_cast<int>(k);
  const Eigen::Index n = layout.num_free();
  if (n == 0) throw SolverError("mesh has no free degrees of freedom");

  SparseMatrix a_full = fem::stiffness_matrix(mesh);
  if (prob.beta != 0.0) a_full += prob.beta * fem::boundary_mass_matrix(mesh);
  const SparseMatrix a = restrict_matrix(a_full, reduced_index, n);
  const SparseMatrix m = restrict_matrix(fem::mass_matrix(mesh), reduced_index, n);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  ldlt.analyzePattern(a);
  for (int attempt = 0;; ++attempt) {
    ldlt.factorize(a + shift * m);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) break;
    if (attempt > 60) throw SolverError("could not find a positive definite shift");
    shift = std::max(2.0 * shift, 1.0);
  }

  ScalarField full = initial_guess(mesh, prob.fixed, prob.opts.seed);
  Eigen::VectorXd u = layout.restrict(full);
  u /= std::sqrt(u.dot(m * u));
  EigenResult res;
  double lambda = u.dot(a * u);
  for (int k = 1; k <= prob.opts.max_outer; ++k) {
    Eigen::VectorXd y = ldlt.solve(m * u);
    y /= std::sqrt(y.dot(m * y));
    if (y.sum() < 0.0) y = -y;
    u = std::move(y);
    const Eigen::VectorXd au = a * u;
    const Eigen::VectorXd mu = m * u;
    const double next = u.dot(au);
    const double denom = std::max(std::abs(next) * mu.norm(), au.norm());
    res.residual = denom > 0.0 ? (au - next * mu).norm() / denom : 0.0;
    res.trace.push_back(next);
    res.iterations = k;
    check_floor(prob, next);
    const double prev = lambda;
    lambda = next;
    if (converged_step(lambda, prev, res.residual, prob.opts)) {
      res.converged = true;
      break;
    }
  }
  res.eigenfunction = layout.expand(u, ScalarField::Zero(static_cast<Eigen::Index>(mesh.num_vertices())));
  normalize(mesh, res.eigenfunction, prob.p);
  res.lambda = lambda;
  return res;
}

// Nonlinear inverse power: u_{k+1} minimizes
// (1/p)(E + beta B + s M)(u) - (lambda_k + s) <m(u_k), u>, then is renormalized.
EigenResult inverse_power_nonlinear(const EigenProblem& prob, double shift) {
  const Mesh& mesh = prob.mesh;
  const double p = prob.p;
  FunctionalTerms terms;
  terms.p = p;
  terms.boundary_coeff = prob.beta;
  terms.mass_coeff = shift;
  PFunctional inner(mesh, terms, prob.fixed);

  FunctionalTerms rterms;
  rterms.p = p;
  rterms.boundary_coeff = prob.beta;
  rterms.epsilon = prob.opts.epsilon_reg;
  PFunctional residual_fn(mesh, rterms, prob.fixed);

  ScalarField u = initial_guess(mesh, prob.fixed, prob.opts.seed);
  normalize(mesh, u, p);
  double lambda = fem::rayleigh_quotient(mesh, u, p, prob.beta);
  double eps = kEpsilonStart;
  EigenResult res;
  for (int k = 1; k <= prob.opts.max_outer; ++k) {
    const bool final_eps = eps <= prob.opts.epsilon_reg;
    inner.terms().epsilon = std::max(eps, prob.opts.epsilon_reg);
    inner.terms().linear = (lambda + shift) * mass_gradient(mesh, u, p);
    detail::NewtonOptions nopts;
    nopts.max_iterations = prob.opts.max_inner;
    nopts.reference_norm = inner.restrict(inner.terms().linear).norm();
    auto step = detail::minimize(inner, u, nopts);
    u = std::move(step.full);
    normalize(mesh, u, p);
    const double next = fem::rayleigh_quotient(mesh, u, p, prob.beta);

    residual_fn.terms().linear = next * mass_gradient(mesh, u, p);
    Eigen::VectorXd r;
    residual_fn.gradient_hessian(u, r, nullptr);
    const double ref = residual_fn.restrict(residual_fn.terms().linear).norm();
    res.residual = ref > 0.0 ? r.norm() / ref : r.norm();
    res.trace.push_back(next);
    res.iterations = k;
    check_floor(prob, next);
    const double prev = lambda;
    lambda = next;
    if (final_eps && step.converged && converged_step(lambda, prev, res.residual, prob.opts)) {
      res.converged = true;
      break;
    }
    eps *= 0.1;
  }
  res.eigenfunction = std::move(u);
  res.lambda = lambda;
  return res;
}

EigenResult solve_eigen(const EigenProblem& prob, double shift) {
  EigenResult r = prob.p == 2.0 ? inverse_power_linear(prob, shift) : inverse_power_nonlinear(prob, shift);
  finalize_eigenfunction(prob.mesh, r, prob.p, prob.beta);
  return r;
}

// Initial guess for a p-homogeneous source problem: the p = 2 solution,
// scaled to minimize the p-functional along its ray.
ScalarField scaled_linear_start(const PFunctional& fn, const Mesh& mesh, const FunctionalTerms& terms,
                                const std::vector<bool>& fixed) {
  FunctionalTerms lin = terms;
  lin.p = 2.0;
  lin.epsilon = 0.0;
  PFunctional quad(mesh, lin, fixed);
  const ScalarField zero = ScalarField::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  detail::NewtonOptions nopts;
  nopts.reference_norm = quad.restrict(terms.linear).norm();
  ScalarField u2 = detail::minimize(quad, zero, nopts).full;
  // Phi(c u2) = c^p A / p - c L.u2  is minimized at c^(p-1) = L.u2 / A.
  const double p = terms.p;
  FunctionalTerms hom = terms;
  hom.epsilon = 0.0;
  hom.linear = Eigen::VectorXd();
  PFunctional homogeneous(mesh, hom, fixed);
  const double a = p * homogeneous.value(u2);
  const double l = terms.linear.dot(u2);
  (void)fn;
  if (!(a > 0.0) || !(l > 0.0)) return u2;
  return std::pow(l / a, 1.0 / (p - 1.0)) * u2;
}

detail::NewtonResult solve_source_problem(const Mesh& mesh, FunctionalTerms terms,
                                          const std::vector<bool>& fixed, const SolverOptions& opts) {
  PFunctional fn(mesh, terms, fixed);
  ScalarField u = scaled_linear_start(fn, mesh, terms, fixed);
  detail::NewtonOptions nopts;
  nopts.max_iterations = opts.max_inner;
  nopts.reference_norm = fn.restrict(terms.linear).norm();
  if (terms.p == 2.0) {
    fn.terms().epsilon = 0.0;
    return detail::minimize(fn, u, nopts);
  }
  detail::NewtonResult r;
  for (double eps = kEpsilonStart;; eps *= 0.1) {
    const bool last = eps <= opts.epsilon_reg;
    fn.terms().epsilon = last ? opts.epsilon_reg : eps;
    r = detail::minimize(fn, u, nopts);
    u = r.full;
    if (last) break;
  }
  return r;
}

void check_source(const Mesh& mesh, const ScalarField& f) {
  fem::check_field(mesh, f);
  if ((f.array() < 0.0).any()) throw std::invalid_argument("source has negative nodal values");
  if (!(f.array() > 0.0).any()) throw std::invalid_argument("zero source");
}

}  // namespace

EigenResult robin_eigenvalue(const Mesh& mesh, double p, double beta, const SolverOptions& opts) {
  fem::check_exponent(p);
  opts.validate();
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  if (beta == 0.0) {
    EigenResult r;
    r.eigenfunction = ScalarField::Ones(static_cast<Eigen::Index>(mesh.num_vertices()));
    normalize(mesh, r.eigenfunction, p);
    r.lambda = 0.0;
    r.converged = true;
    r.trace = {0.0};
    return r;
  }
  EigenProblem prob{mesh, p, beta, {}, opts};
  double shift = 0.0;
  if (beta < 0.0) {
    const double ratio = total_perimeter(mesh) / total_area(mesh);
    prob.floor = opts.negative_floor_ratio * beta * ratio;
    shift = 2.0 * std::abs(beta) * ratio;
  }
  return solve_eigen(prob, shift);
}

EigenResult dirichlet_eigenvalue(const Mesh& mesh, double p, const SolverOptions& opts) {
  fem::check_exponent(p);
  opts.validate();
  EigenProblem prob{mesh, p, 0.0, boundary_mask(mesh), opts};
  return solve_eigen(prob, 0.0);
}

RobinSolveResult robin_source_solve(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                    const SolverOptions& opts) {
  fem::check_exponent(p);
  opts.validate();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  check_source(mesh, f);
  FunctionalTerms terms;
  terms.p = p;
  terms.boundary_coeff = beta;
  terms.linear = fem::load_vector(mesh, f);
  const auto sol = solve_source_problem(mesh, terms, {}, opts);

  RobinSolveResult r;
  r.u_f = sol.full;
  r.converged = sol.converged;
  r.j_value = terms.linear.dot(r.u_f);
  r.energy = fem::p_dirichlet_energy(mesh, r.u_f, p);
  r.boundary_term = fem::boundary_p_norm(mesh, r.u_f, p);

  const double pp = p / (p - 1.0);
  const auto& rule = fem::edge_rule();
  const Eigen::VectorXd ub = fem::boundary_point_values(mesh, r.u_f);
  r.boundary_flux.resize(ub.size());
  for (Eigen::Index k = 0; k < ub.size(); ++k)
    r.boundary_flux[k] = beta * std::copysign(std::pow(std::abs(ub[k]), p - 1.0), ub[k]);
  const BoundaryFlux recovered = normal_flux(mesh, p_flux(mesh, r.u_f, p));
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (int g = 0; g < 3; ++g) {
      const auto k = static_cast<Eigen::Index>(3 * e + g);
      const double w = edges[e].length * rule.weights[g];
      r.flux_pprime_norm += w * std::pow(std::abs(r.boundary_flux[k]), pp);
      r.flux_pprime_norm_recovered += w * std::pow(std::abs(recovered[k]), pp);
    }
  }
  return r;
}

NeumannFluxResult neumann_flux_solve(const Mesh& mesh, double p, const ScalarField& f,
                                     const SolverOptions& opts) {
  fem::check_exponent(p);
  opts.validate();
  check_source(mesh, f);
  const double perimeter = total_perimeter(mesh);
  const Eigen::VectorXd load = fem::load_vector(mesh, f);
  const double mass = load.sum();  // integral of f
  const double flux = mass / perimeter;

  FunctionalTerms terms;
  terms.p = p;
  terms.linear = load - flux * boundary_load(mesh);
  // The functional is invariant under constants; pin one vertex.
  std::vector<bool> fixed(mesh.num_vertices(), false);
  fixed[0] = true;
  const auto sol = solve_source_problem(mesh, terms, fixed, opts);

  NeumannFluxResult r;
  r.v = sol.full;
  r.v.array() -= fem::boundary_integral(mesh, r.v) / perimeter;
  r.converged = sol.converged;
  r.flux_constant = -flux;
  r.trace_constant = std::pow(flux, 1.0 / (p - 1.0));
  r.energy = fem::p_dirichlet_energy(mesh, r.v, p);
  return r;
}

DirichletSourceResult dirichlet_source_solve(const Mesh& mesh, double p, const ScalarField& f,
                                             const SolverOptions& opts) {
  fem::check_exponent(p);
  opts.validate();
  check_source(mesh, f);
  FunctionalTerms terms;
  terms.p = p;
  terms.linear = fem::load_vector(mesh, f);
  const auto fixed = boundary_mask(mesh);
  if (std::none_of(fixed.begin(), fixed.end(), [](bool b) { return !b; }))
    throw SolverError("mesh has no interior vertices");
  const auto sol = solve_source_problem(mesh, terms, fixed, opts);
  DirichletSourceResult r;
  r.u = sol.full;
  r.converged = sol.converged;
  r.work = terms.linear.dot(r.u);
  r.energy = fem::p_dirichlet_energy(mesh, r.u, p);
  return r;
}

TorsionResult torsion(const Mesh& mesh, double p, const SolverOptions& opts) {
  const auto ones = ScalarField::Ones(static_cast<Eigen::Index>(mesh.num_vertices()));
  auto sol = dirichlet_source_solve(mesh, p, ones, opts);
  TorsionResult r;
  r.value = fem::integral(mesh, sol.u);
  r.energy = sol.energy;
  r.relative_gap = r.value != 0.0 ? std::abs(r.value - r.energy) / std::abs(r.value) : 0.0;
  r.u = std::move(sol.u);
  r.converged = sol.converged;
  return r;
}

VectorField p_flux(const Mesh& mesh, const ScalarField& u, double p) {
  VectorField g = fem::gradient(mesh, u);
  for (auto& v : g) {
    const double n = v.norm();
    v = n > 0.0 ? Vec2(std::pow(n, p - 2.0) * v) : Vec2::Zero();
  }
  return g;
}

BoundaryFlux normal_flux(const Mesh& mesh, const VectorField& V) {
  if (V.size() != mesh.num_triangles()) throw std::invalid_argument("vector field length mismatch");
  const auto& edges = mesh.boundary_edges();
  BoundaryFlux out(static_cast<Eigen::Index>(3 * edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double vn = V[static_cast<std::size_t>(edges[e].triangle)].dot(edges[e].normal);
    for (int g = 0; g < 3; ++g) out[static_cast<Eigen::Index>(3 * e + g)] = vn;
  }
  return out;
}

}  // namespace robin
