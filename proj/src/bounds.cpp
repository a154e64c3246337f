#include "robin/bounds.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "robin/fem.hpp"
#include "robin/radial.hpp"

namespace robin::bounds {

namespace {

BoundRecord upper(double bound, double lambda, double slack) {
  BoundRecord r;
  r.value = bound;
  r.margin = (bound - lambda) / bound;
  r.satisfied = r.margin >= -slack;
  return r;
}

BoundRecord lower(double bound, double lambda, double slack) {
  BoundRecord r;
  r.value = bound;
  r.lower = true;
  r.margin = (lambda - bound) / bound;
  r.satisfied = r.margin >= -slack;
  return r;
}

Vec2 centroid(const Mesh& mesh) {
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double at = mesh.triangle_area(t);
    c += at * (mesh.vertices()[tri[0]] + mesh.vertices()[tri[1]] + mesh.vertices()[tri[2]]) / 3.0;
    a += at;
  }
  return c / a;
}

double boundary_length(const Mesh& mesh) {
  double s = 0.0;
  for (const auto& e : mesh.boundary_edges()) s += e.length;
  return s;
}

}  // namespace

bool BoundsReport::all_satisfied() const {
  for (const auto& [name, b] : bounds)
    if (!b.satisfied) return false;
  for (const auto& c : certificates)
    if (!c.satisfied) return false;
  return true;
}

double dual_objective(const Mesh& mesh, double p, double beta, const VectorField& V, const BoundaryFlux& flux) {
  fem::check_exponent(p);
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (V.size() != mesh.num_triangles()) throw std::invalid_argument("vector field length mismatch");
  if (static_cast<std::size_t>(flux.size()) != fem::boundary_point_count(mesh))
    throw std::invalid_argument("boundary flux length mismatch");
  const double pp = p / (p - 1.0);
  double vol = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double n = V[t].norm();
    if (n > 0.0) vol += mesh.triangle_area(t) * std::pow(n, pp);
  }
  const auto& rule = fem::edge_rule();
  const auto& edges = mesh.boundary_edges();
  double bnd = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int g = 0; g < 3; ++g)
      bnd += edges[e].length * rule.weights[g] * std::pow(std::abs(flux[static_cast<Eigen::Index>(3 * e + g)]), pp);
  return vol + std::pow(beta, -1.0 / (p - 1.0)) * bnd;
}

BoundsReport evaluate_upper_bounds(const Mesh& mesh, double p, double beta, const EigenResult& eigen,
                                   const EigenResult& dirichlet, double torsion_value,
                                   const GeometryStats& stats, double slack) {
  fem::check_exponent(p);
  if (!(beta > 0.0)) throw std::invalid_argument("bounds need beta > 0");
  if (!(dirichlet.lambda > 0.0)) throw std::invalid_argument("missing prerequisite: Dirichlet eigenvalue");
  if (!(torsion_value > 0.0)) throw std::invalid_argument("missing prerequisite: torsional rigidity");
  if (eigen.eigenfunction.size() == 0) throw std::invalid_argument("missing prerequisite: Robin eigenpair");
  (void)mesh;

  BoundsReport rep;
  rep.p = p;
  rep.beta = beta;
  rep.lambda_robin = eigen.lambda;
  rep.lambda_dirichlet = dirichlet.lambda;
  rep.torsion_value = torsion_value;
  rep.slack_budget = slack;
  const double lam = eigen.lambda;
  const double e = 1.0 / (p - 1.0);
  const double area = stats.area, per = stats.perimeter;

  rep.kbar = radial::kbar(p, dirichlet.lambda, 2);
  // Choosing f = u_D^(p-1) leaves (int u^(p-1))^p' / int u^p >= 1 / kbar.
  const double rd = std::pow(dirichlet.lambda, -e) + std::pow(beta * per, -e) / rep.kbar;
  rep.bounds["upper_dirichlet"] = upper(std::pow(rd, -(p - 1.0)), lam, slack);
  const double rd_kbar = std::pow(dirichlet.lambda, -e) + rep.kbar * std::pow(beta * per, -e);
  rep.info["upper_dirichlet_kbar_multiplied"] = std::pow(rd_kbar, -(p - 1.0));

  const double rt = torsion_value / area + std::pow(area / (beta * per), e);
  rep.bounds["upper_torsion"] = upper(std::pow(rt, -(p - 1.0)), lam, slack);
  rep.bounds["trivial_min"] = upper(std::min(dirichlet.lambda, beta * per / area), lam, slack);
  if (p == 2.0 && stats.is_convex) {
    const double ratio = per / area;
    rep.bounds["polya_p2"] = upper(0.25 * std::numbers::pi * std::numbers::pi * ratio * ratio /
                                       (1.0 + 2.0 * ratio / beta),
                                   lam, slack);
  }
  if (stats.is_convex) rep.bounds["hersch"] = lower(radial::hersch_lower_bound(p, beta, stats.inradius), lam, slack);

  // Hersch uses the ordinary Euclidean inradius; recorded so reports say which one.
  rep.info["inradius_euclidean"] = stats.inradius;
  rep.info["polya_torsion_product"] = torsion_value * std::pow(dirichlet.lambda, e) / area;
  rep.info["reciprocal_lambda"] = 1.0 / lam;
  rep.info["reciprocal_lambda_root"] = std::pow(lam, -e);
  return rep;
}

CertificateRecord lower_bound_certificate(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                          const SolverOptions& opts, std::string f_id) {
  const auto neumann = neumann_flux_solve(mesh, p, f, opts);
  return lower_bound_certificate(mesh, p, beta, f, neumann, opts, std::move(f_id));
}

CertificateRecord lower_bound_certificate(const Mesh& mesh, double p, double beta, const ScalarField& f,
                                          const NeumannFluxResult& neumann, const SolverOptions& opts,
                                          std::string f_id) {
  const auto robin = robin_source_solve(mesh, p, beta, f, opts);
  CertificateRecord c;
  c.f_id = std::move(f_id);
  c.j_value = robin.j_value;
  c.energy_v = neumann.energy;
  const double mass = fem::integral(mesh, f);
  const double e = 1.0 / (p - 1.0);
  c.rhs = c.energy_v + std::pow(beta, -e) * std::pow(mass, p / (p - 1.0)) / std::pow(boundary_length(mesh), e);
  c.slack = c.rhs - c.j_value;
  c.satisfied = c.slack >= -1e-3 * std::abs(c.j_value);
  c.converged = robin.converged && neumann.converged;
  return c;
}

double nu_p_estimate(const Mesh& mesh, double p, const std::vector<ScalarField>& family, const SolverOptions& opts) {
  if (family.empty()) throw std::invalid_argument("empty source family");
  double best = std::numeric_limits<double>::infinity();
  const double pp = p / (p - 1.0);
  for (const auto& f : family) {
    const auto v = neumann_flux_solve(mesh, p, f, opts);
    if (!(v.energy > 0.0)) throw SolverError("constant-flux solve returned zero energy");
    best = std::min(best, fem::volume_p_integral(mesh, f, pp) / v.energy);
  }
  return best;
}

std::vector<std::pair<std::string, ScalarField>> default_source_family(const Mesh& mesh) {
  const auto stats = geometry_stats(mesh);
  const Vec2 c0 = centroid(mesh);
  const double rin = stats.inradius;
  const double rho = 0.6 * rin;
  const std::array<Vec2, 3> centres = {c0, c0 + 0.5 * rin * Vec2(1.0, 0.0), c0 + 0.5 * rin * Vec2(-0.5, 0.6)};
  std::vector<std::pair<std::string, ScalarField>> out;
  out.emplace_back("one", ScalarField::Ones(static_cast<Eigen::Index>(mesh.num_vertices())));
  for (std::size_t k = 0; k < centres.size(); ++k) {
    ScalarField f(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
      f[static_cast<Eigen::Index>(i)] =
          std::max(0.0, 1.0 - (mesh.vertices()[i] - centres[k]).squaredNorm() / (rho * rho));
    out.emplace_back("bump" + std::to_string(k + 1), std::move(f));
  }
  return out;
}

ConvexityRecord convexity_check(const Mesh& mesh, double p, const ScalarField& f, double alpha, double beta,
                                const SolverOptions& opts, double tolerance) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("alpha and beta must be positive");
  const auto sb = robin_source_solve(mesh, p, beta, f, opts);
  const auto sa = alpha == beta ? sb : robin_source_solve(mesh, p, alpha, f, opts);
  const double e = 1.0 / (p - 1.0);
  ConvexityRecord r;
  r.lhs = sb.j_value;
  r.rhs = sa.j_value + (std::pow(beta, -e) - std::pow(alpha, -e)) * sa.flux_pprime_norm;
  r.slack = r.rhs - r.lhs;
  r.satisfied = r.slack >= -tolerance * std::max(1.0, std::abs(r.lhs));
  return r;
}

double richardson_limit(double b1, double s1, double b2, double s2) {
  if (b1 == b2) throw std::invalid_argument("extrapolation needs distinct abscissae");
  return (b1 * s2 - b2 * s1) / (b1 - b2);
}

SlopeRecord limit_slope_beta0(const Mesh& mesh, double p, const std::vector<double>& beta_grid,
                              bool include_negative, const SolverOptions& opts) {
  if (beta_grid.size() < 2) throw std::invalid_argument("slope extrapolation needs at least two beta values");
  for (std::size_t k = 0; k < beta_grid.size(); ++k) {
    if (!(beta_grid[k] > 0.0 && beta_grid[k] <= 1.0)) throw std::invalid_argument("beta grid must lie in (0, 1]");
    if (k > 0 && !(beta_grid[k] < beta_grid[k - 1])) throw std::invalid_argument("beta grid must decrease");
  }
  const auto stats = geometry_stats(mesh);
  SlopeRecord rec;
  rec.betas = beta_grid;
  rec.target = stats.perimeter / stats.area;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto sweep = [&](double sign, std::vector<double>& slopes, std::vector<std::string>& errors) {
    for (double b : beta_grid) {
      try {
        const auto r = robin_eigenvalue(mesh, p, sign * b, opts);
        slopes.push_back(r.lambda / (sign * b));
        errors.emplace_back(r.converged ? "" : "not converged");
      } catch (const SolverError& ex) {
        slopes.push_back(nan);
        errors.emplace_back(ex.what());
      }
    }
    const std::size_t n = beta_grid.size();
    return richardson_limit(beta_grid[n - 2], slopes[n - 2], beta_grid[n - 1], slopes[n - 1]);
  };
  rec.limit_estimate = sweep(1.0, rec.slopes, rec.errors);
  if (include_negative) rec.negative_limit_estimate = sweep(-1.0, rec.negative_slopes, rec.negative_errors);
  return rec;
}

GapRecord beta_infinity_gap(const Mesh& mesh, double p, const std::vector<double>& beta_grid,
                            const SolverOptions& opts) {
  if (beta_grid.empty()) throw std::invalid_argument("empty beta grid");
  for (std::size_t k = 0; k < beta_grid.size(); ++k) {
    if (!(beta_grid[k] > 0.0)) throw std::invalid_argument("beta grid must be positive");
    if (k > 0 && !(beta_grid[k] > beta_grid[k - 1])) throw std::invalid_argument("beta grid must increase");
  }
  GapRecord rec;
  rec.betas = beta_grid;
  rec.lambda_dirichlet = dirichlet_eigenvalue(mesh, p, opts).lambda;
  for (double b : beta_grid) rec.gaps.push_back(rec.lambda_dirichlet - robin_eigenvalue(mesh, p, b, opts).lambda);
  rec.final_gap = rec.gaps.back();
  rec.monotone = true;
  for (std::size_t k = 1; k < rec.gaps.size(); ++k) rec.monotone = rec.monotone && rec.gaps[k] < rec.gaps[k - 1];
  const double tol = 1e-8 * rec.lambda_dirichlet;
  rec.nonnegative = true;
  for (double g : rec.gaps) rec.nonnegative = rec.nonnegative && g >= -tol;
  return rec;
}

}  // namespace robin::bounds

namespace robin::bounds {

void attach_nu_estimate(BoundsReport& report, double nu, const GeometryStats& stats) {
  const double e = 1.0 / (report.p - 1.0);
  report.info["nu_p_estimate"] = nu;
  report.info["nu_reciprocal_rhs"] = 1.0 / nu + std::pow(stats.area / (report.beta * stats.perimeter), e);
}

}  // namespace robin::bounds
