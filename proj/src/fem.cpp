#include "robin/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace robin::fem {

void check_exponent(double p) {
  if (!(p >= kMinExponent && p <= kMaxExponent))
    throw std::invalid_argument("exponent p=" + std::to_string(p) + " outside supported range [1.1, 10]");
}

const TriangleRule& triangle_rule() {
  static const TriangleRule rule = [] {
    constexpr double a1 = 0.445948490915965, b1 = 0.108103018168070, w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771, b2 = 0.816847572980459, w2 = 0.109951743655322;
    TriangleRule r;
    r.points = {{{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1}, {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

const EdgeRule& edge_rule() {
  static const EdgeRule rule = [] {
    const double d = std::sqrt(0.15);
    return EdgeRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

void check_field(const Mesh& mesh, const ScalarField& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.num_vertices())
    throw std::invalid_argument("field length does not match vertex count");
  if (!u.allFinite()) throw std::invalid_argument("field has non-finite values");
}

Eigen::VectorXd boundary_point_values(const Mesh& mesh, const ScalarField& u) {
  const auto& rule = edge_rule();
  const auto& edges = mesh.boundary_edges();
  Eigen::VectorXd out(static_cast<Eigen::Index>(3 * edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double ua = u[edges[e].v[0]], ub = u[edges[e].v[1]];
    for (int g = 0; g < 3; ++g)
      out[static_cast<Eigen::Index>(3 * e + g)] = (1.0 - rule.points[g]) * ua + rule.points[g] * ub;
  }
  return out;
}

double p_dirichlet_energy(const Mesh& mesh, const ScalarField& u, double p) {
  check_exponent(p);
  check_field(mesh, u);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Vec2 g = mesh.basis_gradients(t) * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
    const double n = g.norm();
    if (n > 0.0) sum += mesh.triangle_area(t) * std::pow(n, p);
  }
  return sum;
}

double boundary_p_norm(const Mesh& mesh, const ScalarField& u, double p) {
  check_exponent(p);
  check_field(mesh, u);
  const auto& rule = edge_rule();
  double sum = 0.0;
  for (const auto& e : mesh.boundary_edges()) {
    const double ua = u[e.v[0]], ub = u[e.v[1]];
    double s = 0.0;
    for (int g = 0; g < 3; ++g)
      s += rule.weights[g] * std::pow(std::abs((1.0 - rule.points[g]) * ua + rule.points[g] * ub), p);
    sum += e.length * s;
  }
  return sum;
}

double volume_p_integral(const Mesh& mesh, const ScalarField& u, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("exponent q must be positive");
  check_field(mesh, u);
  const auto& rule = triangle_rule();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    double s = 0.0;
    for (int k = 0; k < 6; ++k) {
      const auto& b = rule.points[k];
      const double v = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
      s += rule.weights[k] * std::pow(std::abs(v), q);
    }
    sum += mesh.triangle_area(t) * s;
  }
  return sum;
}

double lp_norm(const Mesh& mesh, const ScalarField& u, double q) {
  return std::pow(volume_p_integral(mesh, u, q), 1.0 / q);
}

double rayleigh_quotient(const Mesh& mesh, const ScalarField& u, double p, double beta) {
  const double mass = volume_p_integral(mesh, u, p);
  if (!(mass > 0.0)) throw std::invalid_argument("Rayleigh quotient of a zero field");
  double num = p_dirichlet_energy(mesh, u, p);
  if (beta != 0.0) num += beta * boundary_p_norm(mesh, u, p);
  return num / mass;
}

double integral(const Mesh& mesh, const ScalarField& u) {
  check_field(mesh, u);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    sum += mesh.triangle_area(t) * (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
  }
  return sum;
}

double boundary_integral(const Mesh& mesh, const ScalarField& u) {
  check_field(mesh, u);
  double sum = 0.0;
  for (const auto& e : mesh.boundary_edges()) sum += 0.5 * e.length * (u[e.v[0]] + u[e.v[1]]);
  return sum;
}

VectorField gradient(const Mesh& mesh, const ScalarField& u) {
  check_field(mesh, u);
  VectorField g(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    g[t] = mesh.basis_gradients(t) * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
  }
  return g;
}

SparseMatrix mass_matrix(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double a = mesh.triangle_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], a * (i == j ? 2.0 : 1.0) / 12.0);
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix stiffness_matrix(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix3d k = mesh.triangle_area(t) * mesh.basis_gradients(t).transpose() *
                              mesh.basis_gradients(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], k(i, j));
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix boundary_mass_matrix(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : mesh.boundary_edges()) {
    const double l = e.length;
    trip.emplace_back(e.v[0], e.v[0], l / 3.0);
    trip.emplace_back(e.v[1], e.v[1], l / 3.0);
    trip.emplace_back(e.v[0], e.v[1], l / 6.0);
    trip.emplace_back(e.v[1], e.v[0], l / 6.0);
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::VectorXd load_vector(const Mesh& mesh, const ScalarField& f) {
  check_field(mesh, f);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double a = mesh.triangle_area(t) / 12.0;
    const double s = f[tri[0]] + f[tri[1]] + f[tri[2]];
    for (int i = 0; i < 3; ++i) out[tri[i]] += a * (s + f[tri[i]]);
  }
  return out;
}

}  // namespace robin::fem
