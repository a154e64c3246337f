#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "robin/mesh.hpp"

namespace robin {

/// Nodal values of a P1 field, one per mesh vertex.
using ScalarField = Eigen::VectorXd;
/// One vector per triangle (piecewise constant), e.g. the gradient of a P1 field.
using VectorField = std::vector<Vec2>;
using SparseMatrix = Eigen::SparseMatrix<double>;

namespace fem {

inline constexpr double kMinExponent = 1.1;
inline constexpr double kMaxExponent = 10.0;

/// Throws std::invalid_argument unless p lies in the supported range [1.1, 10].
void check_exponent(double p);

// Quadrature rules. Triangle points are barycentric weights of the three
// vertices; triangle weights sum to 1 (multiply by the area).
struct TriangleRule {
  std::array<std::array<double, 3>, 6> points;
  std::array<double, 6> weights;
};
/// Six-point rule, exact for polynomials of degree 4.
const TriangleRule& triangle_rule();

struct EdgeRule {
  std::array<double, 3> points;  // parameter along the edge in [0, 1]
  std::array<double, 3> weights;  // sum to 1 (multiply by the length)
};
/// Three-point Gauss-Legendre rule, exact for degree 5.
const EdgeRule& edge_rule();

/// Number of boundary quadrature points (3 per boundary edge).
inline std::size_t boundary_point_count(const Mesh& mesh) { return 3 * mesh.boundary_edges().size(); }

/// Values of u at the boundary quadrature points, edge-major.
Eigen::VectorXd boundary_point_values(const Mesh& mesh, const ScalarField& u);

void check_field(const Mesh& mesh, const ScalarField& u);

/// Sum over triangles of area * |grad u|^p. Exact for P1 fields.
double p_dirichlet_energy(const Mesh& mesh, const ScalarField& u, double p);
/// Integral of |u|^p over the boundary.
double boundary_p_norm(const Mesh& mesh, const ScalarField& u, double p);
/// Integral of |u|^q over the domain.
double volume_p_integral(const Mesh& mesh, const ScalarField& u, double q);
/// (integral of |u|^q)^(1/q). Accepts any q > 0.
double lp_norm(const Mesh& mesh, const ScalarField& u, double q);
/// (energy + beta * boundary term) / integral of |u|^p. Throws on a zero field.
double rayleigh_quotient(const Mesh& mesh, const ScalarField& u, double p, double beta);

double integral(const Mesh& mesh, const ScalarField& u);
double boundary_integral(const Mesh& mesh, const ScalarField& u);

/// Per-triangle gradient of a P1 field.
VectorField gradient(const Mesh& mesh, const ScalarField& u);

/// Consistent P1 mass matrix.
SparseMatrix mass_matrix(const Mesh& mesh);
/// P1 stiffness (Laplacian) matrix.
SparseMatrix stiffness_matrix(const Mesh& mesh);
/// Boundary mass matrix: integral over the boundary of phi_i phi_j.
SparseMatrix boundary_mass_matrix(const Mesh& mesh);

/// Load vector F_i = integral of f phi_i, for a P1 source f.
Eigen::VectorXd load_vector(const Mesh& mesh, const ScalarField& f);

}  // namespace fem
}  // namespace robin
