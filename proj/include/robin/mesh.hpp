#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace robin {

using Vec2 = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Domain shapes. Curved shapes are centred at the origin.
struct Disk {
  double radius = 1.0;
};
struct Square {
  double side = 1.0;
};
struct Rectangle {
  double width = 1.0;
  double height = 1.0;
};
struct Ellipse {
  double a = 1.0;  // semi-axis along x
  double b = 1.0;  // semi-axis along y
};
struct Polygon {
  std::vector<Vec2> vertices;
};
struct MeshFile {
  std::string path;
};

using Shape = std::variant<Disk, Square, Rectangle, Ellipse, Polygon, MeshFile>;

struct DomainSpec {
  Shape shape;
  double target_h = 0.1;

  /// Parses `disk:R`, `square:s`, `rectangle:w:h`, `ellipse:a:b`,
  /// `hexagon:R` (regular, circumradius R), `polygon:x0,y0;x1,y1;...`
  /// and `file:path`. Throws std::invalid_argument on malformed input.
  static DomainSpec parse(std::string_view text, double target_h);

  /// Canonical text form; parse(id()) reproduces the shape.
  std::string id() const;
};

struct BoundaryEdge {
  std::array<int, 2> v;  // oriented so the domain lies to the left
  Vec2 normal;           // outward unit normal
  double length = 0.0;
  int triangle = -1;     // the unique triangle containing the edge
};

/// Planar P1 triangulation. Immutable after construction; all derived
/// geometric data (areas, basis gradients, outward normals) is computed once.
class Mesh {
 public:
  /// Builds and validates a mesh. Clockwise triangles are reoriented.
  /// The boundary is derived from the topology (edges in exactly one
  /// triangle); throws MeshError on degenerate triangles, non-manifold
  /// edges, or boundary loops that do not close.
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       std::optional<Ellipse> curve = std::nullopt);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  /// Boundary edge indices grouped into closed loops, in traversal order.
  const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }
  const std::optional<Ellipse>& curve() const { return curve_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  double triangle_area(std::size_t t) const { return areas_[t]; }
  /// Columns are the constant gradients of the three barycentric basis
  /// functions of triangle t.
  const Eigen::Matrix<double, 2, 3>& basis_gradients(std::size_t t) const {
    return grads_[t];
  }
  bool is_boundary_vertex(std::size_t i) const { return on_boundary_[i]; }

  double max_edge_length() const { return max_edge_; }
  double diameter() const;

 private:
  void build_boundary();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::optional<Ellipse> curve_;

  std::vector<double> areas_;
  std::vector<Eigen::Matrix<double, 2, 3>> grads_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::vector<int>> loops_;
  std::vector<bool> on_boundary_;
  double max_edge_ = 0.0;
};

struct GeometryStats {
  double area = 0.0;
  double perimeter = 0.0;
  double inradius = 0.0;  // Euclidean, sampled at vertices and incentres
  bool is_convex = false;
};

Mesh generate_mesh(const DomainSpec& spec);
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);
/// Red refinement: every triangle split into four at edge midpoints.
/// Boundary midpoints are projected onto the analytic curve when present.
Mesh refine(const Mesh& mesh);
GeometryStats geometry_stats(const Mesh& mesh);

/// Projects a point onto the ellipse along the parametric angle.
Vec2 project_to_curve(const Ellipse& e, const Vec2& x);

/// Returns a copy of the mesh with every coordinate multiplied by s.
Mesh dilate(const Mesh& mesh, double s);

}  // namespace robin
