#include "robin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>

#include <Eigen/LU>

namespace robin {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d - x).norm();
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Generators

Mesh rectangle_mesh(double width, double height, double h) {
  const int nx = std::max(1, static_cast<int>(std::ceil(width / h - 1e-12)));
  const int ny = std::max(1, static_cast<int>(std::ceil(height / h - 1e-12)));
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(width * i / nx, height * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // Alternate the diagonal so the mesh has no preferred direction.
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  }
  return Mesh(std::move(verts), std::move(tris));
}

// Concentric rings on the unit disk (ring k carries 6k nodes), mapped onto
// the ellipse by axis scaling. Boundary nodes are placed on the curve.
Mesh ellipse_mesh(const Ellipse& e, double h) {
  const double scale = std::max(e.a, e.b);
  // Diagonals between neighbouring rings reach sqrt(3) times the ring spacing,
  // so the spacing is h / 1.2 to keep every edge below 1.5 h.
  const int rings = std::max(1, static_cast<int>(std::ceil(1.2 * scale / h - 1e-12)));
  std::vector<Vec2> verts;
  verts.emplace_back(0.0, 0.0);
  std::vector<int> ring_start{0};
  for (int k = 1; k <= rings; ++k) {
    ring_start.push_back(static_cast<int>(verts.size()));
    const int m = 6 * k;
    const double r = static_cast<double>(k) / rings;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * std::numbers::pi * j / m;
      if (k == rings)
        verts.emplace_back(e.a * std::cos(th), e.b * std::sin(th));
      else
        verts.emplace_back(e.a * r * std::cos(th), e.b * r * std::sin(th));
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < 6; ++j) tris.push_back({0, 1 + j, 1 + (j + 1) % 6});
  for (int k = 2; k <= rings; ++k) {
    const int mi = 6 * (k - 1), mo = 6 * k;
    const int si = ring_start[k - 1], so = ring_start[k];
    int i = 0, o = 0;
    // Merge the two rings by angle; each step consumes one node of one ring.
    while (i < mi || o < mo) {
      const double next_i = static_cast<double>(i + 1) / mi;
      const double next_o = static_cast<double>(o + 1) / mo;
      const int vi = si + i % mi, vo = so + o % mo;
      if (o < mo && (i >= mi || next_o <= next_i)) {
        tris.push_back({vi, vo, so + (o + 1) % mo});
        ++o;
      } else {
        tris.push_back({vi, vo, si + (i + 1) % mi});
        ++i;
      }
    }
  }
  return Mesh(std::move(verts), std::move(tris), e);
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& poly) {
  std::vector<int> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> tris;
  auto inside = [](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
  };
  std::size_t guard = 0;
  while (idx.size() > 3) {
    bool clipped = false;
    const std::size_t n = idx.size();
    for (std::size_t k = 0; k < n; ++k) {
      const int ia = idx[(k + n - 1) % n], ib = idx[k], ic = idx[(k + 1) % n];
      const Vec2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
      if (signed_area(a, b, c) <= 0.0) continue;
      bool ear = true;
      for (int j : idx) {
        if (j == ia || j == ib || j == ic) continue;
        if (inside(poly[j], a, b, c)) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped || ++guard > poly.size() * poly.size())
      throw MeshError("degenerate polygon: triangulation failed");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

// Splits each triangle of a coarse triangulation into n^2 congruent copies.
// Lattice nodes on shared edges are created once.
Mesh subdivide(const std::vector<Vec2>& cverts, const std::vector<std::array<int, 3>>& ctris,
               int n) {
  std::vector<Vec2> verts = cverts;
  std::unordered_map<std::uint64_t, std::vector<int>> edge_nodes;  // from min to max vertex
  auto edge_node = [&](int a, int b, int step) -> int {
    // step in [0, n] measured from a.
    if (step == 0) return a;
    if (step == n) return b;
    auto& nodes = edge_nodes[edge_key(a, b)];
    const int lo = std::min(a, b), hi = std::max(a, b);
    if (nodes.empty()) {
      nodes.resize(static_cast<std::size_t>(n - 1));
      for (int s = 1; s < n; ++s) {
        nodes[static_cast<std::size_t>(s - 1)] = static_cast<int>(verts.size());
        verts.push_back(cverts[lo] + (cverts[hi] - cverts[lo]) * (static_cast<double>(s) / n));
      }
    }
    const int s = (a == lo) ? step : n - step;
    return nodes[static_cast<std::size_t>(s - 1)];
  };
  std::vector<std::array<int, 3>> tris;
  for (const auto& t : ctris) {
    const int A = t[0], B = t[1], C = t[2];
    std::vector<int> lattice(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
    auto at = [&](int i, int j) -> int& { return lattice[static_cast<std::size_t>(j * (n + 1) + i)]; };
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i + j <= n; ++i) {
        if (j == 0)
          at(i, j) = edge_node(A, B, i);
        else if (i == 0)
          at(i, j) = edge_node(A, C, j);
        else if (i + j == n)
          at(i, j) = edge_node(B, C, j);
        else {
          at(i, j) = static_cast<int>(verts.size());
          verts.push_back(cverts[A] + (cverts[B] - cverts[A]) * (static_cast<double>(i) / n) +
                          (cverts[C] - cverts[A]) * (static_cast<double>(j) / n));
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i + j < n; ++i) {
        tris.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j + 1 < n) tris.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    }
  }
  return Mesh(std::move(verts), std::move(tris));
}

Mesh polygon_mesh(std::vector<Vec2> poly, double h) {
  const std::size_t n = poly.size();
  if (n < 3) throw MeshError("degenerate polygon: fewer than 3 vertices");
  for (std::size_t i = 0; i < n; ++i)
    if ((poly[(i + 1) % n] - poly[i]).norm() == 0.0)
      throw MeshError("degenerate polygon: repeated vertex");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        throw MeshError("degenerate polygon: self-intersection");
    }
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) area2 += cross(poly[i], poly[(i + 1) % n]);
  if (area2 == 0.0) throw MeshError("degenerate polygon: zero area");
  if (area2 < 0.0) std::reverse(poly.begin(), poly.end());

  bool convex = true;
  for (std::size_t i = 0; i < n; ++i)
    if (cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]) < 0.0) convex = false;

  std::vector<Vec2> cverts = poly;
  std::vector<std::array<int, 3>> ctris;
  if (convex) {
    // Fan from the area centroid.
    Vec2 c = Vec2::Zero();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = cross(poly[i], poly[(i + 1) % n]);
      c += w * (poly[i] + poly[(i + 1) % n]);
      a += w;
    }
    c /= 3.0 * a;
    const int ci = static_cast<int>(n);
    cverts.push_back(c);
    for (std::size_t i = 0; i < n; ++i)
      ctris.push_back({ci, static_cast<int>(i), static_cast<int>((i + 1) % n)});
  } else {
    ctris = ear_clip(poly);
  }
  double longest = 0.0;
  for (const auto& t : ctris)
    for (int k = 0; k < 3; ++k)
      longest = std::max(longest, (cverts[t[(k + 1) % 3]] - cverts[t[k]]).norm());
  const int factor = std::max(1, static_cast<int>(std::ceil(longest / h - 1e-12)));
  return subdivide(cverts, ctris, factor);
}

double bounding_diameter(const Shape& shape) {
  struct Visitor {
    double operator()(const Disk& d) const { return 2.0 * d.radius; }
    double operator()(const Square& s) const { return std::sqrt(2.0) * s.side; }
    double operator()(const Rectangle& r) const { return std::hypot(r.width, r.height); }
    double operator()(const Ellipse& e) const { return 2.0 * std::max(e.a, e.b); }
    double operator()(const Polygon& p) const {
      double d = 0.0;
      for (const auto& a : p.vertices)
        for (const auto& b : p.vertices) d = std::max(d, (a - b).norm());
      return d;
    }
    double operator()(const MeshFile&) const { return std::numeric_limits<double>::infinity(); }
  };
  return std::visit(Visitor{}, shape);
}

}  // namespace

// ---------------------------------------------------------------------------

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::optional<Ellipse> curve)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), curve_(curve) {
  if (triangles_.empty()) throw MeshError("mesh has no triangles");
  const int nv = static_cast<int>(vertices_.size());
  for (const auto& v : vertices_)
    if (!std::isfinite(v.x()) || !std::isfinite(v.y())) throw MeshError("non-finite vertex coordinate");
  areas_.resize(triangles_.size());
  grads_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int i : tri)
      if (i < 0 || i >= nv)
        throw MeshError("dangling index " + std::to_string(i) + " in triangle " + std::to_string(t));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (a < 0.0) {
      std::swap(tri[1], tri[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has zero area");
    areas_[t] = a;
    Eigen::Matrix2d jac;
    jac.col(0) = vertices_[tri[1]] - vertices_[tri[0]];
    jac.col(1) = vertices_[tri[2]] - vertices_[tri[0]];
    const Eigen::Matrix2d inv = jac.inverse();
    grads_[t].col(1) = inv.row(0).transpose();
    grads_[t].col(2) = inv.row(1).transpose();
    grads_[t].col(0) = -grads_[t].col(1) - grads_[t].col(2);
    for (int k = 0; k < 3; ++k)
      max_edge_ = std::max(max_edge_, (vertices_[tri[(k + 1) % 3]] - vertices_[tri[k]]).norm());
  }
  build_boundary();
}

void Mesh::build_boundary() {
  struct EdgeUse {
    int count = 0;
    int a = -1, b = -1;
    int tri = -1;
  };
  std::unordered_map<std::uint64_t, EdgeUse> uses;
  uses.reserve(triangles_.size() * 3);
  std::vector<std::uint64_t> order;  // first-seen order, for determinism
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      auto [it, inserted] = uses.try_emplace(edge_key(a, b));
      if (inserted) order.push_back(it->first);
      auto& u = it->second;
      if (u.count == 1 && u.a == a)
        throw MeshError("inconsistent orientation or duplicate triangle at edge (" +
                        std::to_string(a) + "," + std::to_string(b) + ")");
      ++u.count;
      if (u.count > 2)
        throw MeshError("non-manifold edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
      u.a = a;
      u.b = b;
      u.tri = static_cast<int>(t);
    }
  }
  on_boundary_.assign(vertices_.size(), false);
  std::vector<int> outgoing(vertices_.size(), -1), incoming(vertices_.size(), -1);
  for (auto key : order) {
    const auto& u = uses.at(key);
    if (u.count != 1) continue;
    BoundaryEdge e;
    e.v = {u.a, u.b};
    e.triangle = u.tri;
    const Vec2 d = vertices_[u.b] - vertices_[u.a];
    e.length = d.norm();
    e.normal = Vec2(d.y(), -d.x()) / e.length;
    const int idx = static_cast<int>(boundary_.size());
    if (outgoing[u.a] != -1 || incoming[u.b] != -1)
      throw MeshError("boundary is pinched at a vertex");
    outgoing[u.a] = idx;
    incoming[u.b] = idx;
    on_boundary_[u.a] = on_boundary_[u.b] = true;
    boundary_.push_back(e);
  }
  if (boundary_.empty()) throw MeshError("mesh has no boundary");
  std::vector<bool> used(boundary_.size(), false);
  for (std::size_t start = 0; start < boundary_.size(); ++start) {
    if (used[start]) continue;
    std::vector<int> loop;
    int cur = static_cast<int>(start);
    while (!used[cur]) {
      used[cur] = true;
      loop.push_back(cur);
      const int next = outgoing[boundary_[cur].v[1]];
      if (next < 0) throw MeshError("open boundary loop");
      cur = next;
    }
    if (cur != static_cast<int>(start)) throw MeshError("open boundary loop");
    loops_.push_back(std::move(loop));
  }
}

double Mesh::diameter() const {
  double d = 0.0;
  for (const auto& e1 : boundary_)
    for (const auto& e2 : boundary_)
      d = std::max(d, (vertices_[e1.v[0]] - vertices_[e2.v[0]]).norm());
  return d;
}

// ---------------------------------------------------------------------------

Mesh generate_mesh(const DomainSpec& spec) {
  if (const auto* f = std::get_if<MeshFile>(&spec.shape)) return load_mesh(f->path);
  if (!(spec.target_h > 0.0)) throw MeshError("target_h must be positive");
  if (spec.target_h > bounding_diameter(spec.shape))
    throw MeshError("target_h larger than domain diameter");
  struct Visitor {
    double h;
    Mesh operator()(const Disk& d) const {
      if (!(d.radius > 0.0)) throw MeshError("disk radius must be positive");
      return ellipse_mesh({d.radius, d.radius}, h);
    }
    Mesh operator()(const Square& s) const {
      if (!(s.side > 0.0)) throw MeshError("square side must be positive");
      return rectangle_mesh(s.side, s.side, h);
    }
    Mesh operator()(const Rectangle& r) const {
      if (!(r.width > 0.0 && r.height > 0.0)) throw MeshError("rectangle sides must be positive");
      return rectangle_mesh(r.width, r.height, h);
    }
    Mesh operator()(const Ellipse& e) const {
      if (!(e.a > 0.0 && e.b > 0.0)) throw MeshError("ellipse semi-axes must be positive");
      return ellipse_mesh(e, h);
    }
    Mesh operator()(const Polygon& p) const { return polygon_mesh(p.vertices, h); }
    Mesh operator()(const MeshFile& f) const { return load_mesh(f.path); }
  };
  return std::visit(Visitor{spec.target_h}, spec.shape);
}

Vec2 project_to_curve(const Ellipse& e, const Vec2& x) {
  const double th = std::atan2(x.y() / e.b, x.x() / e.a);
  return {e.a * std::cos(th), e.b * std::sin(th)};
}

Mesh refine(const Mesh& mesh) {
  std::vector<Vec2> verts = mesh.vertices();
  std::unordered_map<std::uint64_t, int> mid;
  mid.reserve(mesh.num_triangles() * 2);
  std::unordered_map<std::uint64_t, bool> boundary;
  for (const auto& e : mesh.boundary_edges()) boundary[edge_key(e.v[0], e.v[1])] = true;
  auto midpoint = [&](int a, int b) {
    const auto key = edge_key(a, b);
    if (auto it = mid.find(key); it != mid.end()) return it->second;
    Vec2 m = 0.5 * (verts[a] + verts[b]);
    if (mesh.curve() && boundary.count(key)) m = project_to_curve(*mesh.curve(), m);
    const int id = static_cast<int>(verts.size());
    verts.push_back(m);
    mid.emplace(key, id);
    return id;
  };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(mesh.num_triangles() * 4);
  for (const auto& t : mesh.triangles()) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    tris.push_back({a, ab, ca});
    tris.push_back({ab, b, bc});
    tris.push_back({ca, bc, c});
    tris.push_back({ab, bc, ca});
  }
  return Mesh(std::move(verts), std::move(tris), mesh.curve());
}

Mesh dilate(const Mesh& mesh, double s) {
  std::vector<Vec2> verts = mesh.vertices();
  for (auto& v : verts) v *= s;
  std::optional<Ellipse> curve = mesh.curve();
  if (curve) curve = Ellipse{curve->a * s, curve->b * s};
  return Mesh(std::move(verts), mesh.triangles(), curve);
}

GeometryStats geometry_stats(const Mesh& mesh) {
  GeometryStats s;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) s.area += mesh.triangle_area(t);
  for (const auto& e : mesh.boundary_edges()) s.perimeter += e.length;

  const auto& V = mesh.vertices();
  auto boundary_distance = [&](const Vec2& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : mesh.boundary_edges())
      d = std::min(d, point_segment_distance(x, V[e.v[0]], V[e.v[1]]));
    return d;
  };
  for (const auto& x : V) s.inradius = std::max(s.inradius, boundary_distance(x));
  for (const auto& t : mesh.triangles()) {
    const Vec2 &a = V[t[0]], &b = V[t[1]], &c = V[t[2]];
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    const Vec2 incentre = (la * a + lb * b + lc * c) / (la + lb + lc);
    s.inradius = std::max(s.inradius, boundary_distance(incentre));
  }

  s.is_convex = mesh.boundary_loops().size() == 1;
  if (s.is_convex) {
    const auto& loop = mesh.boundary_loops().front();
    const double tol = 1e-12 * mesh.max_edge_length() * mesh.max_edge_length();
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const auto& e1 = mesh.boundary_edges()[loop[k]];
      const auto& e2 = mesh.boundary_edges()[loop[(k + 1) % loop.size()]];
      if (cross(V[e1.v[1]] - V[e1.v[0]], V[e2.v[1]] - V[e2.v[0]]) < -tol) {
        s.is_convex = false;
        break;
      }
    }
  }
  return s;
}

}  // namespace robin
