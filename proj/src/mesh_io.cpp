#include "robin/mesh.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace robin {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

DomainSpec DomainSpec::parse(std::string_view text, double target_h) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("domain must look like kind:params, got '" + std::string(text) + "'");
  const std::string kind(text.substr(0, colon));
  const std::string_view rest = text.substr(colon + 1);
  DomainSpec spec;
  spec.target_h = target_h;
  if (kind == "file") {
    if (rest.empty()) throw std::invalid_argument("file: needs a path");
    spec.shape = MeshFile{std::string(rest)};
    return spec;
  }
  if (kind == "polygon") {
    Polygon poly;
    for (const auto& pt : split(rest, ';')) {
      const auto xy = split(pt, ',');
      if (xy.size() != 2) throw std::invalid_argument("polygon vertex must be x,y");
      poly.vertices.emplace_back(parse_number(xy[0]), parse_number(xy[1]));
    }
    spec.shape = std::move(poly);
    return spec;
  }
  std::vector<double> args;
  for (const auto& a : split(rest, ':')) args.push_back(parse_number(a));
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw std::invalid_argument(kind + " takes " + std::to_string(n) + " parameter(s)");
    for (double a : args)
      if (!(a > 0.0) || !std::isfinite(a))
        throw std::invalid_argument(kind + " parameters must be positive");
  };
  if (kind == "disk") {
    need(1);
    spec.shape = Disk{args[0]};
  } else if (kind == "square") {
    need(1);
    spec.shape = Square{args[0]};
  } else if (kind == "rectangle") {
    need(2);
    spec.shape = Rectangle{args[0], args[1]};
  } else if (kind == "ellipse") {
    need(2);
    spec.shape = Ellipse{args[0], args[1]};
  } else if (kind == "hexagon") {
    need(1);
    Polygon poly;
    for (int k = 0; k < 6; ++k) {
      const double th = std::numbers::pi * k / 3.0;
      poly.vertices.emplace_back(args[0] * std::cos(th), args[0] * std::sin(th));
    }
    spec.shape = std::move(poly);
  } else {
    throw std::invalid_argument("unknown domain kind '" + kind + "'");
  }
  return spec;
}

std::string DomainSpec::id() const {
  struct Visitor {
    std::string operator()(const Disk& d) const { return "disk:" + format_number(d.radius); }
    std::string operator()(const Square& s) const { return "square:" + format_number(s.side); }
    std::string operator()(const Rectangle& r) const {
      return "rectangle:" + format_number(r.width) + ":" + format_number(r.height);
    }
    std::string operator()(const Ellipse& e) const {
      return "ellipse:" + format_number(e.a) + ":" + format_number(e.b);
    }
    std::string operator()(const Polygon& p) const {
      std::string s = "polygon:";
      for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        if (i) s += ';';
        s += format_number(p.vertices[i].x()) + "," + format_number(p.vertices[i].y());
      }
      return s;
    }
    std::string operator()(const MeshFile& f) const { return "file:" + f.path; }
  };
  return std::visit(Visitor{}, shape);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> tri_lines;
  struct BRecord {
    int a, b, line;
  };
  std::vector<BRecord> brecs;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto fail = [&](const std::string& what) {
      return MeshError(path + ": " + what + " at line " + std::to_string(lineno));
    };
    auto read_index = [&]() {
      long long i = 0;
      if (!(ls >> i)) throw fail("parse error");
      return i;
    };
    if (tag == "v") {
      double x = 0.0, y = 0.0;
      if (!(ls >> x >> y)) throw fail("parse error");
      verts.emplace_back(x, y);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      for (auto& i : t) {
        const long long v = read_index();
        if (v < 0 || v > std::numeric_limits<int>::max())
          throw fail("dangling index " + std::to_string(v));
        i = static_cast<int>(v);
      }
      tris.push_back(t);
      tri_lines.push_back(lineno);
    } else if (tag == "b") {
      const long long a = read_index();
      const long long b = read_index();
      brecs.push_back({static_cast<int>(a), static_cast<int>(b), lineno});
    } else {
      throw fail("parse error: unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw fail("parse error: trailing '" + extra + "'");
  }
  // Vertices may follow triangles in the file, so index checks happen here.
  const auto nv = static_cast<int>(verts.size());
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int i : tris[t])
      if (i < 0 || i >= nv)
        throw MeshError(path + ": dangling index " + std::to_string(i) + " at line " +
                        std::to_string(tri_lines[t]));
  for (const auto& r : brecs)
    if (r.a < 0 || r.a >= nv || r.b < 0 || r.b >= nv)
      throw MeshError(path + ": dangling index at line " + std::to_string(r.line));

  Mesh mesh(std::move(verts), std::move(tris));

  if (!brecs.empty()) {
    std::set<std::pair<int, int>> topo;
    for (const auto& e : mesh.boundary_edges())
      topo.insert({std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])});
    std::set<std::pair<int, int>> listed;
    for (const auto& r : brecs) {
      const std::pair<int, int> key{std::min(r.a, r.b), std::max(r.a, r.b)};
      if (!topo.count(key))
        throw MeshError(path + ": boundary edge at line " + std::to_string(r.line) +
                        " does not belong to exactly one triangle");
      listed.insert(key);
    }
    for (const auto& k : topo)
      if (!listed.count(k))
        throw MeshError(path + ": open boundary loop (edge " + std::to_string(k.first) + "-" +
                        std::to_string(k.second) + " not listed)");
  }
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file '" + path + "'");
  out << "# " << mesh.num_vertices() << " vertices, " << mesh.num_triangles() << " triangles\n";
  for (const auto& v : mesh.vertices())
    out << "v " << format_number(v.x()) << ' ' << format_number(v.y()) << '\n';
  for (const auto& t : mesh.triangles()) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges()) out << "b " << e.v[0] << ' ' << e.v[1] << '\n';
  if (!out) throw MeshError("failed writing mesh file '" + path + "'");
}

}  // namespace robin
