#include "pfunctional.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "robin/fem.hpp"

namespace robin::detail {

namespace {

// Per-point derivatives of (c/p) (v^2 + eps^2)^(p/2).
struct PointTerm {
  double value, d1, d2;
};

PointTerm point_term(double v, double p, double eps) {
  const double s = v * v + eps * eps;
  if (s == 0.0) {
    // Only reachable with eps = 0; p > 1 so the first derivative vanishes.
    const double d2 = p == 2.0 ? 1.0 : (p > 2.0 ? 0.0 : 1e300);
    return {0.0, 0.0, d2};
  }
  const double a = std::pow(s, 0.5 * (p - 2.0));
  const double value = a * s / p;
  const double d1 = a * v;
  const double d2 = p == 2.0 ? 1.0 : a / s * ((p - 1.0) * v * v + eps * eps);
  return {value, d1, d2};
}

}  // namespace

PFunctional::PFunctional(const Mesh& mesh, FunctionalTerms terms, std::vector<bool> fixed)
    : mesh_(mesh), terms_(std::move(terms)) {
  reduced_index_.assign(mesh.num_vertices(), -1);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    if (!fixed.empty() && fixed[i]) continue;
    reduced_index_[i] = static_cast<int>(free_.size());
    free_.push_back(static_cast<int>(i));
  }
}

Eigen::VectorXd PFunctional::restrict(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(num_free());
  for (std::size_t k = 0; k < free_.size(); ++k) r[static_cast<Eigen::Index>(k)] = full[free_[k]];
  return r;
}

Eigen::VectorXd PFunctional::expand(const Eigen::VectorXd& reduced, const Eigen::VectorXd& base) const {
  Eigen::VectorXd full = base;
  for (std::size_t k = 0; k < free_.size(); ++k) full[free_[k]] = reduced[static_cast<Eigen::Index>(k)];
  return full;
}

double PFunctional::value(const Eigen::VectorXd& u) const {
  const double p = terms_.p, eps = terms_.epsilon;
  double sum = 0.0;
  if (terms_.grad_coeff != 0.0) {
    double e = 0.0;
    for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
      const auto& tri = mesh_.triangles()[t];
      const Vec2 g = mesh_.basis_gradients(t) * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
      const double s = g.squaredNorm() + eps * eps;
      if (s > 0.0) e += mesh_.triangle_area(t) * std::pow(s, 0.5 * p);
    }
    sum += terms_.grad_coeff * e / p;
  }
  if (terms_.boundary_coeff != 0.0) {
    const auto& rule = fem::edge_rule();
    double b = 0.0;
    for (const auto& edge : mesh_.boundary_edges()) {
      const double ua = u[edge.v[0]], ub = u[edge.v[1]];
      for (int g = 0; g < 3; ++g) {
        const double v = (1.0 - rule.points[g]) * ua + rule.points[g] * ub;
        b += edge.length * rule.weights[g] * point_term(v, p, eps).value;
      }
    }
    sum += terms_.boundary_coeff * b;
  }
  if (terms_.mass_coeff != 0.0) {
    const auto& rule = fem::triangle_rule();
    double m = 0.0;
    for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
      const auto& tri = mesh_.triangles()[t];
      for (int q = 0; q < 6; ++q) {
        const auto& bc = rule.points[q];
        const double v = bc[0] * u[tri[0]] + bc[1] * u[tri[1]] + bc[2] * u[tri[2]];
        m += mesh_.triangle_area(t) * rule.weights[q] * point_term(v, p, eps).value;
      }
    }
    sum += terms_.mass_coeff * m;
  }
  if (terms_.linear.size() > 0) sum -= terms_.linear.dot(u);
  return sum;
}

void PFunctional::gradient_hessian(const Eigen::VectorXd& u, Eigen::VectorXd& grad,
                                   Eigen::SparseMatrix<double>* hess) const {
  const double p = terms_.p, eps = terms_.epsilon;
  Eigen::VectorXd full_grad = Eigen::VectorXd::Zero(u.size());
  std::vector<Eigen::Triplet<double>> trip;
  if (hess) {
    trip.reserve(9 * mesh_.num_triangles() + free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k)
      trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 0.0);
  }
  auto add_block = [&](const int* nodes, int n, const double* row_weights, double scale,
                       const Eigen::Matrix3d* block) {
    // Either a rank-one block scale*w w^T (block == nullptr) or a full 3x3 block.
    for (int i = 0; i < n; ++i) {
      const int ri = reduced_index_[nodes[i]];
      if (ri < 0) continue;
      for (int j = 0; j < n; ++j) {
        const int rj = reduced_index_[nodes[j]];
        if (rj < 0) continue;
        const double v = block ? (*block)(i, j) : scale * row_weights[i] * row_weights[j];
        trip.emplace_back(ri, rj, v);
      }
    }
  };

  if (terms_.grad_coeff != 0.0) {
    const double c = terms_.grad_coeff;
    for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
      const auto& tri = mesh_.triangles()[t];
      const auto& G = mesh_.basis_gradients(t);
      const Vec2 g = G * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
      const double s = g.squaredNorm() + eps * eps;
      const double area = mesh_.triangle_area(t);
      double a;
      if (s > 0.0)
        a = std::pow(s, 0.5 * (p - 2.0));
      else
        a = p == 2.0 ? 1.0 : (p > 2.0 ? 0.0 : 1e300);
      const Eigen::Vector3d Gg = G.transpose() * g;
      for (int i = 0; i < 3; ++i) full_grad[tri[i]] += c * area * a * Gg[i];
      if (hess) {
        Eigen::Matrix3d block = c * area * a * (G.transpose() * G);
        if (p != 2.0 && s > 0.0) block += c * area * (p - 2.0) * (a / s) * (Gg * Gg.transpose());
        add_block(tri.data(), 3, nullptr, 0.0, &block);
      }
    }
  }
  if (terms_.boundary_coeff != 0.0) {
    const auto& rule = fem::edge_rule();
    const double c = terms_.boundary_coeff;
    for (const auto& edge : mesh_.boundary_edges()) {
      const double ua = u[edge.v[0]], ub = u[edge.v[1]];
      for (int g = 0; g < 3; ++g) {
        const double w[2] = {1.0 - rule.points[g], rule.points[g]};
        const double v = w[0] * ua + w[1] * ub;
        const auto pt = point_term(v, p, eps);
        const double scale = c * edge.length * rule.weights[g];
        full_grad[edge.v[0]] += scale * pt.d1 * w[0];
        full_grad[edge.v[1]] += scale * pt.d1 * w[1];
        if (hess) add_block(edge.v.data(), 2, w, scale * pt.d2, nullptr);
      }
    }
  }
  if (terms_.mass_coeff != 0.0) {
    const auto& rule = fem::triangle_rule();
    const double c = terms_.mass_coeff;
    for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
      const auto& tri = mesh_.triangles()[t];
      for (int q = 0; q < 6; ++q) {
        const auto& bc = rule.points[q];
        const double v = bc[0] * u[tri[0]] + bc[1] * u[tri[1]] + bc[2] * u[tri[2]];
        const auto pt = point_term(v, p, eps);
        const double scale = c * mesh_.triangle_area(t) * rule.weights[q];
        for (int i = 0; i < 3; ++i) full_grad[tri[i]] += scale * pt.d1 * bc[i];
        if (hess) add_block(tri.data(), 3, bc.data(), scale * pt.d2, nullptr);
      }
    }
  }
  if (terms_.linear.size() > 0) full_grad -= terms_.linear;
  grad = restrict(full_grad);
  if (hess) {
    hess->resize(num_free(), num_free());
    hess->setFromTriplets(trip.begin(), trip.end());
  }
}

NewtonResult minimize(const PFunctional& functional, Eigen::VectorXd start_full,
                      const NewtonOptions& options) {
  NewtonResult result;
  Eigen::VectorXd x = functional.restrict(start_full);
  const Eigen::VectorXd base = std::move(start_full);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  const double target = options.gradient_tol * options.reference_norm;

  Eigen::VectorXd grad;
  Eigen::SparseMatrix<double> hess;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd full = functional.expand(x, base);
    functional.gradient_hessian(full, grad, &hess);
    result.gradient_norm = grad.norm();
    result.iterations = it;
    if (!std::isfinite(result.gradient_norm)) break;
    if (result.gradient_norm <= target) {
      result.converged = true;
      break;
    }
    if (!analyzed) {
      ldlt.analyzePattern(hess);
      analyzed = true;
    }
    ldlt.factorize(hess);
    auto positive = [&] {
      return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
    };
    if (!positive()) {
      const double scale = hess.diagonal().cwiseAbs().maxCoeff();
      double shift = 1e-10 * (scale > 0.0 ? scale : 1.0);
      Eigen::SparseMatrix<double> eye(hess.rows(), hess.cols());
      eye.setIdentity();
      for (int k = 0; k < 40 && !positive(); ++k, shift *= 10.0) ldlt.factorize(hess + shift * eye);
      if (!positive()) break;
    }
    const Eigen::VectorXd d = -ldlt.solve(grad);
    const double slope = grad.dot(d);
    const double phi0 = functional.value(full);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = x + t * d;
      if (functional.value(functional.expand(trial, base)) <= phi0 + 1e-4 * t * slope) {
        x = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Near the optimum value differences drown in rounding; fall back to
      // the gradient norm as merit.
      const Eigen::VectorXd trial = x + d;
      Eigen::VectorXd g2;
      functional.gradient_hessian(functional.expand(trial, base), g2, nullptr);
      if (g2.norm() < result.gradient_norm) {
        x = trial;
        t = 1.0;
      } else {
        result.converged = result.gradient_norm <= 1e3 * target;
        break;
      }
    }
    const double xmax = x.cwiseAbs().maxCoeff();
    if (t * d.cwiseAbs().maxCoeff() <= 1e-15 * (xmax > 0.0 ? xmax : 1.0)) {
      result.converged = true;
      result.iterations = it + 1;
      break;
    }
  }
  result.full = functional.expand(x, base);
  return result;
}

}  // namespace robin::detail
