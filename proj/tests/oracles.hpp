#pragma once

// Reference values computed independently of the library: Bessel series,
// closed forms and brute-force quadrature.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// J_n(x) from the power series; fine for the |x| < 10 used here.
inline double bessel_j(int n, double x) {
  double term = std::pow(0.5 * x, n) / std::tgamma(n + 1.0);
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -(0.25 * x * x) / (k * static_cast<double>(k + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// First zero of J_0.
inline double j01() { return bisect([](double x) { return bessel_j(0, x); }, 2.0, 3.0); }

// First Robin eigenvalue of the unit disk for p = 2: x J_1(x) = beta J_0(x), lambda = x^2.
inline double disk_robin_lambda(double beta) {
  const double x = bisect([beta](double x) { return x * bessel_j(1, x) - beta * bessel_j(0, x); }, 0.0, j01());
  return x * x;
}

inline double disk_dirichlet_lambda() { return j01() * j01(); }

// p-torsion of the unit disk: u = ((p-1)/p) 2^(-1/(p-1)) (1 - r^p'), integrated over r dr dtheta.
inline double disk_torsion(double p) {
  const double pp = p / (p - 1.0);
  const double c = (p - 1.0) / p * std::pow(2.0, -1.0 / (p - 1.0));
  return 2.0 * pi * c * (0.5 - 1.0 / (pp + 2.0));
}

// Perimeter of the ellipse by composite Simpson on the arc-length integrand.
inline double ellipse_perimeter(double a, double b, int n = 20000) {
  auto g = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  const double h = 2.0 * pi / n;
  double s = g(0) + g(2.0 * pi);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
  return s * h / 3.0;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace oracle
