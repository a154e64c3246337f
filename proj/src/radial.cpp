#include "robin/radial.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace robin::radial {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

constexpr double kStart = 1e-6;       // series start, unit ball
constexpr double kOdeTol = 1e-13;
constexpr double kLambdaTol = 1e-14;  // relative bisection width

void check_args(double p, int N) {
  if (!(p >= 1.1 && p <= 10.0)) throw std::invalid_argument("exponent p outside [1.1, 10]");
  if (N < 1) throw std::invalid_argument("dimension must be >= 1");
}

double signed_pow(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

// State: v, w = r^(N-1) |v'|^(p-2) v', then one running integral of
// |v|^q r^(N-1) per requested exponent.
struct RadialOde {
  double p;
  int N;
  double lambda;
  const std::vector<double>* exps;

  void operator()(const State& x, State& dx, double r) const {
    const double rn = std::pow(r, N - 1);
    dx[0] = signed_pow(x[1] / rn, 1.0 / (p - 1.0));
    dx[1] = -lambda * rn * signed_pow(x[0], p - 1.0);
    for (std::size_t k = 0; k < exps->size(); ++k) dx[2 + k] = std::pow(std::abs(x[0]), (*exps)[k]) * rn;
  }
};

State start_state(double p, int N, double lambda, const std::vector<double>& exps) {
  const double pp = p / (p - 1.0);
  const double c = std::pow(lambda / N, 1.0 / (p - 1.0)) / pp;
  State x(2 + exps.size());
  x[0] = 1.0 - c * std::pow(kStart, pp);
  x[1] = -lambda * std::pow(kStart, N) / N;
  for (std::size_t k = 0; k < exps.size(); ++k) x[2 + k] = std::pow(kStart, N) / N;
  return x;
}

auto make_stepper() {
  return odeint::make_dense_output(kOdeTol, kOdeTol, odeint::runge_kutta_dopri5<State>());
}

// True when v reaches zero on (0, 1].
bool hits_zero(double p, int N, double lambda) {
  static const std::vector<double> none;
  RadialOde ode{p, N, lambda, &none};
  auto stepper = make_stepper();
  stepper.initialize(start_state(p, N, lambda, none), kStart, 1e-4);
  while (stepper.current_time() < 1.0) {
    stepper.do_step(ode);
    if (stepper.current_state()[0] <= 0.0) {
      if (stepper.current_time() <= 1.0) return true;
      State x(2);
      stepper.calc_state(1.0, x);
      return x[0] <= 0.0;
    }
  }
  return false;
}

double unit_eigenvalue(double p, int N) {
  double lo = 0.0, hi = 1.0;
  for (int k = 0; !hits_zero(p, N, hi); ++k) {
    if (k > 200) throw ShootingError("no eigenvalue bracket found");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > kLambdaTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (hits_zero(p, N, mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double RadialEigen::norm(double q) const {
  auto it = norms.find(q);
  if (it == norms.end()) throw std::out_of_range("norm exponent " + std::to_string(q) + " not computed");
  return it->second;
}

double pi_p(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("pi_p needs p > 1");
  return 2.0 * std::numbers::pi / (p * std::sin(std::numbers::pi / p));
}

double sphere_measure(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

RadialEigen ball_dirichlet_eigen(double p, int N, double R, const std::vector<double>& extra_exponents,
                                 int profile_points) {
  check_args(p, N);
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("radius must be positive");
  if (profile_points < 2) throw std::invalid_argument("profile needs at least 2 points");
  std::vector<double> exps = {1.0, p - 1.0, p};
  for (double q : extra_exponents) {
    if (!(q > 0.0)) throw std::invalid_argument("norm exponent must be positive");
    exps.push_back(q);
  }

  const double lambda1 = unit_eigenvalue(p, N);
  // Integrate once more on the unit ball, sampling the profile and the norm integrals.
  RadialOde ode{p, N, lambda1, &exps};
  auto stepper = make_stepper();
  stepper.initialize(start_state(p, N, lambda1, exps), kStart, 1e-4);
  RadialEigen out;
  out.dimension = N;
  out.p = p;
  out.radius = R;
  out.lambda = lambda1 / std::pow(R, p);
  out.r.resize(static_cast<std::size_t>(profile_points));
  out.profile.resize(out.r.size());
  State x(2 + exps.size());
  for (int i = 0; i < profile_points; ++i) {
    const double t = static_cast<double>(i) / (profile_points - 1);
    out.r[static_cast<std::size_t>(i)] = t * R;
    if (t <= kStart) {
      out.profile[static_cast<std::size_t>(i)] = 1.0;
      continue;
    }
    while (stepper.current_time() < t) stepper.do_step(ode);
    stepper.calc_state(t, x);
    out.profile[static_cast<std::size_t>(i)] = x[0];
  }
  // The bisection leaves v(1) within rounding of zero.
  out.profile.back() = std::max(0.0, out.profile.back());
  const double omega = sphere_measure(N);
  for (std::size_t k = 0; k < exps.size(); ++k) {
    const double q = exps[k];
    out.norms[q] = std::pow(omega * x[2 + k], 1.0 / q) * std::pow(R, N / q);
  }
  return out;
}

double reverse_holder_constant(double p, double q, double r, double lambda_target, int N) {
  if (!(q > 0.0) || q > r) throw std::invalid_argument("reverse Hoelder constant needs 0 < q <= r");
  if (!(lambda_target > 0.0)) throw std::invalid_argument("target eigenvalue must be positive");
  check_args(p, N);
  if (q == r) return 1.0;
  const double lambda1 = unit_eigenvalue(p, N);
  const double R = std::pow(lambda1 / lambda_target, 1.0 / p);
  const auto ball = ball_dirichlet_eigen(p, N, R, {q, r}, 2);
  return ball.norm(r) / ball.norm(q);
}

double kbar(double p, double lambda_target, int N) {
  return std::pow(reverse_holder_constant(p, p - 1.0, p, lambda_target, N), p);
}

double hersch_lower_bound(double p, double beta, double inradius) {
  if (!(inradius > 0.0)) throw std::invalid_argument("inradius must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const double h = 0.5 * pi_p(p);
  return (p - 1.0) * std::pow(h, p) / std::pow(inradius + h * std::pow(beta, -1.0 / (p - 1.0)), p);
}

}  // namespace robin::radial
