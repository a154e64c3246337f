// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../oracles.hpp"
#include "cli.hpp"
#include "robin/bounds.hpp"
#include "robin/eigensolve.hpp"
#include "robin/radial.hpp"

using namespace robin;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScalarField ones(const Mesh& m) { return ScalarField::Ones(static_cast<Eigen::Index>(m.num_vertices())); }

Mesh mesh_of(const std::string& d, double h) { return generate_mesh(DomainSpec::parse(d, h)); }

// ---- criteria ----

void dirichlet_square(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh m = refine(refine(mesh_of("square:1", 0.1)));
  const auto r = dirichlet_eigenvalue(m, 2);
  const double secs = seconds_since(t0);
  const double err = oracle::rel_err(r.lambda, 2 * oracle::pi * oracle::pi);
  c.detail << "lambda=" << r.lambda << " rel_err=" << err << " time=" << secs << "s";
  c.expect(r.converged, "converged");
  c.expect(err < 0.01, "within 1%");
  c.expect(secs < 60, "under 60 s");
}

void robin_disk(Check& c) {
  const Mesh m = mesh_of("disk:1", 0.05);
  for (double beta : {0.5, 1.0, 5.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = robin_eigenvalue(m, 2, beta);
    const double secs = seconds_since(t0);
    const double ref = oracle::disk_robin_lambda(beta);
    const double err = oracle::rel_err(r.lambda, ref);
    c.detail << " beta=" << beta << ": " << r.lambda << " vs " << ref << " (" << err << ", " << secs << "s)";
    c.expect(r.converged && err < 0.01 && secs < 60, "beta=" + std::to_string(beta));
  }
}

void radial_cross_check(Check& c) {
  const double b3 = radial::ball_dirichlet_eigen(2, 3, 1).lambda;
  const double b2 = radial::ball_dirichlet_eigen(2, 2, 1).lambda;
  const double shoot3 = radial::ball_dirichlet_eigen(3, 2, 1).lambda;
  const double fem3 = dirichlet_eigenvalue(mesh_of("disk:1", 0.05), 3).lambda;
  c.detail << "N=3 err=" << std::abs(b3 - oracle::pi * oracle::pi)
           << " N=2 err=" << std::abs(b2 - oracle::disk_dirichlet_lambda()) << " p=3 fem=" << fem3
           << " shooting=" << shoot3;
  c.expect(std::abs(b3 - oracle::pi * oracle::pi) <= 1e-6, "N=3 ball");
  c.expect(std::abs(b2 - oracle::disk_dirichlet_lambda()) <= 1e-8, "N=2 ball");
  c.expect(oracle::rel_err(fem3, shoot3) < 0.02, "FEM vs shooting");
}

void torsion_closed_forms(Check& c) {
  const Mesh unit = mesh_of("disk:1", 0.05);
  const double t2 = torsion(unit, 2).value;
  const double t3 = torsion(unit, 3).value;
  const double big = torsion(mesh_of("disk:2", 0.1), 2).value;
  c.detail << "T2=" << t2 << " T3=" << t3 << " T2(2B)/T2(B)=" << big / t2;
  c.expect(oracle::rel_err(t2, oracle::pi / 8) < 0.01, "p=2");
  c.expect(oracle::rel_err(t3, oracle::pi * std::sqrt(2.0) / 7) < 0.01, "p=3");
  c.expect(oracle::rel_err(big, 16 * t2) < 0.01, "dilation");
}

void torsion_bound_tightness(Check& c) {
  const Mesh m = mesh_of("disk:1", 0.05);
  const auto eig = robin_eigenvalue(m, 2, 1);
  const auto rep = bounds::evaluate_upper_bounds(m, 2, 1, eig, dirichlet_eigenvalue(m, 2), torsion(m, 2).value,
                                                 geometry_stats(m));
  const auto& b = rep.bounds.at("upper_torsion");
  c.detail << "bound=" << b.value << " lambda=" << eig.lambda << " margin=" << b.margin;
  c.expect(b.satisfied, "satisfied");
  c.expect(b.margin > 0.0 && b.margin < 0.03, "margin in (0, 3%)");
}

// The default suite is run twice through the CLI; criteria 6, 7, 11 and 13 read its reports.
struct SuiteRun {
  int code_a = -1, code_b = -1;
  std::string json_a, json_b, csv_a, csv_b;
  json reports;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const SuiteRun& suite() {
  static const SuiteRun run = [] {
    SuiteRun s;
    const auto base = fs::temp_directory_path() / "robin_acceptance";
    fs::remove_all(base);
    std::ostringstream out, err;
    auto go = [&](const std::string& sub, const std::string& format) {
      return cli::run({"verify", "--suite", "default", "--format", format, "--out", (base / sub).string()}, out, err);
    };
    s.code_a = go("a", "json");
    s.code_b = go("b", "json");
    go("a", "csv");
    go("b", "csv");
    s.json_a = slurp(base / "a" / "verify.json");
    s.json_b = slurp(base / "b" / "verify.json");
    s.csv_a = slurp(base / "a" / "verify.csv");
    s.csv_b = slurp(base / "b" / "verify.csv");
    if (!s.json_a.empty()) s.reports = json::parse(s.json_a)["reports"];
    return s;
  }();
  return run;
}

void check_suite_bound(Check& c, const std::string& name, bool required_everywhere) {
  const auto& s = suite();
  c.expect(s.code_a == 0, "verify exit status 0");
  c.expect(s.reports.size() == 48, "48 suite points");
  int seen = 0, bad = 0;
  double worst = 1e300;
  for (const auto& r : s.reports) {
    if (!r["bounds"].contains(name)) {
      if (required_everywhere) ++bad;
      continue;
    }
    ++seen;
    const double margin = r["bounds"][name]["margin"].get<double>();
    worst = std::min(worst, margin);
    if (!r["bounds"][name]["satisfied"].get<bool>() || margin < -bounds::kDefaultSlack) ++bad;
  }
  c.detail << " " << name << ": points=" << seen << " violations=" << bad << " min_margin=" << worst;
  c.expect(bad == 0 && seen > 0, name);
}

void dirichlet_bound_suite(Check& c) { check_suite_bound(c, "upper_dirichlet", true); }

void polya_hersch_suite(Check& c) {
  check_suite_bound(c, "polya_p2", false);
  check_suite_bound(c, "hersch", true);
  int polya_points = 0;
  for (const auto& r : suite().reports)
    if (r["p"].get<double>() == 2.0) polya_points += r["bounds"].contains("polya_p2");
  c.expect(polya_points == 16, "polya on every p=2 point");
  for (const auto& r : suite().reports)
    if (r["domain"] == "disk:1" && r["p"].get<double>() == 2.0 && r["beta"].get<double>() == 1.0) {
      const double h = r["bounds"]["hersch"]["value"].get<double>();
      const double lam = r["lambda"].get<double>();
      c.detail << " disk hersch=" << h << " lambda=" << lam;
      c.expect(std::abs(h - 0.3733) < 0.002 && h <= lam, "disk Hersch value");
    }
}

void thompson_duality(Check& c) {
  const double beta = 1.0;
  for (const char* d : {"disk:1", "square:1", "hexagon:1"}) {
    const Mesh m = mesh_of(d, 0.1);
    const ScalarField f = ones(m);
    const auto opt = robin_source_solve(m, 2, beta, f);
    const double strong = bounds::dual_objective(m, 2, beta, p_flux(m, opt.u_f, 2), opt.boundary_flux);
    const double gap = std::abs(strong - opt.j_value) / opt.j_value;
    int weak_fail = 0;
    double min_weak = 1e300;
    for (int k = 0; k < 20; ++k) {
      const double alpha = 0.05 * std::pow(1000.0, k / 19.0) * 1.01;  // spans 0.05 .. 50, never equal to beta
      const auto s = robin_source_solve(m, 2, alpha, f);
      const double dual = bounds::dual_objective(m, 2, beta, p_flux(m, s.u_f, 2), s.boundary_flux);
      min_weak = std::min(min_weak, (dual - opt.j_value) / opt.j_value);
      if (dual < opt.j_value * (1 - 1e-10)) ++weak_fail;
    }
    c.detail << " " << d << ": strong_gap=" << gap << " weak_min_rel=" << min_weak;
    c.expect(gap <= 1e-8, std::string(d) + " strong");
    c.expect(weak_fail == 0, std::string(d) + " weak");
  }
}

void convexity(Check& c) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> logu(std::log(0.05), std::log(50.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ps[] = {1.5, 2.0, 3.0};
  for (const char* d : {"disk:1", "square:1"}) {
    const Mesh m = mesh_of(d, 0.1);
    double worst = 1e300;
    for (int k = 0; k < 30; ++k) {
      const double p = ps[k % 3];
      const double alpha = std::exp(logu(rng)), beta = std::exp(logu(rng));
      // smooth nonnegative source: affine plus a random bump
      const double a = unit(rng), bx = unit(rng) - 0.5, by = unit(rng) - 0.5, cx = unit(rng) - 0.5,
                   cy = unit(rng) - 0.5;
      ScalarField f(static_cast<Eigen::Index>(m.num_vertices()));
      for (std::size_t i = 0; i < m.num_vertices(); ++i) {
        const Vec2 x = m.vertices()[i];
        f[static_cast<Eigen::Index>(i)] = 0.2 + a + bx * x.x() + by * x.y() +
                                          2 * std::exp(-8 * ((x - Vec2(cx, cy)).squaredNorm()));
      }
      f = f.cwiseMax(0.0);
      const auto r = bounds::convexity_check(m, p, f, alpha, beta);
      worst = std::min(worst, r.slack);
    }
    c.detail << " " << d << ": min_slack=" << worst;
    c.expect(worst >= -1e-6, std::string(d) + " random triples");
  }
  const Mesh disk = mesh_of("disk:1", 0.05);
  const auto r = bounds::convexity_check(disk, 2, ones(disk), 2, 1);
  c.detail << " radial: lhs=" << r.lhs << " rhs=" << r.rhs;
  c.expect(std::abs(r.slack) <= 1e-3 * std::abs(r.lhs), "radial equality");
}

void limits(Check& c) {
  for (const char* d : {"disk:1", "square:1"}) {
    const Mesh m = mesh_of(d, 0.05);
    const auto s = bounds::limit_slope_beta0(m, 2, {1e-2, 1e-3}, true);
    const double pos = s.slopes.back(), neg = s.negative_slopes.back();
    c.detail << " " << d << ": target=" << s.target << " slope(1e-3)=" << pos << " slope(-1e-3)=" << neg
             << " extrapolated=" << s.limit_estimate << "/" << s.negative_limit_estimate;
    c.expect(oracle::rel_err(pos, s.target) < 0.02, std::string(d) + " positive side");
    c.expect(oracle::rel_err(neg, s.target) < 0.02, std::string(d) + " negative side");
    c.expect(oracle::rel_err(s.limit_estimate, s.target) < 0.02, std::string(d) + " extrapolated");
    c.expect(oracle::rel_err(s.negative_limit_estimate, s.target) < 0.02, std::string(d) + " extrapolated negative");
  }
  const auto g = bounds::beta_infinity_gap(mesh_of("disk:1", 0.05), 2, {1, 10, 100, 1e4});
  c.detail << " gaps:";
  for (double x : g.gaps) c.detail << " " << x;
  bool positive = true;
  for (double x : g.gaps) positive = positive && x > 0.0;
  c.expect(positive, "gaps positive");
  c.expect(g.monotone, "gaps strictly decreasing");
}

void certificates(Check& c) {
  int total = 0, bad = 0;
  double worst = 1e300;
  for (const auto& r : suite().reports)
    for (const auto& cert : r["certificates"]) {
      ++total;
      const double slack = cert["slack"].get<double>(), j = cert["j_value"].get<double>();
      worst = std::min(worst, slack / j);
      if (slack < -1e-3 * j) ++bad;
    }
  c.detail << "certificates=" << total << " violations=" << bad << " min_rel_slack=" << worst;
  c.expect(total == 48 * 4 && bad == 0, "suite certificates");

  double worst_eq = 0.0;
  for (const auto& r : suite().reports)
    if (r["domain"] == "disk:1")
      for (const auto& cert : r["certificates"])
        if (cert["f"] == "one")
          worst_eq = std::max(worst_eq, std::abs(cert["slack"].get<double>()) / cert["j_value"].get<double>());
  c.detail << " disk f=1 max |slack|/J=" << worst_eq;
  c.expect(worst_eq <= 1e-3, "disk equality");

  const Mesh disk = mesh_of("disk:1", 0.05);
  const double nu = bounds::nu_p_estimate(disk, 2, {ones(disk)});
  c.detail << " nu=" << nu;
  c.expect(oracle::rel_err(nu, 8.0) < 0.01, "nu estimate");
}

void faber_krahn(Check& c) {
  const Mesh sq = mesh_of("square:1", 0.05);
  const Mesh dk = mesh_of("disk:" + std::to_string(1.0 / std::sqrt(oracle::pi)), 0.05);
  int bad = 0;
  double worst = 1e300;
  for (double p : {1.5, 2.0, 3.0})
    for (double beta : {0.1, 1.0, 10.0, 100.0}) {
      const double ls = robin_eigenvalue(sq, p, beta).lambda;
      const double ld = robin_eigenvalue(dk, p, beta).lambda;
      worst = std::min(worst, (ls - ld) / ld);
      if (ls < ld * (1 - 0.01)) ++bad;
    }
  c.detail << "pairs=12 violations=" << bad << " min (square-disk)/disk=" << worst;
  c.expect(bad == 0, "square above equal-area disk");
}

void determinism(Check& c) {
  const auto& s = suite();
  c.detail << "json bytes=" << s.json_a.size() << " csv bytes=" << s.csv_a.size();
  c.expect(s.code_a == s.code_b, "same exit status");
  c.expect(!s.json_a.empty() && s.json_a == s.json_b, "identical JSON");
  c.expect(!s.csv_a.empty() && s.csv_a == s.csv_b, "identical CSV");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"1 Dirichlet square oracle", dirichlet_square},
      {"2 Robin disk Bessel oracle", robin_disk},
      {"3 radial shooting cross-check", radial_cross_check},
      {"4 torsion closed forms", torsion_closed_forms},
      {"5 torsion upper bound near-tight on the disk", torsion_bound_tightness},
      {"6 Dirichlet-eigenfunction upper bound on the suite", dirichlet_bound_suite},
      {"7 Polya and Hersch bounds on the suite", polya_hersch_suite},
      {"8 Thompson duality", thompson_duality},
      {"9 convexity in beta^(-1/(p-1))", convexity},
      {"10 limits beta -> 0 and beta -> infinity", limits},
      {"11 constant-flux certificates", certificates},
      {"12 Faber-Krahn comparison", faber_krahn},
      {"13 determinism of verify reports", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << name << " (" << seconds_since(t0) << " s): "
              << c.detail.str() << std::endl;
    failures += !c.ok;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
