#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "robin/bounds.hpp"
#include "robin/eigensolve.hpp"
#include "robin/fem.hpp"
#include "robin/mesh.hpp"
#include "robin/report.hpp"

namespace robin::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using report::format_number;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> domains;
  std::vector<double> ps{2.0};
  std::vector<double> betas;
  std::string beta_grid;
  double h = 0.05;
  int refine = 0;
  double tol = 1e-10;
  int max_iter = 2000;
  std::uint64_t seed = 20240607;
  double slack = bounds::kDefaultSlack;
  std::string out_dir = "robin-out";
  std::string format = "json";
  std::string suite;
  std::string bc = "robin";
  bool with_field = false;
  bool negative = false;

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = tol;
    o.max_outer = max_iter;
    o.seed = seed;
    return o;
  }
};

const std::vector<std::string> kSuiteDomains = {"disk:1", "square:1", "rectangle:2:1", "hexagon:1"};
const std::vector<double> kSuitePs = {1.5, 2.0, 3.0};
const std::vector<double> kSuiteBetas = {0.1, 1.0, 10.0, 100.0};

void apply_suite(RunConfig& c) {
  if (c.suite.empty()) return;
  if (c.suite != "default") throw ConfigError("unknown suite '" + c.suite + "'");
  c.domains = kSuiteDomains;
  c.ps = kSuitePs;
  c.betas = kSuiteBetas;
}

void validate(RunConfig& c, bool need_domain) {
  apply_suite(c);
  if (need_domain && c.domains.empty()) throw ConfigError("no --domain given");
  if (c.ps.empty()) throw ConfigError("empty --p list");
  for (double p : c.ps)
    if (!(p >= fem::kMinExponent && p <= fem::kMaxExponent)) throw ConfigError("p outside [1.1, 10]");
  for (double b : c.betas)
    if (!std::isfinite(b)) throw ConfigError("beta must be finite");
  if (!(c.h > 0.0)) throw ConfigError("--h must be positive");
  if (c.refine < 0) throw ConfigError("--refine must be >= 0");
  if (!(c.slack >= 0.0)) throw ConfigError("--slack must be >= 0");
  try {
    c.solver().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Mesh build_mesh(const std::string& domain, const RunConfig& c) {
  DomainSpec spec;
  try {
    spec = DomainSpec::parse(domain, c.h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bad --domain '" + domain + "': " + e.what());
  }
  Mesh mesh = generate_mesh(spec);
  for (int k = 0; k < c.refine; ++k) mesh = refine(mesh);
  return mesh;
}

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
  return s;
}

void ensure_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir)) throw ConfigError("output directory '" + c.out_dir + "' not writable");
}

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- mesh ----

int cmd_mesh(RunConfig& c, std::ostream& out) {
  validate(c, true);
  ensure_out_dir(c);
  for (const auto& d : c.domains) {
    const Mesh mesh = build_mesh(d, c);
    const auto stats = geometry_stats(mesh);
    const std::string id = d;
    const std::string path = out_path(c, file_stem(id) + ".mesh");
    save_mesh(mesh, path + ".tmp");
    std::filesystem::rename(path + ".tmp", path);
    out << id << " vertices=" << mesh.num_vertices() << " triangles=" << mesh.num_triangles()
        << " area=" << format_number(stats.area) << " perimeter=" << format_number(stats.perimeter)
        << " inradius=" << format_number(stats.inradius) << " convex=" << (stats.is_convex ? "yes" : "no")
        << " -> " << path << "\n";
  }
  return kOk;
}

// ---- eig ----

int cmd_eig(RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.betas.empty() && c.beta_grid.empty()) c.betas = {1.0};
  if (!c.beta_grid.empty()) {
    try {
      c.betas = parse_beta_grid(c.beta_grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  validate(c, true);
  if (c.bc != "robin" && c.bc != "dirichlet") throw ConfigError("--bc must be robin or dirichlet");
  ensure_out_dir(c);
  const bool dirichlet = c.bc == "dirichlet";
  const std::vector<double> betas = dirichlet ? std::vector<double>{0.0} : c.betas;

  bool all_converged = true;
  json results = json::array();
  std::ostringstream csv;
  csv << "domain,p,beta,bc,lambda,residual,iterations,converged\n";
  for (const auto& d : c.domains) {
    const Mesh mesh = build_mesh(d, c);
    const std::string id = d;
    for (double p : c.ps)
      for (double b : betas) {
        json rec = {{"domain", id}, {"p", p}, {"bc", c.bc}};
        if (!dirichlet) rec["beta"] = b;
        EigenResult r;
        try {
          r = dirichlet ? dirichlet_eigenvalue(mesh, p, c.solver()) : robin_eigenvalue(mesh, p, b, c.solver());
          rec.update(report::to_json(r, c.with_field));
        } catch (const SolverError& e) {
          r.lambda = std::nan("");
          rec["error"] = e.what();
          rec["converged"] = false;
          err << "error: " << id << " p=" << format_number(p) << " beta=" << format_number(b) << ": " << e.what()
              << "\n";
        }
        all_converged = all_converged && r.converged;
        results.push_back(rec);
        csv << id << "," << format_number(p) << "," << (dirichlet ? "" : format_number(b)) << "," << c.bc << ","
            << format_number(r.lambda) << "," << format_number(r.residual) << "," << r.iterations << ","
            << (r.converged ? "true" : "false") << "\n";
        out << id << " p=" << format_number(p);
        if (!dirichlet) out << " beta=" << format_number(b);
        out << " lambda=" << format_number(r.lambda) << (r.converged ? "" : " NOT CONVERGED") << "\n";
      }
  }
  if (c.format == "csv")
    report::write_atomic(out_path(c, "eig.csv"), csv.str());
  else
    report::write_atomic(out_path(c, "eig.json"), dump(json{{"command", "eig"}, {"results", results}}));
  return all_converged ? kOk : kNotConverged;
}

// ---- verify ----

int cmd_verify(RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c, true);
  if (c.betas.empty()) throw ConfigError("verify needs --beta or --suite");
  for (double b : c.betas)
    if (!(b > 0.0)) throw ConfigError("verify needs positive beta values");
  ensure_out_dir(c);
  std::vector<double> betas = c.betas;
  std::sort(betas.begin(), betas.end());

  bool all_converged = true, all_ok = true;
  json reports = json::array();
  std::string csv = report::verify_csv_header() + "\n";
  for (const auto& d : c.domains) {
    const Mesh mesh = build_mesh(d, c);
    const auto stats = geometry_stats(mesh);
    const std::string id = d;
    for (double p : c.ps) {
      const auto opts = c.solver();
      const auto dir = dirichlet_eigenvalue(mesh, p, opts);
      const auto tor = torsion(mesh, p, opts);
      all_converged = all_converged && dir.converged && tor.converged;
      const auto family = bounds::default_source_family(mesh);
      std::vector<NeumannFluxResult> neumann;
      double nu = std::numeric_limits<double>::infinity();
      for (const auto& [name, f] : family) {
        neumann.push_back(neumann_flux_solve(mesh, p, f, opts));
        nu = std::min(nu, fem::volume_p_integral(mesh, f, p / (p - 1.0)) / neumann.back().energy);
      }
      for (double b : betas) {
        bounds::BoundsReport rep;
        try {
          const auto eig = robin_eigenvalue(mesh, p, b, opts);
          all_converged = all_converged && eig.converged;
          rep = bounds::evaluate_upper_bounds(mesh, p, b, eig, dir, tor.value, stats, c.slack);
          for (std::size_t k = 0; k < family.size(); ++k) {
            rep.certificates.push_back(bounds::lower_bound_certificate(mesh, p, b, family[k].second, neumann[k],
                                                                       opts, family[k].first));
            all_converged = all_converged && rep.certificates.back().converged;
          }
          bounds::attach_nu_estimate(rep, nu, stats);
        } catch (const SolverError& e) {
          err << "error: " << id << " p=" << format_number(p) << " beta=" << format_number(b) << ": " << e.what()
              << "\n";
          all_converged = false;
          all_ok = false;
          continue;
        }
        rep.domain = id;
        const bool ok = rep.all_satisfied();
        all_ok = all_ok && ok;
        reports.push_back(report::to_json(rep));
        csv += report::verify_csv_row(rep) + "\n";
        out << (ok ? "ok  " : "FAIL") << " " << id << " p=" << format_number(p) << " beta=" << format_number(b)
            << " lambda=" << format_number(rep.lambda_robin);
        for (const auto& [name, br] : rep.bounds)
          if (!br.satisfied) out << " violated:" << name << "(margin " << format_number(br.margin) << ")";
        for (const auto& cert : rep.certificates)
          if (!cert.satisfied) out << " violated:certificate:" << cert.f_id;
        out << "\n";
      }
    }
  }
  if (c.format == "csv")
    report::write_atomic(out_path(c, "verify.csv"), csv);
  else
    report::write_atomic(out_path(c, "verify.json"), dump(json{{"command", "verify"}, {"reports", reports}}));
  if (!all_ok) return kViolation;
  return all_converged ? kOk : kNotConverged;
}

// ---- sweep ----

struct SweepRow {
  std::string kind, domain;
  double p, beta, lambda, ratio, gap;
};

int cmd_sweep(RunConfig& c, std::ostream& out, std::ostream& err) {
  if (!c.beta_grid.empty()) {
    try {
      c.betas = parse_beta_grid(c.beta_grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  validate(c, true);
  if (c.betas.empty()) throw ConfigError("sweep needs --beta-grid or --beta");
  std::vector<double> betas = c.betas;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  for (double b : betas)
    if (!(b > 0.0)) throw ConfigError("sweep needs positive beta values");
  ensure_out_dir(c);

  const double nan = std::nan("");
  bool all_converged = true;
  std::vector<SweepRow> rows;
  for (const auto& d : c.domains) {
    const Mesh mesh = build_mesh(d, c);
    const std::string id = d;
    for (double p : c.ps) {
      const auto opts = c.solver();
      const auto dir = dirichlet_eigenvalue(mesh, p, opts);
      all_converged = all_converged && dir.converged;
      auto solve = [&](double b) {
        try {
          const auto r = robin_eigenvalue(mesh, p, b, opts);
          all_converged = all_converged && r.converged;
          return r.lambda;
        } catch (const SolverError& e) {
          err << "error: " << id << " p=" << format_number(p) << " beta=" << format_number(b) << ": " << e.what()
              << "\n";
          all_converged = false;
          return nan;
        }
      };
      std::vector<double> ratios;
      double last = nan;
      for (double b : betas) {
        const double lam = solve(b);
        last = lam;
        ratios.push_back(lam / b);
        rows.push_back({"point", id, p, b, lam, lam / b, dir.lambda - lam});
      }
      double limit = nan;
      if (betas.size() >= 2) limit = bounds::richardson_limit(betas[0], ratios[0], betas[1], ratios[1]);
      rows.push_back({"slope_limit", id, p, 0.0, nan, limit, nan});
      if (c.negative) {
        std::vector<double> neg;
        for (double b : betas) {
          if (b > 1.0) break;
          const double lam = solve(-b);
          neg.push_back(lam / -b);
          rows.push_back({"negative", id, p, -b, lam, lam / -b, dir.lambda - lam});
        }
        const double nlimit = neg.size() >= 2 ? bounds::richardson_limit(betas[0], neg[0], betas[1], neg[1]) : nan;
        rows.push_back({"slope_limit_negative", id, p, 0.0, nan, nlimit, nan});
      }
      rows.push_back({"final_gap", id, p, betas.back(), last, nan, dir.lambda - last});
      out << id << " p=" << format_number(p) << " slope_limit=" << format_number(limit)
          << " final_gap=" << format_number(rows.back().gap) << "\n";
    }
  }

  if (c.format == "csv") {
    std::string csv = "kind,domain,p,beta,lambda,lambda_over_beta,dirichlet_gap\n";
    for (const auto& r : rows)
      csv += r.kind + "," + r.domain + "," + format_number(r.p) + "," + format_number(r.beta) + "," +
             format_number(r.lambda) + "," + format_number(r.ratio) + "," + format_number(r.gap) + "\n";
    report::write_atomic(out_path(c, "sweep.csv"), csv);
  } else {
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"kind", r.kind},
                     {"domain", r.domain},
                     {"p", r.p},
                     {"beta", num(r.beta)},
                     {"lambda", num(r.lambda)},
                     {"lambda_over_beta", num(r.ratio)},
                     {"dirichlet_gap", num(r.gap)}});
    report::write_atomic(out_path(c, "sweep.json"), dump(json{{"command", "sweep"}, {"rows", arr}}));
  }
  return all_converged ? kOk : kNotConverged;
}

}  // namespace

std::vector<double> parse_beta_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 3 || parts.size() > 4) throw std::invalid_argument("beta grid must be lo:hi:log|lin[:n]");
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + s + "' in beta grid");
    }
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad number '" + s + "' in beta grid");
    return v;
  };
  const double lo = to_double(parts[0]), hi = to_double(parts[1]);
  const std::string& mode = parts[2];
  if (mode != "log" && mode != "lin") throw std::invalid_argument("beta grid spacing must be log or lin");
  if (lo > hi) throw std::invalid_argument("empty beta grid (lo > hi)");
  if (mode == "log" && !(lo > 0.0)) throw std::invalid_argument("log beta grid needs lo > 0");
  int n;
  if (parts.size() == 4) {
    const double v = to_double(parts[3]);
    if (v != std::floor(v) || v < 1 || v > 100000) throw std::invalid_argument("beta grid count must be a positive integer");
    n = static_cast<int>(v);
  } else if (mode == "log") {
    n = static_cast<int>(std::lround(std::log10(hi / lo))) + 1;
  } else {
    n = 11;
  }
  if (lo == hi) n = 1;
  if (n == 1 && lo != hi) throw std::invalid_argument("a beta grid with distinct ends needs at least 2 points");
  std::vector<double> g;
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    double v = mode == "log" ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
    if (k == n - 1) v = hi;
    if (mode == "log" && parts.size() == 3) {
      // decade grids land on round numbers
      const double r = std::pow(10.0, std::round(std::log10(v)));
      if (std::abs(r - v) <= 1e-9 * v) v = r;
    }
    g.push_back(v);
  }
  return g;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robin eigenvalues of the p-Laplacian and their bounds", "robin-bounds"};
  app.set_help_flag("--help", "print this help");
  app.set_config("--config", "", "key=value file mirroring the flags (flags override it)");
  app.require_subcommand(1);
  RunConfig c;
  app.add_option("--domain", c.domains, "kind:params or file:path (repeatable)");
  app.add_option("--p", c.ps, "exponent(s), comma separated")->delimiter(',');
  app.add_option("--beta", c.betas, "Robin parameter(s), comma separated")->delimiter(',');
  app.add_option("--beta-grid", c.beta_grid, "lo:hi:log|lin[:n]");
  app.add_option("--h", c.h, "target mesh size");
  app.add_option("--refine", c.refine, "uniform refinements after generation");
  app.add_option("--tol", c.tol, "relative eigenvalue tolerance");
  app.add_option("--max-iter", c.max_iter, "outer iteration cap");
  app.add_option("--seed", c.seed, "initial-guess seed");
  app.add_option("--slack", c.slack, "relative discretization slack for bound verdicts");
  app.add_option("--out", c.out_dir, "output directory");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--suite", c.suite, "named domain/p/beta suite (default)");
  app.add_option("--bc", c.bc, "eig: robin or dirichlet")->check(CLI::IsMember({"robin", "dirichlet"}));
  app.add_flag("--field", c.with_field, "eig: include nodal eigenfunction values");
  app.add_flag("--negative", c.negative, "sweep: also solve at -beta for beta <= 1");

  auto* mesh_cmd = app.add_subcommand("mesh", "generate meshes and print geometry");
  auto* eig_cmd = app.add_subcommand("eig", "first Robin (or Dirichlet) eigenvalues");
  auto* verify_cmd = app.add_subcommand("verify", "evaluate every bound and certificate");
  auto* sweep_cmd = app.add_subcommand("sweep", "beta sweep with slope and gap summaries");
  for (auto* sub : {mesh_cmd, eig_cmd, verify_cmd, sweep_cmd}) sub->fallthrough();

  std::vector<const char*> argv;
  argv.push_back("robin-bounds");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    if (*mesh_cmd) return cmd_mesh(c, out);
    if (*eig_cmd) return cmd_eig(c, out, err);
    if (*verify_cmd) return cmd_verify(c, out, err);
    return cmd_sweep(c, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  } catch (const MeshError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace robin::cli
