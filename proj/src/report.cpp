#include "robin/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace robin::report {

using nlohmann::json;

namespace {

// JSON has no NaN; failed quantities become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

json to_json(const bounds::BoundsReport& r) {
  json j;
  j["domain"] = r.domain;
  j["p"] = number(r.p);
  j["beta"] = number(r.beta);
  j["lambda"] = number(r.lambda_robin);
  j["lambda_dirichlet"] = number(r.lambda_dirichlet);
  j["torsion"] = number(r.torsion_value);
  j["kbar"] = number(r.kbar);
  j["slack_budget"] = number(r.slack_budget);
  json b = json::object();
  for (const auto& [name, rec] : r.bounds)
    b[name] = {{"value", number(rec.value)},
               {"satisfied", rec.satisfied},
               {"margin", number(rec.margin)},
               {"kind", rec.lower ? "lower" : "upper"}};
  j["bounds"] = std::move(b);
  json certs = json::array();
  for (const auto& c : r.certificates)
    certs.push_back({{"f", c.f_id},
                     {"j_value", number(c.j_value)},
                     {"energy_v", number(c.energy_v)},
                     {"rhs", number(c.rhs)},
                     {"slack", number(c.slack)},
                     {"satisfied", c.satisfied},
                     {"converged", c.converged}});
  j["certificates"] = std::move(certs);
  json info = json::object();
  for (const auto& [k, v] : r.info) info[k] = number(v);
  j["info"] = std::move(info);
  j["all_satisfied"] = r.all_satisfied();
  return j;
}

json to_json(const EigenResult& r, bool with_field) {
  json j;
  j["lambda"] = number(r.lambda);
  j["residual"] = number(r.residual);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  if (r.eigenfunction.size() > 0) {
    j["eigenfunction_min"] = number(r.eigenfunction.minCoeff());
    j["eigenfunction_max"] = number(r.eigenfunction.maxCoeff());
  }
  if (with_field) {
    json f = json::array();
    for (double v : r.eigenfunction) f.push_back(number(v));
    j["eigenfunction"] = std::move(f);
  }
  return j;
}

std::string verify_csv_header() {
  return "domain,p,beta,lambda,upper_dirichlet,upper_torsion,trivial_min,polya_p2,hersch,all_satisfied";
}

std::string verify_csv_row(const bounds::BoundsReport& r) {
  auto cell = [&](const char* name) {
    auto it = r.bounds.find(name);
    return it == r.bounds.end() ? std::string() : format_number(it->second.value);
  };
  return r.domain + "," + format_number(r.p) + "," + format_number(r.beta) + "," + format_number(r.lambda_robin) +
         "," + cell("upper_dirichlet") + "," + cell("upper_torsion") + "," + cell("trivial_min") + "," +
         cell("polya_p2") + "," + cell("hersch") + "," + (r.all_satisfied() ? "true" : "false");
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace robin::report
