#include "pinchlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "internal/json_util.hpp"
#include "pinchlab/errors.hpp"

namespace pinchlab {
namespace {

using ojson = nlohmann::ordered_json;

ojson number_to_json(double v) {
  if (std::isfinite(v)) return v;
  return ojson{{"nonfinite", format_number(v)}};
}

double number_from_json(const ojson& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object() && j.size() == 1 && j.contains("nonfinite") && j["nonfinite"].is_string()) {
    const auto s = j["nonfinite"].get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(where + ": expected a number");
}

ojson entries_to_json(const Entries& es) {
  ojson j = ojson::object();
  for (const auto& e : es) {
    std::visit(
        [&](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, double>) {
            j[e.key] = number_to_json(v);
          } else {
            j[e.key] = v;
          }
        },
        e.value);
  }
  return j;
}

Entries entries_from_json(const ojson& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  Entries es;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      es.push_back({k, v.get<bool>()});
    } else if (v.is_string()) {
      es.push_back({k, v.get<std::string>()});
    } else {
      es.push_back({k, number_from_json(v, where + "." + k)});
    }
  }
  return es;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool VerificationReport::passed() const noexcept {
  if (records.empty()) return false;
  for (const auto& r : records) {
    if (!r.passed) return false;
  }
  return true;
}

std::string VerificationReport::to_json() const {
  ojson j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["environment"] = entries_to_json(environment);
  j["constants"] = entries_to_json(constants);
  ojson recs = ojson::array();
  for (const auto& r : records) {
    ojson o;
    o["id"] = r.id;
    o["passed"] = r.passed;
    o["params"] = entries_to_json(r.params);
    o["measured"] = entries_to_json(r.measured);
    o["tolerance"] = entries_to_json(r.tolerance);
    o["note"] = r.note;
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  return j.dump(2) + "\n";
}

VerificationReport VerificationReport::from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text.begin(), text.end());
  } catch (const ojson::parse_error& e) {
    int line = 0, column = 0;
    detail::locate(text, e.byte == 0 ? 0 : e.byte - 1, line, column);
    throw ParseError("malformed report JSON at line " + std::to_string(line) + ", column " + std::to_string(column),
                     line, column);
  }
  try {
    VerificationReport rep;
    rep.suite = j.at("suite").get<std::string>();
    rep.environment = entries_from_json(j.at("environment"), "environment");
    rep.constants = entries_from_json(j.at("constants"), "constants");
    for (const auto& o : j.at("records")) {
      CheckRecord r;
      r.id = o.at("id").get<std::string>();
      r.passed = o.at("passed").get<bool>();
      r.params = entries_from_json(o.at("params"), r.id + ".params");
      r.measured = entries_from_json(o.at("measured"), r.id + ".measured");
      r.tolerance = entries_from_json(o.at("tolerance"), r.id + ".tolerance");
      r.note = o.at("note").get<std::string>();
      rep.records.push_back(std::move(r));
    }
    if (j.contains("passed") && j["passed"].get<bool>() != rep.passed())
      throw ParseError("report: overall \"passed\" disagrees with the records");
    return rep;
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_field(columns[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_number(*d);
      } else {
        out += csv_field(std::get<std::string>(row[i]));
      }
    }
    out += '\n';
  }
  return out;
}

const std::vector<ToleranceDoc>& default_tolerances() {
  static const std::vector<ToleranceDoc> t = {
      {"identity", 1e-10, "closed-form identities, distance quadrature and gauge cross-checks"},
      {"bound_slack", 0.0, "smallest admissible relative slack in the bound sweeps"},
      {"slope", 0.02, "allowed deviation of the sharpness slope from -1/2"},
      {"yaba_flatness", 1.1, "largest admissible max/min of yaba_ratio"},
      {"first_variation", 1e-8, "absolute error of the first variation of inj against 1/2"},
      {"projection_residual", 1e-6, "relative residual of the horizontal projection at 4096 nodes"},
      {"refinement_drop", 10.0, "required residual decrease from 4096 to 8192 nodes"},
      {"pure_re", 1e-10, "relative residual for a pure Re(c dw^2) input"},
      {"pure_lie", 1e-8, "relative residual for a pure Lie-derivative input"},
      {"wp_quadrature", 1e-8, "relative gap between wp_speed and its quadrature"},
      {"stability", 0.05, "relative change of an empirical constant under refinement"},
      {"lipschitz_stability", 0.02, "relative change of the Lipschitz constant under refinement"},
      {"delta", 0.01, "thick-part threshold"},
  };
  return t;
}

void RunConfig::validate() const {
  auto in_range = [](double v) { return v > 0.0 && v <= kMaxCollarLength; };
  if (!in_range(ell_min) || !in_range(ell_max))
    throw DomainError("collar lengths must lie in (0, 2 asinh 1] = (0, 1.7627471740390861]; got ell-min = " +
                      format_number(ell_min) + ", ell-max = " + format_number(ell_max));
  if (!(ell_min < ell_max))
    throw DomainError("ell-min = " + format_number(ell_min) + " must be below ell-max = " + format_number(ell_max));
  if (samples < 16 || grid < 16 || time_grid < 16)
    throw DomainError("samples, grid and time-grid must each be at least 16");
  for (const auto& [name, value] : tolerances) {
    bool known = false;
    for (const auto& d : default_tolerances()) known = known || name == d.name;
    if (!known) {
      std::string names;
      for (const auto& d : default_tolerances()) names += std::string(names.empty() ? "" : ", ") + d.name;
      throw DomainError("unknown tolerance \"" + name + "\"; known names: " + names);
    }
    if (!std::isfinite(value) || value < 0.0)
      throw DomainError("tolerance " + name + " must be finite and nonnegative");
  }
}

double RunConfig::tol(std::string_view name) const {
  if (auto it = tolerances.find(std::string(name)); it != tolerances.end()) return it->second;
  for (const auto& d : default_tolerances()) {
    if (name == d.name) return d.value;
  }
  throw DomainError("unknown tolerance \"" + std::string(name) + "\"");
}

Table curve_table(const CurveReport& r) {
  Table t{"curve", {"t", "ell", "wp_speed", "L", "S", "ratio", "d_delta"}, {}};
  for (std::size_t i = 0; i < r.times.size(); ++i)
    t.rows.push_back({r.times[i], r.ell[i], r.wp_speed[i], r.L[i], r.S[i], r.ratio[i], r.d_delta[i]});
  return t;
}

std::string curve_to_json(const CurveReport& r, const PinchSchedule& sched, const CurveConfig& cfg) {
  ojson j;
  j["schedule"] = ojson::parse(sched.to_json());
  j["config"] = {{"time_samples", cfg.time_samples},
                 {"d_samples", cfg.d_samples},
                 {"window", cfg.window},
                 {"delta", cfg.delta}};
  j["finite_length"] = r.finite_length;
  j["tail_exponent"] = number_to_json(r.tail.exponent);
  j["K0"] = number_to_json(r.K0);
  j["warnings"] = r.warnings;
  ojson cols = ojson::object();
  const std::pair<const char*, const std::vector<double>*> series[] = {
      {"t", &r.times}, {"ell", &r.ell}, {"wp_speed", &r.wp_speed}, {"L", &r.L},
      {"S", &r.S},     {"ratio", &r.ratio}, {"d_delta", &r.d_delta}};
  for (const auto& [name, v] : series) {
    ojson a = ojson::array();
    for (double x : *v) a.push_back(number_to_json(x));
    cols[name] = std::move(a);
  }
  j["series"] = std::move(cols);
  return j.dump(2) + "\n";
}

const std::vector<TableSchema>& table_schemas() {
  static const std::vector<TableSchema> s = {
      {"collar",
       "profile",
       {{"s", "conformal coordinate in [-X, X]"},
        {"d", "distance to the nearer collar boundary"},
        {"rho", "conformal factor rho(s)"},
        {"inj", "injectivity radius"},
        {"inj_lo", "lower bound asinh(e^-d)"},
        {"inj_hi", "upper bound asinh((1 + sqrt 2) e^-d)"}}},
      {"pinch",
       "curve",
       {{"t", "sample time"},
        {"ell", "core length l(t)"},
        {"wp_speed", "WP speed of the horizontal part, f(l) |l'(t)|"},
        {"L", "remaining WP length L(t); inf when the tail diverges"},
        {"S", "sup over d <= window of |inj^1/2 - I^1/2|, I the limit profile"},
        {"ratio", "S / L (0 when S = 0 or L is infinite)"},
        {"d_delta", "distance from the collar end to the delta-thin part"}}},
      {"verify A2",
       "identities",
       {{"ell", "core length"},
        {"inj_center_error", "|inj(0) - l/2|"},
        {"boundary_identity_error", "|sinh(l/2) sinh(d(0)) - 1|"},
        {"distance_quadrature_error", "worst relative gap of dist_to_boundary against quadrature of rho"},
        {"gauge_error", "worst relative gap between the inversion and Fermi forms of the boundary gauge"},
        {"inj_distance_error", "worst relative gap of inj(s) against inj_from_distance(d(s))"}}},
      {"verify A3",
       "bounds",
       {{"ell", "core length"},
        {"radius", "ball radius r (0 for the sandwich row)"},
        {"check", "sandwich, rho_ratio, inj_vs_rho or inj_comparison"},
        {"worst_slack", "smallest relative slack over the grid"},
        {"violations", "points where the bound fails"}}},
      {"verify L2.1",
       "lipschitz",
       {{"schedule", "suite schedule name"},
        {"constant", "max difference quotient of inj in t"},
        {"constant_refined", "the same on the doubled grids"},
        {"oracle", "max |l'| |d inj / dl| over the same samples"}}},
      {"verify L2.2",
       "rootinj",
       {{"ell", "core length"}, {"center_ratio", "|d/dt inj^1/2| / WP speed at the collar centre"}}},
      {"verify L2.2",
       "projection",
       {{"ell", "core length"},
        {"residual_4096", "relative residual of horizontal_project(dl_variation) at 4096 nodes"},
        {"residual_8192", "the same at 8192 nodes"},
        {"pure_re_residual", "relative residual for Re(c dw^2) input"},
        {"pure_lie_residual", "relative residual for L_X g input"},
        {"wp_quadrature_error", "relative gap of wp_speed against quadrature"}}},
      {"verify L2.4",
       "first_variation",
       {{"ell", "core length"}, {"value", "first_variation_inj(dl_variation)"}, {"error", "|value - 1/2|"}}},
      {"verify L2.5",
       "sharpness",
       {{"ell", "core length"},
        {"inj_center", "inj(0) = l/2"},
        {"norm_over_speed", "|Re(dw^2)|_g(0) / wp_speed(l, 1)"},
        {"yaba_ratio", "norm_over_speed times inj(0)^1/2"}}},
      {"verify L3.1",
       "nesting",
       {{"schedule", "suite schedule name"},
        {"mu", "nesting offset"},
        {"K0", "constant used for the sets"},
        {"pairs_checked", "time pairs compared"},
        {"violations", "containment failures"},
        {"thick_claim_violations", "points of the initial thick part that leave the mu^2-thick part"}}},
      {"verify L3.2",
       "equivalence",
       {{"schedule", "suite schedule name"},
        {"t0", "admissible start time"},
        {"C1", "max conformal-factor ratio on the thick part"},
        {"C2", "max inj ratio on the thick part"},
        {"C", "Cauchy constant"},
        {"C1_h", "conformal-factor ratio against the limit"},
        {"C2_h", "inj ratio against the limit"}}},
      {"verify L3.3",
       "evolution",
       {{"omega", "tensor name"},
        {"k", "derivative order"},
        {"C_emp", "smallest admissible constant"},
        {"C_emp_refined", "the same with every time step halved"}}},
      {"verify L3.4",
       "separation",
       {{"beta", "thick threshold"},
        {"Q", "requested separation"},
        {"ell", "core length"},
        {"epsilon", "thin threshold"},
        {"distance", "distance between the thick and thin parts"},
        {"proof_lower_bound", "the analytic lower bound for the distance"}}},
      {"verify T1.2",
       "convergence",
       {{"schedule", "suite schedule name"},
        {"t", "sample time"},
        {"ell", "core length"},
        {"L", "remaining WP length"},
        {"S", "sup over d <= window of |inj^1/2 - I^1/2|"},
        {"bound", "shared K0 times L"}}},
  };
  return s;
}

}  // namespace pinchlab
