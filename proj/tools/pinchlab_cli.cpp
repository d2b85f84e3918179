// Command-line front end over the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinchlab/pinchlab.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Raised for input errors; main() prints the message and exits with 2.
struct UsageError {
  std::string message;
};

std::string num(double v) {
  if (v != v) return "nan";
  if (v > 1.7976931348623157e308) return "inf";
  if (v < -1.7976931348623157e308) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check(pl_status s) {
  if (s == PL_OK) return;
  std::string msg = pl_last_error_message();
  if (s == PL_ERR_PARSE && pl_last_error_line() > 0)
    msg += " (line " + std::to_string(pl_last_error_line()) + ", column " + std::to_string(pl_last_error_column()) +
           ")";
  throw UsageError{std::string(pl_status_name(s)) + ": " + msg};
}

// Owns a string returned by the C interface.
std::string take(char* s) {
  std::string out = s ? s : "";
  pl_string_free(s);
  return out;
}

std::string fetch(pl_status (*fn)(char**)) {
  char* s = nullptr;
  check(fn(&s));
  return take(s);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError{"cannot write " + p.string()};
  f << content;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError{"cannot create output directory " + dir + ": " + ec.message()};
  return dir;
}

// --schedule takes a file path or an inline spec.
std::string schedule_text(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream f(arg, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  return arg;
}

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError{"--tol expects NAME=VALUE, got \"" + item + "\""};
    const std::string name = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out[name] = v;
    } catch (const std::exception&) {
      throw UsageError{"--tol " + name + ": \"" + value + "\" is not a number"};
    }
  }
  return out;
}

struct Options {
  double ell = 1.0;
  double ell_min = 1e-3;
  double ell_max = 1.7627471740390860504652186499596;
  std::size_t samples = 64;
  std::size_t profile = 11;
  std::size_t grid = 512;
  std::size_t time_grid = 32;
  std::string schedule;
  std::vector<std::string> tol;
  bool json = false;
  std::string out;
  std::string suite;
};

int cmd_collar(const Options& o) {
  pl_collar* c = nullptr;
  check(pl_collar_create(o.ell, &c));
  std::unique_ptr<pl_collar, decltype(&pl_collar_destroy)> guard(c, pl_collar_destroy);
  const double X = pl_collar_half_width(c);
  double inj0 = 0, rho0 = 0, area = 0;
  check(pl_collar_inj(c, 0.0, &inj0));
  check(pl_collar_rho(c, 0.0, &rho0));
  check(pl_collar_area(c, -X, X, &area));
  if (o.profile < 2) throw UsageError{"--samples must be at least 2 for the collar profile"};

  nlohmann::ordered_json j;
  j["ell"] = pl_collar_ell(c);
  j["X"] = X;
  j["d0"] = pl_collar_tau_max(c);
  j["rho0"] = rho0;
  j["inj0"] = inj0;
  j["area"] = area;
  nlohmann::ordered_json bounds = nlohmann::ordered_json::array();
  bool all_pass = true;
  for (double r : {0.5, 1.0, 2.0}) {
    int passed = 0;
    double slack = 0;
    check(pl_collar_bound_sweep(c, r, 512, &passed, &slack));
    all_pass = all_pass && passed;
    bounds.push_back({{"radius", r}, {"passed", passed != 0}, {"worst_relative_slack", slack}});
  }
  j["bounds"] = bounds;

  std::string csv = "s,d,rho,inj,inj_lo,inj_hi\n";
  nlohmann::ordered_json prof = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < o.profile; ++k) {
    const double s = X * (2.0 * static_cast<double>(k) / static_cast<double>(o.profile - 1) - 1.0);
    double d = 0, rho = 0, inj = 0, lo = 0, hi = 0;
    check(pl_collar_dist_to_boundary(c, s, &d));
    check(pl_collar_rho(c, s, &rho));
    check(pl_collar_inj(c, s, &inj));
    check(pl_inj_bounds(d, &lo, &hi));
    csv += num(s) + "," + num(d) + "," + num(rho) + "," + num(inj) + "," + num(lo) + "," + num(hi) + "\n";
    prof.push_back({{"s", s}, {"d", d}, {"rho", rho}, {"inj", inj}, {"inj_lo", lo}, {"inj_hi", hi}});
  }
  j["profile"] = prof;
  const std::string json = j.dump(2) + "\n";

  if (o.json) {
    std::cout << json;
  } else {
    std::cout << "ell   = " << num(pl_collar_ell(c)) << "\n"
              << "X     = " << num(X) << "\n"
              << "d(0)  = " << num(pl_collar_tau_max(c)) << "\n"
              << "rho0  = " << num(rho0) << "\n"
              << "inj0  = " << num(inj0) << "\n"
              << "area  = " << num(area) << "\n";
    for (const auto& b : bounds)
      std::cout << "bounds r = " << num(b["radius"].get<double>()) << ": " << (b["passed"].get<bool>() ? "pass" : "FAIL")
                << " (worst relative slack " << num(b["worst_relative_slack"].get<double>()) << ")\n";
    std::cout << "profile:\n" << csv;
  }
  if (!o.out.empty()) {
    const auto dir = prepare_dir(o.out);
    write_file(dir / "collar.json", json);
    write_file(dir / "collar_profile.csv", csv);
  }
  return all_pass ? kExitPass : kExitFail;
}

int cmd_verify(const Options& o) {
  pl_config* cfg = nullptr;
  check(pl_config_create(&cfg));
  std::unique_ptr<pl_config, decltype(&pl_config_destroy)> cfg_guard(cfg, pl_config_destroy);
  check(pl_config_set_ell_range(cfg, o.ell_min, o.ell_max));
  check(pl_config_set_samples(cfg, o.samples));
  check(pl_config_set_grid(cfg, o.grid));
  check(pl_config_set_time_grid(cfg, o.time_grid));
  for (const auto& [name, v] : parse_tolerances(o.tol)) check(pl_config_set_tolerance(cfg, name.c_str(), v));
  if (!o.schedule.empty()) check(pl_config_set_schedule(cfg, schedule_text(o.schedule).c_str()));
  check(pl_config_validate(cfg));

  pl_report* rep = nullptr;
  check(pl_verify(o.suite.c_str(), cfg, &rep));
  std::unique_ptr<pl_report, decltype(&pl_report_destroy)> rep_guard(rep, pl_report_destroy);
  char* s = nullptr;
  check(pl_report_json(rep, &s));
  const std::string json = take(s);
  const bool passed = pl_report_passed(rep) != 0;
  if (o.json) {
    std::cout << json;
  } else {
    check(pl_report_summary(rep, &s));
    std::cout << take(s) << "suite " << o.suite << ": " << (passed ? "PASS" : "FAIL") << "\n";
  }
  if (!o.out.empty()) {
    const auto dir = prepare_dir(o.out);
    write_file(dir / (o.suite + ".json"), json);
    for (std::size_t i = 0; i < pl_report_table_count(rep); ++i) {
      check(pl_report_table_csv(rep, i, &s));
      write_file(dir / (o.suite + "_" + pl_report_table_name(rep, i) + ".csv"), take(s));
    }
  }
  return passed ? kExitPass : kExitFail;
}

int cmd_pinch(const Options& o) {
  if (o.schedule.empty()) throw UsageError{"pinch needs --schedule PATH|SPEC"};
  pl_schedule* sched = nullptr;
  check(pl_schedule_parse(schedule_text(o.schedule).c_str(), &sched));
  std::unique_ptr<pl_schedule, decltype(&pl_schedule_destroy)> sg(sched, pl_schedule_destroy);
  pl_curve_config cc;
  pl_curve_config_default(&cc);
  cc.time_samples = o.time_grid;
  for (const auto& [name, v] : parse_tolerances(o.tol)) {
    if (name != "delta") throw UsageError{"pinch accepts only --tol delta=VALUE"};
    cc.delta = v;
  }
  pl_curve* curve = nullptr;
  check(pl_curve_simulate(sched, &cc, &curve));
  std::unique_ptr<pl_curve, decltype(&pl_curve_destroy)> cg(curve, pl_curve_destroy);
  char* s = nullptr;
  check(pl_curve_csv(curve, &s));
  const std::string csv = take(s);
  check(pl_curve_json(curve, &s));
  const std::string json = take(s);
  for (std::size_t i = 0; i < pl_curve_warning_count(curve); ++i)
    std::cerr << "warning: " << pl_curve_warning(curve, i) << "\n";
  std::cout << (o.json ? json : csv);
  if (!o.out.empty()) {
    const auto dir = prepare_dir(o.out);
    write_file(dir / "pinch_curve.csv", csv);
    write_file(dir / "pinch_curve.json", json);
  }
  return kExitPass;
}

std::string suite_list() {
  std::string s;
  for (std::size_t i = 0; i < pl_suite_count(); ++i) s += std::string(i ? ", " : "") + pl_suite_id(i);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pinchlab: verification of pinching estimates on the hyperbolic collar model"};
  app.require_subcommand(1);
  std::string footer = "Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error.\n"
                       "PINCHLAB_THREADS caps the worker count.\n\nCSV outputs:\n";
  try {
    footer += fetch(pl_csv_schema_doc) + "\nTolerances (--tol NAME=VALUE):\n" + fetch(pl_tolerance_doc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  }
  app.footer(footer);

  Options o;
  auto* collar = app.add_subcommand("collar", "closed-form values, profile and bounds for one collar");
  collar->add_option("--ell", o.ell, "core length in (0, 2 asinh 1]")->required();
  collar->add_option("--samples", o.profile, "points of the inj profile across [-X, X]")->capture_default_str();
  collar->add_flag("--json", o.json, "print a JSON record instead of text");
  collar->add_option("--out", o.out, "write collar.json and collar_profile.csv into DIR");

  auto* verify = app.add_subcommand("verify", "run a lemma verification suite");
  verify->add_option("id", o.suite, "suite id: " + suite_list())->required();
  verify->add_option("--ell-min", o.ell_min, "lower end of the length sweep")->capture_default_str();
  verify->add_option("--ell-max", o.ell_max, "upper end of the length sweep")->capture_default_str();
  verify->add_option("--samples", o.samples, "lengths in the sweep (>= 16)")->capture_default_str();
  verify->add_option("--grid", o.grid, "collar grid size (>= 16)")->capture_default_str();
  verify->add_option("--time-grid", o.time_grid, "sampled times per schedule (>= 16)")->capture_default_str();
  verify->add_option("--schedule", o.schedule, "schedule file or inline spec replacing the default suite");
  verify->add_option("--tol", o.tol, "tolerance override NAME=VALUE (repeatable)");
  verify->add_flag("--json", o.json, "print the JSON report instead of the summary");
  verify->add_option("--out", o.out, "write <id>.json and <id>_<table>.csv into DIR");

  auto* pinch = app.add_subcommand("pinch", "simulate a pinch schedule and emit the curve table");
  for (auto* sub : {collar, verify, pinch}) sub->footer(footer);
  pinch->add_option("--schedule", o.schedule, "schedule file (JSON) or inline spec, e.g. power:p=3")->required();
  pinch->add_option("--time-grid", o.time_grid, "sampled times")->capture_default_str();
  pinch->add_option("--tol", o.tol, "delta=VALUE sets the thick-part threshold");
  pinch->add_flag("--json", o.json, "print JSON instead of CSV");
  pinch->add_option("--out", o.out, "write pinch_curve.csv and pinch_curve.json into DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (collar->parsed()) return cmd_collar(o);
    if (verify->parsed()) {
      bool known = false;
      for (std::size_t i = 0; i < pl_suite_count(); ++i) known = known || o.suite == pl_suite_id(i);
      if (!known) throw UsageError{"unknown suite id \"" + o.suite + "\"; valid ids: " + suite_list()};
      return cmd_verify(o);
    }
    return cmd_pinch(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
