#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "internal/numeric.hpp"
#include "internal/parallel.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/horizontal.hpp"
#include "pinchlab/pinch.hpp"
#include "pinchlab/report.hpp"
#include "pinchlab/thick_thin.hpp"

namespace pinchlab {
namespace {

using detail::log_spaced;
using detail::relative_change;

constexpr double kInf = std::numeric_limits<double>::infinity();

double num(std::size_t n) { return static_cast<double>(n); }

// Short form for record ids ("0.05", "0.88137").
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Rec {
  CheckRecord r;
  explicit Rec(std::string id) { r.id = std::move(id); }
  Rec& param(std::string k, Scalar v) {
    r.params.push_back({std::move(k), std::move(v)});
    return *this;
  }
  Rec& measure(std::string k, Scalar v) {
    r.measured.push_back({std::move(k), std::move(v)});
    return *this;
  }
  Rec& tol(std::string k, double v) {
    r.tolerance.push_back({std::move(k), v});
    return *this;
  }
  Rec& note(std::string n) {
    r.note = std::move(n);
    return *this;
  }
  CheckRecord pass(bool ok) {
    r.passed = ok;
    return std::move(r);
  }
};

struct NamedSchedule {
  std::string name;
  PinchSchedule sched;
};

// Power laws p = 2, 3, 4, the linear negative control and a collar that
// survives at l_T = 0.5; a user schedule replaces the whole list.
std::vector<NamedSchedule> suite_schedules(const RunConfig& cfg) {
  if (cfg.schedule) return {{"user", PinchSchedule::parse(*cfg.schedule)}};
  std::vector<NamedSchedule> v = {{"power_p2", PinchSchedule::power(1.0, 2.0, 0.25)},
                                  {"power_p3", PinchSchedule::power(1.0, 3.0, 0.25)},
                                  {"power_p4", PinchSchedule::power(1.0, 4.0, 0.25)}};
  v.push_back({"linear", PinchSchedule::power(1.0, 1.0, 0.25)});
  v.push_back({"surviving_ellT_0.5", PinchSchedule::power(1.0, 2.0, 0.25, 0.5)});
  return v;
}

Entries environment(const RunConfig& cfg) {
  Entries e = {{"ell_min", cfg.ell_min},
               {"ell_max", cfg.ell_max},
               {"samples", num(cfg.samples)},
               {"grid", num(cfg.grid)},
               {"time_grid", num(cfg.time_grid)},
               {"schedule", cfg.schedule ? *cfg.schedule : std::string("default suite")},
               {"float", std::string("IEEE-754 binary64")}};
  for (const auto& d : default_tolerances()) e.push_back({std::string("tol.") + d.name, cfg.tol(d.name)});
  return e;
}

bool stable(double a, double b, double tol) { return std::isfinite(a) && std::isfinite(b) && relative_change(a, b) <= tol; }

std::vector<double> sweep(const RunConfig& cfg) { return log_spaced(cfg.ell_min, cfg.ell_max, cfg.samples); }

// ---- A2: closed-form identities -------------------------------------------

SuiteOutput suite_A2(const RunConfig& cfg) {
  SuiteOutput out;
  const double tol = cfg.tol("identity");
  Table t{"identities",
          {"ell", "inj_center_error", "boundary_identity_error", "distance_quadrature_error", "gauge_error",
           "inj_distance_error"},
          {}};
  double e_inj = 0, e_bd = 0, e_dist = 0, e_gauge = 0, e_injd = 0;
  for (double ell : sweep(cfg)) {
    const CollarParams c(ell);
    const double X = c.half_width();
    const double d0 = dist_to_boundary(c, 0.0);
    const double a = std::fabs(injectivity_radius(c, 0.0) - ell / 2.0);
    const double b = std::fabs(c.sinh_half() * std::sinh(d0) - 1.0);
    double dq = 0, gauge = 0, injd = 0;
    for (double frac : {0.0, 0.25, 0.5, 0.75, 0.95}) {
      const double s = frac * X;
      const double quad = detail::integrate([&](double x) { return conformal_factor(c, x); }, s, X, 1e-13);
      dq = std::max(dq, relative_change(dist_to_boundary(c, s), quad));
      const double d = dist_to_boundary(c, s);
      injd = std::max(injd, relative_change(injectivity_radius(c, s), injectivity_radius_from_distance(c, d)));
      gauge = std::max(gauge, relative_change(metric_in_boundary_gauge(c, d), boundary_gauge_rho(c, d)));
    }
    e_inj = std::max(e_inj, a);
    e_bd = std::max(e_bd, b);
    e_dist = std::max(e_dist, dq);
    e_gauge = std::max(e_gauge, gauge);
    e_injd = std::max(e_injd, injd);
    t.rows.push_back({ell, a, b, dq, gauge, injd});
  }
  auto make = [&](const char* id, const char* what, double err) {
    return Rec(id)
        .param("ell_min", cfg.ell_min)
        .param("ell_max", cfg.ell_max)
        .param("samples", num(cfg.samples))
        .measure(what, err)
        .tol("identity", tol)
        .pass(std::isfinite(err) && err <= tol);
  };
  auto& R = out.report.records;
  R.push_back(make("inj_center", "max_abs_error", e_inj));
  R.push_back(make("boundary_identity", "max_abs_error", e_bd));
  R.push_back(make("distance_quadrature", "max_relative_error", e_dist));
  R.push_back(make("boundary_gauge", "max_relative_error", e_gauge));
  R.push_back(make("inj_distance_form", "max_relative_error", e_injd));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- A3: pointwise bounds ---------------------------------------------------

SuiteOutput suite_A3(const RunConfig& cfg) {
  SuiteOutput out;
  const double slack_tol = -cfg.tol("bound_slack");
  Table t{"bounds", {"ell", "radius", "check", "worst_slack", "violations"}, {}};
  double sandwich_worst = kInf;
  std::size_t sandwich_viol = 0, sandwich_checks = 0;
  struct Acc {
    double worst = kInf;
    std::size_t checks = 0, violations = 0;
    void add(const BoundSlack& b) {
      worst = std::min(worst, b.worst_relative_slack);
      checks += b.checks;
      violations += b.violations;
    }
  };
  const double radii[] = {0.5, 1.0, 2.0};
  Acc acc[3][3];
  for (double ell : sweep(cfg)) {
    const CollarParams c(ell);
    double worst = kInf;
    std::size_t viol = 0;
    for (double s : chebyshev_s_grid(c, cfg.grid)) {
      const double inj = injectivity_radius(c, s);
      const auto b = inj_bounds(dist_to_boundary(c, s));
      const double slack = std::min(inj - b.lo, b.hi - inj) / inj;
      worst = std::min(worst, slack);
      if (slack < slack_tol) ++viol;
      ++sandwich_checks;
    }
    sandwich_worst = std::min(sandwich_worst, worst);
    sandwich_viol += viol;
    t.rows.push_back({ell, 0.0, std::string("sandwich"), worst, num(viol)});
    for (int k = 0; k < 3; ++k) {
      const auto rep = pointwise_bound_sweep(c, radii[k], cfg.grid);
      const BoundSlack* parts[] = {&rep.rho_ratio, &rep.inj_vs_rho, &rep.inj_comparison};
      const char* names[] = {"rho_ratio", "inj_vs_rho", "inj_comparison"};
      for (int q = 0; q < 3; ++q) {
        acc[k][q].add(*parts[q]);
        t.rows.push_back({ell, radii[k], std::string(names[q]), parts[q]->worst_relative_slack, num(parts[q]->violations)});
      }
    }
  }
  auto& R = out.report.records;
  R.push_back(Rec("sandwich")
                  .param("grid", num(cfg.grid))
                  .param("samples", num(cfg.samples))
                  .measure("worst_relative_slack", sandwich_worst)
                  .measure("checks", num(sandwich_checks))
                  .measure("violations", num(sandwich_viol))
                  .tol("bound_slack", cfg.tol("bound_slack"))
                  .pass(sandwich_viol == 0));
  const char* names[] = {"rho_ratio", "inj_vs_rho", "inj_comparison"};
  for (int k = 0; k < 3; ++k) {
    for (int q = 0; q < 3; ++q) {
      const auto& a = acc[k][q];
      R.push_back(Rec(std::string(names[q]) + "_r" + label(radii[k]))
                      .param("radius", radii[k])
                      .param("grid", num(cfg.grid))
                      .measure("worst_relative_slack", a.worst)
                      .measure("checks", num(a.checks))
                      .measure("violations", num(a.violations))
                      .tol("bound_slack", cfg.tol("bound_slack"))
                      .pass(a.violations == 0));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L2.1: Lipschitz continuity of inj in t --------------------------------

SuiteOutput suite_L21(const RunConfig& cfg) {
  SuiteOutput out;
  const double tol = cfg.tol("lipschitz_stability");
  Table t{"lipschitz", {"schedule", "constant", "constant_refined", "oracle"}, {}};
  for (const auto& [name, sched] : suite_schedules(cfg)) {
    const auto rep = lipschitz_check(sched);
    const bool ok = rep.finite && stable(rep.constant, rep.constant_refined, tol);
    t.rows.push_back({name, rep.constant, rep.constant_refined, rep.oracle});
    out.report.records.push_back(Rec("lipschitz_" + name)
                                     .param("schedule", sched.to_json())
                                     .param("t_max", rep.t_max)
                                     .measure("constant", rep.constant)
                                     .measure("constant_refined", rep.constant_refined)
                                     .measure("oracle", rep.oracle)
                                     .measure("relative_change", rep.relative_change)
                                     .tol("lipschitz_stability", tol)
                                     .pass(ok));
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L2.2: the root-inj bound and the horizontal projection it relies on ---

SuiteOutput suite_L22(const RunConfig& cfg) {
  SuiteOutput out;
  auto& R = out.report.records;
  const double stab = cfg.tol("stability");

  const auto sw = rootinj_bound_sweep(cfg.ell_min, cfg.ell_max, cfg.samples, cfg.grid);
  R.push_back(Rec("rootinj_sweep")
                  .param("ell_min", cfg.ell_min)
                  .param("ell_max", cfg.ell_max)
                  .param("samples", num(cfg.samples))
                  .param("grid", num(cfg.grid))
                  .measure("K0", sw.K0)
                  .measure("K0_refined", sw.K0_refined)
                  .measure("relative_change", sw.relative_change)
                  .measure("argmax_ell", sw.argmax_ell)
                  .measure("argmax_s_over_X", sw.argmax_s_over_X)
                  .tol("stability", stab)
                  .pass(sw.finite && stable(sw.K0, sw.K0_refined, stab)));
  double K0 = sw.K0;
  for (const auto& [name, sched] : suite_schedules(cfg)) {
    const auto r = rootinj_bound_check(sched, cfg.time_grid, 256);
    K0 = std::max(K0, r.K0);
    R.push_back(Rec("rootinj_" + name)
                    .param("schedule", sched.to_json())
                    .param("time_grid", num(cfg.time_grid))
                    .measure("K0", r.K0)
                    .measure("K0_refined", r.K0_refined)
                    .measure("relative_change", r.relative_change)
                    .tol("stability", stab)
                    .pass(r.finite && stable(r.K0, r.K0_refined, stab)));
  }
  out.report.constants.push_back({"K0_emp", K0});

  Table ti{"rootinj", {"ell", "center_ratio"}, {}};
  Table tp{"projection",
           {"ell", "residual_4096", "residual_8192", "pure_re_residual", "pure_lie_residual", "wp_quadrature_error"},
           {}};
  const auto ells = sweep(cfg);
  const std::size_t n = ells.size();
  std::vector<double> r4(n), r8(n), rre(n), rlie(n), rq(n), cr(n);
  std::vector<char> nonzero_x(n);
  detail::parallel_for(n, [&](std::size_t i) {
    const CollarParams c(ells[i]);
    r4[i] = horizontal_project(c, dl_variation(c), 4096).relative_residual;
    r8[i] = horizontal_project(c, dl_variation(c), 8192).relative_residual;
    rre[i] = horizontal_project(c, re_quad_diff(c, {{0.7, 0.0}}), cfg.grid).relative_residual;
    const auto grid = make_grid(c, cfg.grid);
    const double X = c.half_width();
    const auto lie = lie_derivative(c, RadialField::from_function(grid, [X](double s) { return std::sin(s / X) + 0.3; }));
    rlie[i] = horizontal_project(c, lie, cfg.grid).relative_residual;
    rq[i] = relative_change(wp_speed_quadrature(c, {{0.3, 0.4}}, cfg.grid), wp_speed(c, {{0.3, 0.4}}));
    cr[i] = rootinj_ratio(c, 0.0);
  });
  double max4 = 0, max8 = 0, min_drop = kInf, max_re = 0, max_lie = 0, max_q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    max4 = std::max(max4, r4[i]);
    max8 = std::max(max8, r8[i]);
    min_drop = std::min(min_drop, r8[i] > 0.0 ? r4[i] / r8[i] : kInf);
    max_re = std::max(max_re, rre[i]);
    max_lie = std::max(max_lie, rlie[i]);
    max_q = std::max(max_q, rq[i]);
    tp.rows.push_back({ells[i], r4[i], r8[i], rre[i], rlie[i], rq[i]});
    ti.rows.push_back({ells[i], cr[i]});
  }
  const double rt = cfg.tol("projection_residual"), drop = cfg.tol("refinement_drop");
  R.push_back(Rec("projection_residual_4096")
                  .param("grid", 4096.0)
                  .measure("max_relative_residual", max4)
                  .tol("projection_residual", rt)
                  .pass(max4 <= rt));
  R.push_back(Rec("projection_refinement_8192")
                  .param("grids", std::string("4096 -> 8192"))
                  .measure("max_relative_residual_8192", max8)
                  .measure("min_residual_drop", min_drop)
                  .tol("refinement_drop", drop)
                  .note(min_drop >= drop ? ""
                                         : "residual already at rounding level at 4096 nodes; doubling the grid "
                                           "cannot reduce it further")
                  .pass(min_drop >= drop));
  R.push_back(Rec("pure_re_recovery")
                  .param("c", 0.7)
                  .param("grid", num(cfg.grid))
                  .measure("max_relative_residual", max_re)
                  .tol("pure_re", cfg.tol("pure_re"))
                  .pass(max_re <= cfg.tol("pure_re")));
  R.push_back(Rec("pure_lie_recovery")
                  .param("x", std::string("sin(s/X) + 0.3"))
                  .param("grid", num(cfg.grid))
                  .measure("max_relative_residual", max_lie)
                  .tol("pure_lie", cfg.tol("pure_lie"))
                  .pass(max_lie <= cfg.tol("pure_lie")));
  R.push_back(Rec("wp_speed_quadrature")
                  .param("c", std::string("0.3 + 0.4i"))
                  .param("grid", num(cfg.grid))
                  .measure("max_relative_error", max_q)
                  .tol("wp_quadrature", cfg.tol("wp_quadrature"))
                  .pass(max_q <= cfg.tol("wp_quadrature")));
  out.tables.push_back(std::move(ti));
  out.tables.push_back(std::move(tp));
  return out;
}

// ---- L2.4: first variation of inj -----------------------------------------

SuiteOutput suite_L24(const RunConfig& cfg) {
  SuiteOutput out;
  const double tol = cfg.tol("first_variation");
  Table t{"first_variation", {"ell", "value", "error"}, {}};
  double worst = 0, worst_scaling = 0;
  for (double ell : sweep(cfg)) {
    const CollarParams c(ell);
    const double v = first_variation_inj(c, dl_variation(c));
    worst = std::max(worst, std::fabs(v - 0.5));
    // Scaling g by (1 + eps) scales lengths by (1 + eps)^1/2.
    const double sc = first_variation_inj(c, metric_tensor(c));
    worst_scaling = std::max(worst_scaling, std::fabs(sc - ell / 4.0) / (ell / 4.0));
    t.rows.push_back({ell, v, std::fabs(v - 0.5)});
  }
  out.report.records.push_back(Rec("first_variation_dl")
                                   .param("samples", num(cfg.samples))
                                   .measure("expected", 0.5)
                                   .measure("max_abs_error", worst)
                                   .tol("first_variation", tol)
                                   .pass(worst <= tol));
  out.report.records.push_back(Rec("first_variation_scaling")
                                   .param("samples", num(cfg.samples))
                                   .measure("expected", std::string("inj(0) / 2"))
                                   .measure("max_relative_error", worst_scaling)
                                   .tol("first_variation", tol)
                                   .pass(worst_scaling <= tol));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L2.5: sharpness of the inj^-1/2 factor --------------------------------

SuiteOutput suite_L25(const RunConfig& cfg) {
  SuiteOutput out;
  const double hi_ell = std::min(cfg.ell_max, 0.1);
  Table t{"sharpness", {"ell", "inj_center", "norm_over_speed", "yaba_ratio"}, {}};
  auto& R = out.report.records;
  if (!(cfg.ell_min < hi_ell)) {
    R.push_back(Rec("sharpness_slope")
                    .param("ell_min", cfg.ell_min)
                    .note("the regression range [ell_min, 0.1] is empty")
                    .pass(false));
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, lo = kInf, hi = 0;
  const auto ells = log_spaced(cfg.ell_min, hi_ell, cfg.samples);
  for (double ell : ells) {
    const CollarParams c(ell);
    const double inj = injectivity_radius(c, 0.0), ratio = center_norm_over_speed(c), y = yaba_ratio(c);
    const double xv = std::log(inj), yv = std::log(ratio);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    t.rows.push_back({ell, inj, ratio, y});
  }
  const double n = num(ells.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  R.push_back(Rec("sharpness_slope")
                  .param("ell_min", cfg.ell_min)
                  .param("ell_max", hi_ell)
                  .param("samples", num(cfg.samples))
                  .measure("slope", slope)
                  .measure("expected", -0.5)
                  .tol("slope", cfg.tol("slope"))
                  .pass(std::fabs(slope + 0.5) <= cfg.tol("slope")));
  R.push_back(Rec("yaba_flatness")
                  .param("ell_min", cfg.ell_min)
                  .param("ell_max", hi_ell)
                  .measure("min", lo)
                  .measure("max", hi)
                  .measure("max_over_min", hi / lo)
                  .tol("yaba_flatness", cfg.tol("yaba_flatness"))
                  .pass(hi / lo <= cfg.tol("yaba_flatness")));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- shared pinch helpers ---------------------------------------------------

ConvergenceConfig conv_config(const RunConfig& cfg) { return {cfg.time_grid, 257, 5.0}; }

CheckRecord hypothesis_failure(const std::string& id, const NamedSchedule& s, const std::exception& e) {
  return Rec(id).param("schedule", s.sched.to_json()).note(e.what()).pass(false);
}

// ---- L3.1: nesting of the thick sets ---------------------------------------

SuiteOutput suite_L31(const RunConfig& cfg) {
  SuiteOutput out;
  Table t{"nesting", {"schedule", "mu", "K0", "pairs_checked", "violations", "thick_claim_violations"}, {}};
  for (const auto& s : suite_schedules(cfg)) {
    const auto curve = simulate(s.sched, {cfg.time_grid, 257, 5.0, cfg.tol("delta")});
    if (!curve.finite_length) {
      out.report.records.push_back(Rec("nesting_" + s.name)
                                       .param("schedule", s.sched.to_json())
                                       .note("infinite WP length; the sets are undefined")
                                       .pass(false));
      continue;
    }
    const auto conv = unif_conv_check(s.sched, conv_config(cfg));
    // The sets need the secant constant as well: it controls inj^1/2 between samples.
    const double K0 = std::max(conv.K0, conv.secant_K0);
    for (double mu : {0.05, 0.1, 0.2, 0.5}) {
      const auto fam = nested_sets(curve.times, curve.profiles, curve.L, K0, mu);
      t.rows.push_back({s.name, mu, K0, num(fam.pairs_checked), num(fam.violation_count), num(fam.thick_claim_violations)});
      out.report.records.push_back(Rec("nesting_" + s.name + "_mu" + label(mu))
                                       .param("schedule", s.sched.to_json())
                                       .param("mu", mu)
                                       .param("K0", K0)
                                       .measure("pairs_checked", num(fam.pairs_checked))
                                       .measure("violations", num(fam.violation_count))
                                       .measure("thick_claim_violations", num(fam.thick_claim_violations))
                                       .tol("violations", 0.0)
                                       .pass(fam.passed() && fam.pairs_checked > 0));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L3.2: metric equivalence on the thick part ----------------------------

struct EquivalenceRun {
  std::string name;
  double K0 = 0.0;
  EquivalenceReport rep;
};

SuiteOutput suite_L32(const RunConfig& cfg) {
  SuiteOutput out;
  auto& R = out.report.records;
  const double delta = cfg.tol("delta"), stab = cfg.tol("stability");
  Table t{"equivalence", {"schedule", "t0", "C1", "C2", "C", "C1_h", "C2_h"}, {}};
  double K0s = 0, C1 = 0, C2 = 0, C = 0;
  for (const auto& s : suite_schedules(cfg)) {
    double K0 = 0.0;
    try {
      K0 = unif_conv_check(s.sched, conv_config(cfg)).K0;
    } catch (const HypothesisViolation& e) {
      R.push_back(hypothesis_failure("equivalence_" + s.name, s, e));
      continue;
    }
    K0s = std::max(K0s, K0);
    const double L0 = wp_length(s.sched, 0.0);
    const bool expect_reject = std::pow(2.0 * K0 * L0, 2) > delta;
    bool rejected = false;
    std::string message;
    try {
      equivalence_checks(s.sched, 0.0, K0, {delta, 3.0, 2 * cfg.time_grid, 129});
    } catch (const HypothesisViolation& e) {
      rejected = true;
      message = e.what();
    }
    R.push_back(Rec("hypothesis_t0_zero_" + s.name)
                    .param("schedule", s.sched.to_json())
                    .param("delta", delta)
                    .measure("lhs", std::pow(2.0 * K0 * L0, 2))
                    .measure("rejected", rejected)
                    .note(message)
                    .pass(rejected == expect_reject));

    const double t0 = admissible_t0(s.sched, K0, delta);
    const auto rep = equivalence_checks(s.sched, t0, K0, {delta, 3.0, 2 * cfg.time_grid, 129});
    const bool h_ok = rep.C1_h >= 1.0 && rep.C2_h >= 1.0 && std::isfinite(rep.C1_h) && std::isfinite(rep.C2_h);
    const bool ok = rep.finite && rep.max_relative_change <= stab && rep.thick_points > 0 && h_ok;
    C1 = std::max(C1, rep.C1);
    C2 = std::max(C2, rep.C2);
    C = std::max(C, rep.C);
    t.rows.push_back({s.name, t0, rep.C1, rep.C2, rep.C, rep.C1_h, rep.C2_h});
    R.push_back(Rec("equivalence_" + s.name)
                    .param("schedule", s.sched.to_json())
                    .param("delta", delta)
                    .param("window", rep.window)
                    .param("t0", t0)
                    .param("K0", K0)
                    .measure("hypothesis_lhs", rep.hypothesis_lhs)
                    .measure("thick_points", num(rep.thick_points))
                    .measure("C1", rep.C1)
                    .measure("C2", rep.C2)
                    .measure("C", rep.C)
                    .measure("C1_refined", rep.C1_refined)
                    .measure("C2_refined", rep.C2_refined)
                    .measure("C_refined", rep.C_refined)
                    .measure("C1_h", rep.C1_h)
                    .measure("C2_h", rep.C2_h)
                    .measure("max_relative_change", rep.max_relative_change)
                    .tol("stability", stab)
                    .pass(ok));
  }
  out.report.constants = {{"K0_emp", K0s}, {"C1_emp", C1}, {"C2_emp", C2}, {"C_emp", C}};
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L3.3: evolution of a fixed tensor along the curve ---------------------

SuiteOutput suite_L33(const RunConfig& cfg) {
  SuiteOutput out;
  const double stab = cfg.tol("stability");
  std::vector<double> times;
  for (std::size_t i = 0; i <= cfg.time_grid; ++i) times.push_back(0.9 * num(i) / num(cfg.time_grid));
  auto ell = [](double t) { return 1.0 - t; };
  auto dell = [](double) { return -1.0; };
  auto zero = [](double) { return TensorComponents{}; };
  const std::pair<const char*, TensorFunctions> omegas[] = {
      {"dtheta2", {[](double) { return TensorComponents{0, 0, 1}; }, zero}},
      {"ds2", {[](double) { return TensorComponents{1, 0, 0}; }, zero}},
  };
  Table t{"evolution", {"omega", "k", "C_emp", "C_emp_refined"}, {}};
  for (const auto& [name, omega] : omegas) {
    for (int k : {0, 1}) {
      const auto r = tensor_evolution_check(times, ell, dell, omega, k);
      t.rows.push_back({std::string(name), double(k), r.C_emp, r.C_emp_refined});
      out.report.records.push_back(Rec(std::string("evolution_") + name + "_k" + std::to_string(k))
                                       .param("ell", std::string("1 - t"))
                                       .param("t_max", 0.9)
                                       .param("time_grid", num(cfg.time_grid))
                                       .measure("pairs", num(r.pairs))
                                       .measure("C_emp", r.C_emp)
                                       .measure("C_emp_refined", r.C_emp_refined)
                                       .measure("relative_change", r.relative_change)
                                       .tol("stability", stab)
                                       .pass(r.finite && stable(r.C_emp, r.C_emp_refined, stab)));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---- L3.4: separation of thick and thin parts ------------------------------

SuiteOutput suite_L34(const RunConfig& cfg) {
  SuiteOutput out;
  Table t{"separation", {"beta", "Q", "ell", "epsilon", "distance", "proof_lower_bound"}, {}};
  // Thin parts for large Q only appear at very small l, so the sweep starts at 1e-12.
  const double lo = std::min(cfg.ell_min, 1e-12);
  const auto ells = log_spaced(lo, cfg.ell_max, cfg.samples);
  for (double beta : {kAsinhOne, 0.5}) {
    for (double Q : {1.0, 5.0, 10.0}) {
      const double eps = epsilon_for_separation(beta, Q);
      std::size_t nonempty = 0;
      double margin = kInf, proof_margin = kInf;
      for (double ell : ells) {
        const auto r = separation_check(CollarParams(ell), beta, eps);
        if (r.empty()) continue;
        ++nonempty;
        margin = std::min(margin, r.distance - Q);
        proof_margin = std::min(proof_margin, r.distance - r.proof_lower_bound);
        t.rows.push_back({beta, Q, ell, eps, r.distance, r.proof_lower_bound});
      }
      out.report.records.push_back(Rec("separation_beta" + label(beta) + "_Q" + label(Q))
                                       .param("beta", beta)
                                       .param("Q", Q)
                                       .param("epsilon", eps)
                                       .param("ell_min", lo)
                                       .param("ell_max", cfg.ell_max)
                                       .param("samples", num(ells.size()))
                                       .measure("nonempty_cases", num(nonempty))
                                       .measure("min_distance_minus_Q", margin)
                                       .measure("min_distance_minus_proof_bound", proof_margin)
                                       .tol("margin", 0.0)
                                       .pass(nonempty > 0 && margin > 0.0));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---- T1.2: convergence to the cusp and the limit bookkeeping ---------------

void bookkeeping(std::vector<CheckRecord>& R) {
  int accepted = 0, rejected = 0, punct_fail = 0, cases = 0;
  std::string bad;
  for (const auto& nd : genus2_valid_catalog()) {
    const auto d = descriptor_from_json(nd.json);
    if (descriptor_validate(d).passed()) {
      ++accepted;
    } else {
      bad += std::string(bad.empty() ? "" : "; ") + nd.name + " rejected";
    }
    const int k = static_cast<int>(d.collars.size());
    for (int mask = 1; mask < (1 << k); ++mask) {
      std::vector<int> pinched;
      for (int i = 0; i < k; ++i) {
        if (mask & (1 << i)) pinched.push_back(i);
      }
      const auto lim = limit_decomposition(d, pinched);
      ++cases;
      if (lim.total_punctures != 2 * static_cast<int>(pinched.size())) ++punct_fail;
    }
  }
  for (const auto& nd : genus2_invalid_catalog()) {
    bool ok = false;
    try {
      ok = descriptor_validate(descriptor_from_json(nd.json)).passed();
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      ++rejected;
    } else {
      bad += std::string(bad.empty() ? "" : "; ") + nd.name + " accepted";
    }
  }
  const int nv = static_cast<int>(genus2_valid_catalog().size()), ni = static_cast<int>(genus2_invalid_catalog().size());
  R.push_back(Rec("descriptor_valid_catalog")
                  .param("configurations", double(nv))
                  .measure("accepted", double(accepted))
                  .note(bad)
                  .pass(accepted == nv));
  R.push_back(Rec("descriptor_invalid_catalog")
                  .param("configurations", double(ni))
                  .measure("rejected", double(rejected))
                  .note(bad)
                  .pass(rejected == ni));
  R.push_back(Rec("limit_punctures")
                  .param("rule", std::string("punctures = 2 x pinched collars"))
                  .measure("cases", double(cases))
                  .measure("failures", double(punct_fail))
                  .pass(punct_fail == 0 && cases > 0));
}

SuiteOutput suite_T12(const RunConfig& cfg) {
  SuiteOutput out;
  auto& R = out.report.records;
  const double stab = cfg.tol("stability"), delta = cfg.tol("delta");
  Table t{"convergence", {"schedule", "t", "ell", "L", "S", "bound"}, {}};

  std::vector<NamedSchedule> main;
  if (cfg.schedule) {
    main.push_back({"user", PinchSchedule::parse(*cfg.schedule)});
  } else {
    for (double p : {2.0, 3.0, 4.0}) main.push_back({"power_p" + label(p), PinchSchedule::power(1.0, p, 0.25)});
  }

  struct Conv {
    const NamedSchedule* s;
    ConvergenceReport rep;
  };
  std::vector<Conv> convs;
  for (const auto& s : main) {
    const double L0 = wp_length(s.sched, 0.0);
    const double Ltail = s.sched.T() > 0 ? wp_length(s.sched, s.sched.T() * (1.0 - 1e-6)) : 0.0;
    if (!std::isfinite(L0)) {
      R.push_back(Rec("length_" + s.name)
                      .param("schedule", s.sched.to_json())
                      .measure("L0", L0)
                      .note("infinite WP length; the convergence statements do not apply")
                      .pass(false));
      continue;
    }
    const auto rep = unif_conv_check(s.sched, conv_config(cfg));
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.L.size(); ++i) decreasing = decreasing && rep.L[i] <= rep.L[i - 1];
    const bool to_zero = L0 == 0.0 || Ltail <= 1e-3 * L0;
    R.push_back(Rec("length_" + s.name)
                    .param("schedule", s.sched.to_json())
                    .measure("L0", L0)
                    .measure("L_near_T", Ltail)
                    .measure("nonincreasing", decreasing)
                    .pass(decreasing && to_zero));
    convs.push_back({&s, rep});
  }
  double K0 = 0, K0r = 0;
  for (const auto& c : convs) {
    K0 = std::max(K0, c.rep.K0);
    K0r = std::max(K0r, c.rep.K0_refined);
  }
  for (const auto& c : convs) {
    std::size_t viol = 0;
    for (std::size_t i = 0; i < c.rep.times.size(); ++i) {
      const double bound = K0 * c.rep.L[i];
      if (c.rep.S[i] > bound) ++viol;
      t.rows.push_back({c.s->name, c.rep.times[i], c.rep.ell[i], c.rep.L[i], c.rep.S[i], bound});
    }
    R.push_back(Rec("uniform_convergence_" + c.s->name)
                    .param("schedule", c.s->sched.to_json())
                    .param("window", c.rep.window)
                    .param("time_samples", num(c.rep.times.size()))
                    .measure("K0_schedule", c.rep.K0)
                    .measure("K0_refined", c.rep.K0_refined)
                    .measure("relative_change", c.rep.relative_change)
                    .measure("S_nonincreasing", c.rep.S_monotone)
                    .measure("violations_of_shared_bound", num(viol))
                    .tol("stability", stab)
                    .pass(c.rep.finite && c.rep.S_monotone && viol == 0 && stable(c.rep.K0, c.rep.K0_refined, stab)));
  }
  R.push_back(Rec("shared_K0")
                  .param("schedules", num(convs.size()))
                  .measure("K0", K0)
                  .measure("K0_refined", K0r)
                  .tol("stability", stab)
                  .pass(!convs.empty() && stable(K0, K0r, stab)));

  double Cmax = 0;
  for (const auto& c : convs) {
    const double t0 = admissible_t0(c.s->sched, K0, delta);
    const auto eq = equivalence_checks(c.s->sched, t0, K0, {delta, 3.0, 2 * cfg.time_grid, 129});
    Cmax = std::max(Cmax, eq.C);
    R.push_back(Rec("cauchy_" + c.s->name)
                    .param("schedule", c.s->sched.to_json())
                    .param("delta", delta)
                    .param("t0", t0)
                    .param("window", eq.window)
                    .measure("C", eq.C)
                    .measure("C_refined", eq.C_refined)
                    .measure("thick_points", num(eq.thick_points))
                    .tol("stability", stab)
                    .pass(eq.finite && eq.thick_points > 0 && stable(eq.C, eq.C_refined, stab)));
  }

  if (!cfg.schedule) {
    // Linear pinch: expected to have infinite WP length.
    const auto lin = PinchSchedule::power(1.0, 1.0, 0.25);
    const double L0 = wp_length(lin, 0.0);
    const auto tail = measure_tail(default_speed_law());
    R.push_back(Rec("negative_control_linear")
                    .param("schedule", lin.to_json())
                    .measure("L0", L0)
                    .measure("speed_tail_exponent", tail.exponent)
                    .measure("expected", std::string("infinite length"))
                    .note(std::isfinite(L0) ? "the horizontal speed grows like l^" + label(tail.exponent) +
                                                  ", which is integrable at l = 0, so the linear pinch has finite "
                                                  "WP length"
                                            : "")
                    .pass(!std::isfinite(L0)));

    // Two-collar surface where only collar 0 pinches; collar 1 follows a
    // schedule that stops at l_T = 0.5.
    const auto& catalog = genus2_valid_catalog();
    const auto it = std::find_if(catalog.begin(), catalog.end(),
                                 [](const NamedDescriptor& d) { return d.kappa == 2; });
    const auto desc = descriptor_from_json(it->json);
    const std::vector<int> pinched = {0};
    const auto lim = limit_decomposition(desc, pinched);
    const auto surv = PinchSchedule::power(1.0, 2.0, 0.25, 0.5);
    const auto srep = unif_conv_check(surv, conv_config(cfg));
    const auto slim = limit_inj(surv);
    R.push_back(Rec("surviving_collar")
                    .param("descriptor", std::string(it->name))
                    .param("schedule", surv.to_json())
                    .measure("limit_punctures", double(lim.total_punctures))
                    .measure("limit_is_cusp", slim.cusp)
                    .measure("K0", srep.K0)
                    .measure("K0_refined", srep.K0_refined)
                    .tol("stability", stab)
                    .pass(lim.total_punctures == 2 && !slim.cusp && srep.finite &&
                          stable(srep.K0, srep.K0_refined, stab)));
  }

  // The region near the collar end stays thick: inj there is asinh(cosh(l/2)) >= asinh(1).
  {
    double worst = kInf;
    for (const auto& s : main) {
      for (std::size_t i = 0; i < cfg.time_grid; ++i) {
        const double tt = s.sched.T() * num(i) / num(cfg.time_grid);
        worst = std::min(worst, injectivity_radius_from_distance(CollarParams(s.sched.ell(tt)), 0.0));
      }
    }
    const double limit = limit_inj(main.front().sched).inj(0.0);
    R.push_back(Rec("thick_end_persists")
                    .measure("min_boundary_inj", worst)
                    .measure("limit_boundary_inj", limit)
                    .measure("asinh_1", kAsinhOne)
                    .pass(worst >= kAsinhOne * (1.0 - 1e-15) && limit >= kAsinhOne * (1.0 - 1e-15)));
  }

  bookkeeping(R);
  out.report.constants = {{"K0_emp", K0}, {"C_emp", Cmax}};
  out.tables.push_back(std::move(t));
  return out;
}

using SuiteFn = SuiteOutput (*)(const RunConfig&);
struct SuiteEntry {
  const char* id;
  SuiteFn fn;
};
const SuiteEntry kSuites[] = {{"A2", suite_A2},   {"A3", suite_A3},   {"L2.1", suite_L21}, {"L2.2", suite_L22},
                              {"L2.4", suite_L24}, {"L2.5", suite_L25}, {"L3.1", suite_L31}, {"L3.2", suite_L32},
                              {"L3.3", suite_L33}, {"L3.4", suite_L34}, {"T1.2", suite_T12}};

}  // namespace

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& s : kSuites) v.emplace_back(s.id);
    return v;
  }();
  return ids;
}

SuiteOutput run_suite(std::string_view id, const RunConfig& cfg) {
  cfg.validate();
  for (const auto& s : kSuites) {
    if (id == s.id) {
      SuiteOutput out = s.fn(cfg);
      out.report.suite = s.id;
      out.report.environment = environment(cfg);
      return out;
    }
  }
  std::string list;
  for (const auto& s : suite_ids()) list += (list.empty() ? "" : ", ") + s;
  throw DomainError("unknown suite id \"" + std::string(id) + "\"; valid ids: " + list);
}

}  // namespace pinchlab
