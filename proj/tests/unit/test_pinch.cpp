#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/horizontal.hpp"
#include "pinchlab/pinch.hpp"
#include "pinchlab/thick_thin.hpp"

using namespace pinchlab;
using std::numbers::pi;

namespace {

// Closed-form speed per unit |l'| from c = -l / (2 pi^2).
double exact_speed(double ell) {
  const CollarParams c(ell);
  return wp_speed(c, QuadDiffCoeff{-ell / (2.0 * pi * pi)});
}

}  // namespace

TEST_CASE("power schedule values and derivative") {
  const auto s = PinchSchedule::power(2.0, 3.0, 0.25, 0.1);
  CHECK(s.ell(0.0) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(s.ell(2.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.ell(1.0) == doctest::Approx(0.25 * 0.125 + 0.1).epsilon(1e-15));
  CHECK_FALSE(s.pinches());
  CHECK_FALSE(s.is_constant());
  for (double t : {0.1, 0.7, 1.3, 1.9}) {
    const double h = 1e-6;
    const double fd = (s.ell(t + h) - s.ell(t - h)) / (2 * h);
    CHECK(s.dell(t) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK_THROWS_AS(s.ell(-0.1), DomainError);
  CHECK_THROWS_AS(s.ell(2.5), DomainError);
}

TEST_CASE("schedule invariants are enforced") {
  CHECK_THROWS_AS(PinchSchedule::power(1.0, 3.0, 1.7, 0.1), DomainError);  // l(0) > 2 asinh 1
  CHECK_THROWS_AS(PinchSchedule::power(1.0, -1.0, 0.25), DomainError);
  CHECK_THROWS_AS(PinchSchedule::power(0.0, 2.0, 0.25), DomainError);
  CHECK_THROWS_AS(PinchSchedule::power(1.0, 2.0, 0.0, 0.0), DomainError);
  CHECK_NOTHROW(PinchSchedule::power(1.0, 2.0, kMaxCollarLength));
  CHECK_THROWS_AS(PinchSchedule::sampled({0, 0.5, 1}, {0.3, 0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(PinchSchedule::sampled({0, 0.3, 0.6, 1}, {0.3, 0.35, 0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(PinchSchedule::sampled({0, 0.3, 0.6, 1}, {0.3, 0.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(PinchSchedule::sampled({0.1, 0.3, 0.6, 1}, {0.3, 0.2, 0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(PinchSchedule::sampled({0, 0.6, 0.3, 1}, {0.3, 0.2, 0.1, 0.0}), DomainError);
}

TEST_CASE("sampled schedule is monotone and interpolates") {
  const std::vector<double> t{0.0, 0.2, 0.5, 0.7, 0.9, 1.0};
  const std::vector<double> l{0.4, 0.35, 0.35, 0.2, 0.05, 0.0};
  const auto s = PinchSchedule::sampled(t, l);
  CHECK(s.pinches());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(s.ell(t[i]) == doctest::Approx(l[i]).epsilon(1e-14));
  double prev = s.ell(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double v = s.ell(i / 1000.0);
    CHECK(v <= prev + 1e-15);
    CHECK(s.dell(i / 1000.0) <= 0.0);
    if (i < 1000) CHECK(v > 0.0);
    prev = v;
  }
  // flat segment stays flat
  CHECK(s.ell(0.35) == doctest::Approx(0.35).epsilon(1e-14));
}

TEST_CASE("schedule JSON and inline parsing") {
  const auto a = PinchSchedule::from_json(R"({"T": 2, "form": {"type": "power", "p": 3, "ell0": 0.3}})");
  CHECK(a.T() == 2.0);
  CHECK(a.p() == 3.0);
  CHECK(a.ell0() == 0.3);
  CHECK(a.ell_T() == 0.0);
  const auto b = PinchSchedule::parse(a.to_json());
  CHECK(b.to_json() == a.to_json());

  const auto c = PinchSchedule::parse("power:p=3");
  CHECK(c.ell0() == 0.25);
  CHECK(c.T() == 1.0);
  CHECK(c.p() == 3.0);
  const auto lin = PinchSchedule::parse("linear:ell0=0.5,T=2");
  CHECK(lin.p() == 1.0);
  CHECK(lin.ell(1.0) == doctest::Approx(0.25));
  const auto k = PinchSchedule::parse("constant:ell=0.7");
  CHECK(k.is_constant());
  CHECK(k.ell(0.5) == 0.7);
  CHECK(k.dell(0.5) == 0.0);

  const auto smp = PinchSchedule::from_json(
      R"({"T": 1, "form": {"type": "samples", "samples": [[0, 0.3], [0.4, 0.2], [0.8, 0.05], [1, 0]]}})");
  CHECK(smp.kind() == PinchSchedule::Kind::samples);
  CHECK(PinchSchedule::parse(smp.to_json()).to_json() == smp.to_json());

  CHECK_THROWS_AS(PinchSchedule::parse("power"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse("power:p=x"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse("power:q=2"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse("spiral:p=2"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse(R"({"T": 1, "form": {"type": "cubic"}})"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse(R"({"form": {"type": "power", "p": 2}})"), ParseError);
  CHECK_THROWS_AS(PinchSchedule::parse(R"({"T": 1, "form": {"type": "power", "p": 2, "ell0": 3}})"), DomainError);

  try {
    PinchSchedule::parse("{\"T\": 1,\n  \"form\": {\"type\": \"power\" \"p\": 2}}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() >= 28);  // the unexpected "p" token
    CHECK(e.column() <= 30);
  }
}

TEST_CASE("horizontal speed factor matches the exact decomposition") {
  oracle::Gen gen(7);
  for (int i = 0; i < 40; ++i) {
    const double ell = gen.log_uniform(1e-12, kMaxCollarLength);
    CHECK(horizontal_speed_factor(ell) == doctest::Approx(exact_speed(ell)).epsilon(1e-10));
  }
  // f(l) ~ 2 sqrt(pi) l^{-1/2}
  const double ell = 1e-8;
  CHECK(horizontal_speed_factor(ell) * std::sqrt(ell) == doctest::Approx(2.0 * std::sqrt(pi)).epsilon(1e-10));
  const auto tail = measure_tail(default_speed_law());
  CHECK(tail.exponent == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(tail.integrable);
}

TEST_CASE("WP length") {
  SUBCASE("constant schedule has zero length") {
    const auto s = PinchSchedule::parse("constant:ell=0.5");
    CHECK(wp_length(s, 0.0) == 0.0);
    CHECK(wp_length(s, 0.7) == 0.0);
  }
  SUBCASE("matches the closed-form integral in l") {
    const auto s = PinchSchedule::power(1.0, 3.0, 0.25);
    for (double t : {0.0, 0.3, 0.8, 0.99}) {
      const double ref = oracle::gk([](double v) { return 2.0 * v * exact_speed(v * v); }, 0.0,
                                    std::sqrt(s.ell(t)), 1e-13);
      CHECK(wp_length(s, t) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  SUBCASE("finite, decreasing and tending to zero for power laws") {
    for (double p : {2.0, 3.0, 4.0}) {
      const auto s = PinchSchedule::power(1.0, p, 0.25);
      double prev = wp_length(s, 0.0);
      CHECK(std::isfinite(prev));
      for (int i = 1; i < 64; ++i) {
        const double L = wp_length(s, i / 64.0);
        CHECK(L < prev);
        prev = L;
      }
      CHECK(wp_length(s, 1.0 - 1e-6) < 1e-3 * wp_length(s, 0.0));
    }
  }
  SUBCASE("reparametrization invariance") {
    const double L2 = wp_length(PinchSchedule::power(1.0, 2.0, 0.25), 0.0);
    CHECK(wp_length(PinchSchedule::power(3.0, 4.0, 0.25), 0.0) == doctest::Approx(L2).epsilon(1e-9));
    CHECK(wp_length(PinchSchedule::parse("linear"), 0.0) == doctest::Approx(L2).epsilon(1e-9));
  }
  SUBCASE("additivity against the direct time integral") {
    const auto s = PinchSchedule::power(1.0, 3.0, 0.25, 0.05);
    for (auto [t1, t2] : {std::pair{0.0, 0.5}, std::pair{0.2, 0.9}, std::pair{0.6, 0.99}}) {
      const double diff = wp_length(s, t1) - wp_length(s, t2);
      CHECK(wp_length_between(s, t1, t2) == doctest::Approx(diff).epsilon(1e-8));
    }
    const auto smp = PinchSchedule::sampled({0, 0.3, 0.6, 0.8, 1}, {0.4, 0.3, 0.1, 0.02, 0});
    CHECK(wp_length_between(smp, 0.1, 0.7) ==
          doctest::Approx(wp_length(smp, 0.1) - wp_length(smp, 0.7)).epsilon(1e-8));
  }
  SUBCASE("non-integrable tail gives infinite length") {
    const SpeedLaw steep = [](double l) { return std::pow(l, -1.5); };
    const SpeedLaw borderline = [](double l) { return 1.0 / l; };
    const auto s = PinchSchedule::parse("linear");
    CHECK(measure_tail(steep).exponent == doctest::Approx(-1.5));
    CHECK(std::isinf(wp_length(s, 0.0, steep)));
    CHECK(std::isinf(wp_length(s, 0.0, borderline)));
    // the same law on a schedule that stops short of 0 is finite
    const auto stop = PinchSchedule::power(1.0, 1.0, 0.2, 0.05);
    CHECK(wp_length(stop, 0.0, steep) == doctest::Approx(2.0 / std::sqrt(0.05) - 2.0 / std::sqrt(0.25)).epsilon(1e-8));
    CHECK_THROWS_AS(unif_conv_check(s, {}, steep), HypothesisViolation);
  }
  CHECK_THROWS_AS(wp_length(PinchSchedule::parse("linear"), 1.0), DomainError);
}

TEST_CASE("boundary gauge") {
  for (double ell : oracle::log_space(1e-3, kMaxCollarLength, 24)) {
    const CollarParams c(ell);
    CHECK(metric_in_boundary_gauge(c, 0.0) == doctest::Approx(ell / (2 * pi * std::tanh(ell / 2))).epsilon(1e-12));
    CHECK(boundary_gauge_rho(c, 0.0) == doctest::Approx(conformal_factor(c, c.half_width())).epsilon(1e-12));
    for (double f : {0.0, 0.1, 0.5, 0.9, 1.0}) {
      const double d = f * c.tau_max();
      CHECK(metric_in_boundary_gauge(c, d) == doctest::Approx(boundary_gauge_rho(c, d)).epsilon(1e-10));
    }
    // mirrored half of the one-end chart
    CHECK(boundary_gauge_rho(c, 2 * c.tau_max()) == doctest::Approx(boundary_gauge_rho(c, 0.0)).epsilon(1e-12));
    CHECK_THROWS_AS(metric_in_boundary_gauge(c, 1.01 * c.tau_max()), DomainError);
    CHECK_THROWS_AS(metric_in_boundary_gauge(c, -0.1), DomainError);
    CHECK_THROWS_AS(boundary_gauge_rho(c, 2.1 * c.tau_max()), DomainError);
  }
  const CollarParams tiny(1e-8);
  for (double d : {0.0, 0.5, 2.0, 5.0}) {
    CHECK(boundary_gauge_rho(tiny, d) == doctest::Approx(std::exp(-d) / pi).epsilon(1e-8));
  }
}

TEST_CASE("d inj / d l at fixed distance") {
  for (double ell : {1e-3, 0.1, 0.25, 1.0, 1.7}) {
    const double h = 1e-6 * ell;
    const CollarParams a(ell - h), b(ell + h), c(ell);
    for (double f : {0.0, 0.3, 0.9, 1.5}) {
      const double d = f * c.tau_max();
      const double fd =
          (injectivity_radius_from_distance(b, d) - injectivity_radius_from_distance(a, d)) / (2 * h);
      CHECK(dinj_dell_at_distance(c, d) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("cusp limit") {
  const auto lim = limit_inj(PinchSchedule::power(1.0, 3.0, 0.25));
  CHECK(lim.cusp);
  CHECK(lim.inj(0.0) == doctest::Approx(kAsinhOne).epsilon(1e-15));
  CHECK(lim.rho(0.0) == doctest::Approx(1.0 / pi).epsilon(1e-15));
  const CollarParams tiny(1e-8);
  for (double d : {0.0, 0.3, 1.0, 3.0, 5.0, 10.0}) {
    CHECK(lim.inj(d) == inj_bounds(d).lo);
    CHECK(std::fabs(injectivity_radius_from_distance(tiny, d) - lim.inj(d)) <= 1e-8);
  }
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  CHECK(lim.curvature_defect(grid) < 1e-6);

  const auto surv = limit_inj(PinchSchedule::power(1.0, 2.0, 0.25, 0.5));
  CHECK_FALSE(surv.cusp);
  const CollarParams c(0.5);
  CHECK(surv.inj(1.0) == doctest::Approx(injectivity_radius_from_distance(c, 1.0)).epsilon(1e-15));
  CHECK(surv.curvature_defect(grid) < 1e-6);
  // boundary inj stays near asinh(cosh(l/2)) > asinh 1 on the surviving collar
  CHECK(surv.inj(0.0) == doctest::Approx(std::asinh(std::cosh(0.25))).epsilon(1e-14));
}

TEST_CASE("uniform convergence check") {
  SUBCASE("constant schedule") {
    const auto r = unif_conv_check(PinchSchedule::parse("constant:ell=0.4"));
    CHECK(r.K0 == 0.0);
    for (double s : r.S) CHECK(s == 0.0);
    CHECK(r.passed());
  }
  SUBCASE("power laws share one K0") {
    double K = -1.0;
    for (double p : {2.0, 3.0, 4.0}) {
      const auto r = unif_conv_check(PinchSchedule::power(1.0, p, 0.25));
      CHECK(r.passed());
      CHECK(r.times.size() == 32);
      CHECK(r.window == doctest::Approx(5.0));
      CHECK(r.rho_monotone);
      CHECK(std::isfinite(r.secant_K0));
      for (std::size_t i = 0; i < r.S.size(); ++i) CHECK(r.S[i] <= r.K0 * r.L[i] * (1 + 1e-12));
      // regression value for l0 = 0.25, D = 5; the max sits at t = 0
      CHECK(r.K0 == doctest::Approx(0.187554).epsilon(1e-5));
      CHECK(r.K0 == doctest::Approx(r.S[0] / r.L[0]).epsilon(1e-14));
      if (K >= 0) CHECK(r.K0 == doctest::Approx(K).epsilon(1e-9));
      K = r.K0;
      // inj converges to the cusp profile
      CHECK(r.inj_sup.back() < 1e-3 * r.inj_sup.front());
    }
  }
  SUBCASE("surviving collar") {
    const auto r = unif_conv_check(PinchSchedule::power(1.0, 2.0, 0.25, 0.5));
    CHECK(r.passed());
    CHECK(r.window < 5.0);
    CHECK(r.K0 > 0.0);
  }
}

TEST_CASE("material derivative of inj along the horizontal curve") {
  for (double ell : {1e-3, 0.05, 0.5, 1.2}) {
    const CollarParams c(ell);
    const auto dec = horizontal_project(c, dl_variation(c), 256);
    const auto& g = *dec.x.grid;
    const auto s = g.s();
    for (std::size_t j = 5; j < s.size(); j += 37) {
      // 50-digit central differences in l and s
      const oracle::mp L(ell), S(s[j]), h("1e-20");
      const oracle::mp d_ell = (oracle::inj(L + h, S) - oracle::inj(L - h, S)) / (2 * h);
      const oracle::mp d_s = (oracle::inj(L, S + h) - oracle::inj(L, S - h)) / (2 * h);
      const double numeric = static_cast<double>(d_ell - oracle::mp(dec.x.x[j]) * d_s);
      INFO("ell = " << ell << ", j = " << j);
      CHECK(std::fabs(material_dinj(c, s[j]) - numeric) <= 1e-9 * std::fabs(static_cast<double>(d_ell)) + 1e-10);
    }
  }
}

TEST_CASE("rootinj bound") {
  SUBCASE("sweep sup is finite and refinement-stable") {
    const auto r = rootinj_bound_sweep(1e-3, kMaxCollarLength, 32, 256);
    CHECK(r.passed());
    CHECK(r.K0 == doctest::Approx(0.110253).epsilon(1e-4));
    CHECK(r.argmax_ell == doctest::Approx(kMaxCollarLength));
  }
  SUBCASE("centre ratio tends to a nonzero constant") {
    const double lim = (1.0 / (2.0 * std::sqrt(2.0))) / (2.0 * std::sqrt(pi));
    CHECK(rootinj_ratio(CollarParams(1e-8), 0.0) == doctest::Approx(lim).epsilon(1e-6));
    // centre closed form: d sqrt(l/2)/dl = 1 / (2 sqrt(2 l))
    const double ell = 0.3;
    const CollarParams c(ell);
    CHECK(material_dinj(c, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("constant schedule gives zero") {
    const auto r = rootinj_bound_check(PinchSchedule::parse("constant:ell=0.3"), 8, 64);
    CHECK(r.K0 == 0.0);
    CHECK(r.passed());
  }
  SUBCASE("schedule") {
    const auto r = rootinj_bound_check(PinchSchedule::power(1.0, 3.0, 0.25), 16, 128);
    CHECK(r.passed());
    CHECK(r.K0 < 0.110253);
  }
}

TEST_CASE("thick-part equivalence") {
  const auto s = PinchSchedule::power(1.0, 3.0, 0.25);
  const double K0 = unif_conv_check(s).K0;
  CHECK_THROWS_AS(equivalence_checks(s, 0.0, K0), HypothesisViolation);
  try {
    equivalence_checks(s, 0.5, K0);
  } catch (const HypothesisViolation& e) {
    CHECK(std::string(e.what()).find("admissible t0") != std::string::npos);
  }
  const double t0 = admissible_t0(s, K0, 0.01);
  CHECK(t0 == doctest::Approx(0.822).epsilon(2e-3));
  CHECK(std::pow(2 * K0 * wp_length(s, t0), 2) <= 0.01 * (1 + 1e-9));
  const auto r = equivalence_checks(s, t0, K0);
  CHECK(r.passed());
  CHECK(r.thick_points > 0);
  CHECK(r.C1 >= 1.0);
  CHECK(r.C2 >= 1.0);
  CHECK(r.C > 0.0);
  CHECK(r.C1_h >= r.C1 * (1 - 1e-12));
  CHECK(r.C2_h >= r.C2 * (1 - 1e-12));
  CHECK(r.window == doctest::Approx(3.0));

  // t0 near T: the metrics barely move, C1 and C2 tend to 1
  const auto late = equivalence_checks(s, 0.99, K0);
  CHECK(late.C1 < r.C1);
  CHECK(late.C1 == doctest::Approx(1.0).epsilon(1e-6));

  // a constant schedule has no differences at all
  const auto k = equivalence_checks(PinchSchedule::parse("constant:ell=0.3"), 0.0, 0.0);
  CHECK(k.C1 == 1.0);
  CHECK(k.C2 == 1.0);
  CHECK(k.C == 0.0);
}

TEST_CASE("Lipschitz in time") {
  const auto k = lipschitz_check(PinchSchedule::parse("constant:ell=0.3"));
  CHECK(k.constant == 0.0);
  CHECK(k.passed());
  const auto lin = lipschitz_check(PinchSchedule::parse("linear"));
  CHECK(lin.passed());
  CHECK(lin.constant <= lin.oracle * (1 + 1e-9));
  CHECK(lin.constant == doctest::Approx(lin.oracle).epsilon(0.01));
  const auto p3 = lipschitz_check(PinchSchedule::power(1.0, 3.0, 0.25));
  CHECK(p3.passed());
  CHECK(p3.relative_change <= 0.02);
}

TEST_CASE("curve report") {
  SUBCASE("constant schedule has zero speed") {
    const auto r = simulate(PinchSchedule::parse("constant:ell=0.3"));
    for (double v : r.wp_speed) CHECK(v == 0.0);
    for (double v : r.L) CHECK(v == 0.0);
    CHECK(r.warnings.empty());
  }
  SUBCASE("power law") {
    const auto s = PinchSchedule::power(1.0, 3.0, 0.25);
    const auto r = simulate(s);
    REQUIRE(r.times.size() == 32);
    CHECK(r.finite_length);
    for (std::size_t i = 1; i < r.L.size(); ++i) {
      CHECK(r.L[i] < r.L[i - 1]);
      CHECK(r.ell[i] < r.ell[i - 1]);
    }
    CHECK(r.L.back() < 0.01 * r.L.front());
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      CHECK(r.wp_speed[i] >= 0.0);
      CHECK(r.wp_speed[i] == doctest::Approx(exact_speed(r.ell[i]) * std::fabs(s.dell(r.times[i]))).epsilon(1e-9));
      const CollarParams c(r.ell[i]);
      // closed form of the thin-part edge
      const double q = std::sinh(0.01) / c.sinh_half();
      const double ref = q > 1.0 ? c.tau_max() - std::acosh(q) : c.tau_max();
      CHECK(r.d_delta[i] == doctest::Approx(ref).epsilon(1e-9));
    }
    CHECK(r.K0 == doctest::Approx(unif_conv_check(s).K0).epsilon(1e-12));
  }
  SUBCASE("nesting from the report") {
    const auto s = PinchSchedule::power(1.0, 3.0, 0.25);
    const auto r = simulate(s);
    const auto conv = unif_conv_check(s);
    const double K0 = std::max(conv.K0, conv.secant_K0);
    for (double mu : {0.05, 0.2, 0.5}) {
      const auto fam = nested_sets(r.times, r.profiles, r.L, K0, mu);
      CHECK(fam.passed());
      CHECK(fam.pairs_checked > 0);
    }
  }
  SUBCASE("results do not depend on the worker count") {
    const auto s = PinchSchedule::power(1.0, 2.0, 0.25);
    setenv("PINCHLAB_THREADS", "1", 1);
    const auto a = simulate(s);
    setenv("PINCHLAB_THREADS", "4", 1);
    const auto b = simulate(s);
    unsetenv("PINCHLAB_THREADS");
    CHECK(a.L == b.L);
    CHECK(a.S == b.S);
    CHECK(a.wp_speed == b.wp_speed);
  }
}

TEST_CASE("thick boundary distance") {
  const CollarParams c(0.25);
  CHECK(thick_boundary_distance(c, 0.1) == doctest::Approx(c.tau_max()));  // 0.1 < l/2: no thin part
  const double d = thick_boundary_distance(c, 0.3);
  CHECK(injectivity_radius_from_distance(c, d) == doctest::Approx(0.3).epsilon(1e-9));
}
