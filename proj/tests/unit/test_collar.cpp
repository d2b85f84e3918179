#include "doctest.h"
#include "oracles.hpp"
#include "pinchlab/collar.hpp"
#include "pinchlab/errors.hpp"

#include <cmath>

using namespace pinchlab;
using oracle::mp;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

const std::vector<double> kSweep = oracle::log_space(1e-3, kMaxCollarLength, 64);

}  // namespace

TEST_CASE("admissible range") {
  CHECK_THROWS_AS(CollarParams(0.0), DomainError);
  CHECK_THROWS_AS(CollarParams(-1.0), DomainError);
  CHECK_THROWS_AS(CollarParams(1.8), DomainError);
  CHECK_THROWS_AS(CollarParams(std::nan("")), DomainError);
  CHECK_NOTHROW(CollarParams(2 * std::asinh(1.0)));
  CHECK_NOTHROW(CollarParams(1e-12));
  try {
    CollarParams(3.0);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1.762747") != std::string::npos);
  }
}

TEST_CASE("half width frozen values") {
  CHECK(rel(half_width(1.0), 6.85128106282923551) < 1e-14);
  CHECK(rel(half_width(kMaxCollarLength), 2.79949517050552259) < 1e-14);
  CHECK(rel(half_width(kMaxCollarLength), M_PI * M_PI / (2 * kMaxCollarLength)) < 1e-14);
  CHECK(rel(half_width(1e-6) * 1e-6, 9.86960125949670) < 1e-12);
  double prev = INFINITY;
  for (double ell : kSweep) {
    const double x = half_width(ell);
    CHECK(x < prev);
    prev = x;
    CHECK(rel(x, double(oracle::half_width(mp(ell)))) < 1e-12);
  }
}

TEST_CASE("conformal factor") {
  CollarParams c(1.0);
  CHECK(rel(conformal_factor(c, 0.0), 1 / (2 * M_PI)) < 1e-15);
  CHECK(rel(conformal_factor(c, 3.0), 0.179195695010306928) < 1e-14);
  CHECK(conformal_factor(c, -3.0) == conformal_factor(c, 3.0));
  for (double ell : {1e-6, 0.01, 1.0, kMaxCollarLength}) {
    CollarParams p(ell);
    const double x = p.half_width();
    CHECK(rel(conformal_factor(p, x), ell / (2 * M_PI * std::tanh(ell / 2))) < 1e-12);
    CHECK_THROWS_AS(conformal_factor(p, std::nextafter(x, 2 * x) * (1 + 1e-12)), DomainError);
  }
}

TEST_CASE("distance to boundary") {
  CollarParams c(1.0);
  CHECK(rel(dist_to_boundary(c, 0.0), 1.40682911374729525) < 1e-14);
  CHECK(dist_to_boundary(c, c.half_width()) == 0.0);
  CHECK(dist_to_boundary(c, -c.half_width()) == 0.0);
  oracle::Gen gen(7);
  for (double ell : kSweep) {
    CollarParams p(ell);
    CHECK(std::fabs(p.sinh_half() * std::sinh(dist_to_boundary(p, 0.0)) - 1.0) < 1e-10);
    for (int k = 0; k < 8; ++k) {
      const double s = gen.uniform(-1, 1) * p.half_width();
      const double ref = double(oracle::dist_to_boundary(mp(ell), mp(s)));
      CHECK(rel(dist_to_boundary(p, s), ref) < 1e-12);
    }
    // next to the boundary the error is set by the rounding of X itself
    const double s_near = p.half_width() * (1 - 1e-9);
    const double scale = conformal_factor(p, p.half_width()) * p.half_width() * 1e-15;
    CHECK(std::fabs(dist_to_boundary(p, s_near) - double(oracle::dist_to_boundary(mp(ell), mp(s_near)))) < scale);
  }
}

TEST_CASE("distance agrees with quadrature of rho") {
  for (double ell : {1e-3, 0.1, 1.0, kMaxCollarLength}) {
    CollarParams p(ell);
    for (double frac : {0.0, 0.3, 0.9}) {
      const double s = frac * p.half_width();
      const double q = oracle::gk([&](double t) { return conformal_factor(p, t); }, s, p.half_width());
      CHECK(rel(dist_to_boundary(p, s), q) < 1e-10);
    }
  }
}

TEST_CASE("injectivity radius") {
  for (double ell : kSweep) {
    CollarParams p(ell);
    CHECK(std::fabs(injectivity_radius(p, 0.0) - ell / 2) < 1e-15);
    CHECK(rel(injectivity_radius(p, p.half_width()), std::asinh(p.cosh_half())) < 1e-14);
    CHECK(rel(shortest_loop(p, make_collar_point(p, 0.0, 1.0)).length, ell) < 1e-14);
  }
  CollarParams c(1.0);
  CHECK(rel(injectivity_radius(c, c.half_width()), 0.968803090793164544) < 1e-14);
  oracle::Gen gen(3);
  for (int k = 0; k < 200; ++k) {
    const double ell = gen.log_uniform(1e-3, kMaxCollarLength);
    CollarParams p(ell);
    const double s = gen.uniform(-1, 1) * p.half_width();
    CHECK(rel(injectivity_radius(p, s), double(oracle::inj(mp(ell), mp(s)))) < 1e-12);
    CHECK(injectivity_radius(p, s) == injectivity_radius(p, -s));
    const double d = dist_to_boundary(p, s);
    CHECK(rel(injectivity_radius_from_distance(p, d), injectivity_radius(p, s)) < 1e-11);
    const auto b = inj_bounds(d);
    CHECK(b.lo <= injectivity_radius(p, s));
    CHECK(injectivity_radius(p, s) <= b.hi);
  }
}

TEST_CASE("inj stationary exactly at the centre distance") {
  for (double ell : kSweep) {
    CollarParams p(ell);
    const double d0 = dist_to_boundary(p, 0.0);
    CHECK(std::fabs(std::tanh(d0) - 1 / p.cosh_half()) < 1e-10);
    // strictly decreasing in d on [0, d0]
    double prev = INFINITY;
    for (int i = 0; i <= 50; ++i) {
      const double v = injectivity_radius_from_distance(p, d0 * i / 50.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("inj bounds") {
  const auto b = inj_bounds(0.0);
  CHECK(rel(b.lo, 0.881373587019543025) < 1e-15);
  CHECK(rel(b.hi, 1.61489091617309529) < 1e-15);
  CHECK(inj_bounds(50).hi < 1e-20);
  CHECK_THROWS_AS(inj_bounds(-1e-9), DomainError);
}

TEST_CASE("collar area") {
  CollarParams c(1.0);
  CHECK(rel(collar_area(c, -c.half_width(), c.half_width()), 3.83806950266988744) < 1e-14);
  CHECK(collar_area(c, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(collar_area(c, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(collar_area(c, 0.0, 10.0), DomainError);
  for (double ell : {0.01, 0.5, 1.5}) {
    CollarParams p(ell);
    const double x = p.half_width();
    CHECK(rel(collar_area(p, -x, x), 2 * ell / p.sinh_half()) < 1e-13);
    const double q = oracle::gk([&](double s) { return 2 * M_PI * std::pow(conformal_factor(p, s), 2); }, -0.4 * x, 0.7 * x);
    CHECK(rel(collar_area(p, -0.4 * x, 0.7 * x), q) < 1e-10);
    CHECK(rel(collar_area(p, -0.4 * x, 0.1 * x) + collar_area(p, 0.1 * x, 0.7 * x), collar_area(p, -0.4 * x, 0.7 * x)) < 1e-14);
  }
}

TEST_CASE("inj profile") {
  CollarParams c(0.3);
  const auto grid = chebyshev_s_grid(c, 65);
  const auto prof = inj_profile(c, grid);
  REQUIRE(prof.values.size() == 65);
  for (std::size_t j = 0; j < 65; ++j) {
    CHECK(prof.values[j] > 0);
    CHECK(std::fabs(prof.values[j] - prof.values[64 - j]) < 1e-12);
    CHECK(prof.values[j] >= prof.values[32]);
  }
  std::vector<double> bad = {0.0, -1.0};
  CHECK_THROWS_AS(inj_profile(c, bad), DomainError);
  std::vector<double> outside = {0.0, 100.0};
  CHECK_THROWS_AS(inj_profile(c, outside), DomainError);
}

TEST_CASE("collar grid spectral calculus") {
  CollarParams c(0.7);
  CollarGrid g(c, 128);
  std::vector<double> f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) f[j] = g.rho2()[j];
  const auto df = g.d_ds(f);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(rel(df[j] + 1e-300, g.drho2()[j] + 1e-300) < 1e-8 + 1e-10 / std::fabs(g.drho2()[j] + 1e-30));
  const double area = 2 * M_PI * g.integrate(f);
  CHECK(rel(area, collar_area(c, -c.half_width(), c.half_width())) < 1e-10);
  const auto a = g.antiderivative(f);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double ref = g.s()[j] >= 0 ? collar_area(c, 0.0, g.s()[j]) : -collar_area(c, g.s()[j], 0.0);
    CHECK(std::fabs(2 * M_PI * a[j] - ref) < 1e-10);
  }
  CHECK(rel(g.interpolate(f, 1.234), std::pow(conformal_factor(c, 1.234), 2)) < 1e-10);
}

TEST_CASE("pointwise bound sweep") {
  const auto r1 = pointwise_bound_sweep(CollarParams(1.0), 1.0, 256);
  CHECK(r1.passed());
  CHECK(r1.rho_ratio.worst_relative_slack >= 0);
  CHECK(r1.inj_comparison.checks > 256);
  const auto r2 = pointwise_bound_sweep(CollarParams(0.01), 2.0, 1024);
  CHECK(r2.passed());
  CHECK_THROWS_AS(pointwise_bound_sweep(CollarParams(1.0), 1.0, 8), DomainError);
}
