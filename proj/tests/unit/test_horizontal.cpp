#include "doctest.h"
#include "oracles.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/horizontal.hpp"

#include <cmath>

using namespace pinchlab;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

double rho2(double ell, double s) {
  const double r = ell / (2 * M_PI * std::cos(ell * s / (2 * M_PI)));
  return r * r;
}

// exact horizontal decomposition of dl_variation
double exact_c(double ell) { return -ell / (2 * M_PI * M_PI); }
double exact_x(double ell, double s) {
  const double u = ell * s / (2 * M_PI);
  return 2 * M_PI / (ell * ell) * (u + std::sin(u) * std::cos(u));
}

const QuadDiffCoeff kOne{{1.0, 0.0}};

}  // namespace

TEST_CASE("dl_variation") {
  for (double ell : {1e-3, 0.3, 1.0, kMaxCollarLength}) {
    CollarParams c(ell);
    const auto a = dl_variation(c);
    CHECK(rel(a.value(0).ss, ell / (2 * M_PI * M_PI)) < 1e-15);
    CHECK(a.value(0).st == 0.0);
    const double s = 0.37 * c.half_width();
    CHECK(a.value(s).ss == a.value(-s).ss);
    CHECK(a.value(s).ss == a.value(s).tt);
  }
  CollarParams c(1.0);
  const double h = 1e-5;
  const double fd = (rho2(1 + h, 3) - rho2(1 - h, 3)) / (2 * h);
  CHECK(std::fabs(dl_variation(c).value(3.0).ss - fd) < 1e-8);
  // s-derivative against a central difference
  const double fds = (dl_variation(c).value(3.0 + 1e-5).ss - dl_variation(c).value(3.0 - 1e-5).ss) / 2e-5;
  CHECK(rel(dl_variation(c).ds(3.0).ss, fds) < 1e-8);
}

TEST_CASE("re_quad_diff") {
  CollarParams c(1.0);
  const auto z = re_quad_diff(c, {{0, 0}}).value(1.0);
  CHECK((z.ss == 0 && z.st == 0 && z.tt == 0));
  const auto one = re_quad_diff(c, kOne).value(2.0);
  CHECK((one.ss == 1 && one.st == 0 && one.tt == -1));
  const auto cb = re_quad_diff(c, {{0.5, 2.0}}).value(0.0);
  CHECK((cb.ss == 0.5 && cb.st == -2.0 && cb.tt == -0.5));
  oracle::Gen gen(4);
  for (int i = 0; i < 20; ++i) {
    CollarParams p(gen.log_uniform(1e-3, kMaxCollarLength));
    const auto grid = make_grid(p, 256);
    const auto h = re_quad_diff(p, {{gen.uniform(-3, 3), gen.uniform(-3, 3)}});
    const auto v = h.on_grid(*grid);
    for (std::size_t j = 0; j < grid->size(); ++j) CHECK(v.ss[j] + v.tt[j] == 0.0);  // g-trace
    const auto d = divergence(h, *grid);
    for (std::size_t j = 0; j < grid->size(); ++j) {
      CHECK(std::fabs(d.s[j]) <= 1e-8);
      CHECK(std::fabs(d.theta[j]) <= 1e-8);
    }
  }
  // non-holomorphic control: the metric is not divergence-free as a trace-full
  // tensor, but a sampled Re(dw^2) with spectral derivatives still is
  const auto grid = make_grid(c, 128);
  const auto gs = grid->s();
  std::vector<double> ss(gs.size(), 1.0), st(gs.size(), 0.0), tt(gs.size(), -1.0);
  const auto d = divergence(SymTwoTensorField::sampled(grid, ss, st, tt), *grid);
  for (double x : d.s) CHECK(std::fabs(x) < 1e-10);
}

TEST_CASE("lie derivative") {
  CollarParams c(0.8);
  const auto grid = make_grid(c, 96);
  const auto zero = lie_derivative(c, RadialField::from_function(grid, [](double) { return 0.0; })).on_grid(*grid);
  for (double v : zero.ss) CHECK(v == 0.0);
  const auto k = lie_derivative(c, RadialField::from_function(grid, [](double) { return 2.5; })).on_grid(*grid);
  for (std::size_t j = 0; j < grid->size(); ++j) {
    CHECK(std::fabs(k.ss[j] - 2.5 * grid->drho2()[j]) < 1e-9 * (1 + std::fabs(grid->drho2()[j])));
    CHECK(k.tt[j] == doctest::Approx(2.5 * grid->drho2()[j]));
  }

  // flow pullback oracle: (phi_eps^* g - g) / eps for x(s) = sin(s / 2)
  auto x = [](double s) { return std::sin(0.5 * s); };
  auto dx = [](double s) { return 0.5 * std::cos(0.5 * s); };
  const auto L = lie_derivative(c, RadialField::from_function(grid, x));
  const double eps = 1e-5;
  for (double s0 : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    // RK4 on (s, J) with J = d phi / d s0
    double s = s0, J = 1.0;
    const int steps = 20;
    const double h = eps / steps;
    for (int i = 0; i < steps; ++i) {
      auto f = [&](double ss, double jj, double& ds, double& dj) {
        ds = x(ss);
        dj = dx(ss) * jj;
      };
      double k1s, k1j, k2s, k2j, k3s, k3j, k4s, k4j;
      f(s, J, k1s, k1j);
      f(s + 0.5 * h * k1s, J + 0.5 * h * k1j, k2s, k2j);
      f(s + 0.5 * h * k2s, J + 0.5 * h * k2j, k3s, k3j);
      f(s + h * k3s, J + h * k3j, k4s, k4j);
      s += h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s);
      J += h / 6 * (k1j + 2 * k2j + 2 * k3j + k4j);
    }
    const double ss = (rho2(0.8, s) * J * J - rho2(0.8, s0)) / eps;
    const double tt = (rho2(0.8, s) - rho2(0.8, s0)) / eps;
    const auto v = L.value(s0);
    CHECK(std::fabs(v.ss - ss) < 1e-4 * (1 + std::fabs(ss)));
    CHECK(std::fabs(v.tt - tt) < 1e-4 * (1 + std::fabs(tt)));
  }
}

TEST_CASE("horizontal projection recovers exact decompositions") {
  for (double ell : {1e-3, 0.05, 0.5, 1.0, kMaxCollarLength}) {
    CAPTURE(ell);
    CollarParams c(ell);
    const auto pure = horizontal_project(c, re_quad_diff(c, {{0.7, 0.0}}), 256);
    CHECK(std::fabs(pure.c.c.real() - 0.7) < 1e-10);
    CHECK(pure.relative_residual <= 1e-10);
    for (double v : pure.x.x) CHECK(std::fabs(v) < 1e-8);

    const auto grid = make_grid(c, 256);
    const double X = c.half_width();
    const auto lie = lie_derivative(c, RadialField::from_function(grid, [X](double s) { return std::sin(s / X) + 0.3; }));
    const auto pl = horizontal_project(c, lie, 256);
    CHECK(std::fabs(pl.c.c.real()) <= 1e-8);
    CHECK(pl.relative_residual <= 1e-8);

    const auto dl = horizontal_project(c, dl_variation(c), 256);
    CHECK(rel(dl.c.c.real(), exact_c(ell)) < 1e-10);
    CHECK(dl.relative_residual < 1e-10);
    CHECK(dl.x_odd_defect < 1e-8 * (1 + std::fabs(exact_x(ell, X))));
    CHECK(dl.imag_part == 0.0);
    for (std::size_t j = 0; j < grid->size(); j += 17)
      CHECK(std::fabs(dl.x.x[j] - exact_x(ell, grid->s()[j])) < 1e-9 * (1 + std::fabs(exact_x(ell, X))));
  }
}

TEST_CASE("horizontal projection is idempotent") {
  oracle::Gen gen(8);
  for (int i = 0; i < 10; ++i) {
    CollarParams c(gen.log_uniform(1e-2, kMaxCollarLength));
    const auto grid = make_grid(c, 128);
    const double a = gen.uniform(-2, 2), b = gen.uniform(-1, 1), w = gen.uniform(0.5, 3);
    const double X = c.half_width();
    const auto k = re_quad_diff(c, {{a, 0}}) +
                   lie_derivative(c, RadialField::from_function(grid, [=](double s) { return b + std::sin(w * s / X); }));
    const auto r1 = horizontal_project(c, k, 128);
    const auto again = re_quad_diff(c, r1.c) + lie_derivative(c, r1.x);
    const auto r2 = horizontal_project(c, again, 128);
    CHECK(std::fabs(r1.c.c.real() - a) < 1e-8);
    CHECK(std::fabs(r2.c.c.real() - r1.c.c.real()) < 1e-8);
    for (std::size_t j = 0; j < grid->size(); ++j) CHECK(std::fabs(r2.x.x[j] - r1.x.x[j]) < 1e-8 * (1 + std::fabs(r1.x.x[j])));
  }
}

TEST_CASE("horizontal projection rejects off-diagonal input") {
  CollarParams c(1.0);
  CHECK_THROWS_AS(horizontal_project(c, re_quad_diff(c, {{1.0, 1.0}}), 64), UnsupportedInput);
}

TEST_CASE("L2 orthogonality for boundary-vanishing radial fields") {
  for (double ell : {0.01, 0.5, 1.5}) {
    CollarParams c(ell);
    const auto grid = make_grid(c, 512);
    const double X = c.half_width();
    const auto q = re_quad_diff(c, {{1.3, 0}});
    const auto L = lie_derivative(c, RadialField::from_function(grid, [X](double s) {
      const double t = s / X;
      return (1 - t * t) * (1 - t * t) * std::exp(t);
    }));
    const double ip = l2_inner(q, L, *grid);
    CHECK(std::fabs(ip) <= 1e-8 * l2_norm(q, *grid) * l2_norm(L, *grid));
    // with x not vanishing at the ends the pairing is 4 pi c [x]
    const auto L2 = lie_derivative(c, RadialField::from_function(grid, [X](double s) { return s / X; }));
    CHECK(rel(l2_inner(q, L2, *grid), 4 * M_PI * 1.3 * 2.0) < 1e-10);
  }
}

TEST_CASE("pointwise and C^1 norms") {
  CollarParams c(1.0);
  const auto g = metric_tensor(c);
  oracle::Gen gen(2);
  for (int i = 0; i < 20; ++i) {
    const double s = gen.uniform(-1, 1) * c.half_width();
    CHECK(rel(pointwise_norm(c, g, s), std::sqrt(2.0)) < 1e-14);
    CHECK(rel(ck_seminorm(c, g, s, 1), std::sqrt(2.0)) < 1e-12);
    const double r = conformal_factor(c, s);
    CHECK(rel(pointwise_norm(c, re_quad_diff(c, {{0.4, -0.3}}), s), std::sqrt(2.0) * 0.5 / (r * r)) < 1e-14);
    CHECK(ck_seminorm(c, re_quad_diff(c, kOne), s, 0) == pointwise_norm(c, re_quad_diff(c, kOne), s));
  }
  CHECK(pointwise_norm(c, re_quad_diff(c, {{0, 0}}), 1.0) == 0.0);
  // |nabla Re(dw^2)| = 4 |phi'| / rho^3 in closed form
  const double s = 2.0;
  const double phi = 1.0 / (2 * M_PI) * std::tan(1.0 * s / (2 * M_PI));
  const double r = conformal_factor(c, s);
  CHECK(rel(ck_seminorm(c, re_quad_diff(c, kOne), s, 1) - pointwise_norm(c, re_quad_diff(c, kOne), s), 4 * phi / (r * r * r)) < 1e-12);
  CHECK_THROWS_AS(ck_seminorm(c, g, 0.0, 2), UnsupportedInput);
}

TEST_CASE("C^1 norm at the centre against covariant finite differences") {
  // nabla_theta h_{s theta} = phi' (h_ss - h_tt); at the centre phi' = 0, so the
  // whole C^1 part comes from d_s of the components, which vanish there.
  CollarParams c(1.0);
  const auto h = re_quad_diff(c, kOne);
  const double fd_phi = (std::log(conformal_factor(c, 1e-4)) - std::log(conformal_factor(c, -1e-4))) / 2e-4;
  const double r = conformal_factor(c, 0.0);
  CHECK(std::fabs(ck_seminorm(c, h, 0.0, 1) - (std::sqrt(2.0) / (r * r) + 4 * std::fabs(fd_phi) / (r * r * r))) < 1e-6);
}

TEST_CASE("WP speed") {
  CollarParams c(1.0);
  CHECK(rel(wp_speed(c, kOne), 68.3838551588220290) < 1e-14);
  CHECK(wp_speed(c, {{0, 0}}) == 0.0);
  CHECK(rel(wp_speed(c, {{2, 0}}), 2 * wp_speed(c, kOne)) < 1e-15);
  CHECK(rel(wp_speed(c, {{0, 1}}), wp_speed(c, kOne)) < 1e-15);
  for (double ell : oracle::log_space(1e-3, kMaxCollarLength, 32)) {
    CollarParams p(ell);
    CHECK(rel(wp_speed_quadrature(p, {{0.3, 0.4}}, 256), wp_speed(p, {{0.3, 0.4}})) < 1e-8);
  }
}

TEST_CASE("first variation of inj") {
  for (double ell : oracle::log_space(1e-3, kMaxCollarLength, 64)) {
    CollarParams p(ell);
    CHECK(std::fabs(first_variation_inj(p, dl_variation(p)) - 0.5) < 1e-10);
    CHECK(rel(first_variation_inj(p, re_quad_diff(p, {{0.6, 0}})), -M_PI * M_PI * 0.6 / ell) < 1e-13);
    const auto grid = make_grid(p, 65);  // odd: s = 0 is a node
    const auto L = lie_derivative(p, RadialField::from_function(grid, [](double s) { return s; }));
    CHECK(std::fabs(first_variation_inj(p, L)) < 1e-12);
  }
}

TEST_CASE("yaba ratio is flat and the speed ratio has slope -1/2") {
  const auto sweep = oracle::log_space(1e-3, kMaxCollarLength, 40);
  double lo = INFINITY, hi = 0;
  for (double ell : sweep) {
    const double r = yaba_ratio(CollarParams(ell));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo <= 4.0);
  // regression over [1e-3, 0.1]
  const auto small = oracle::log_space(1e-3, 0.1, 32);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double ell : small) {
    CollarParams c(ell);
    const double xv = std::log(injectivity_radius(c, 0.0)), yv = std::log(center_norm_over_speed(c));
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
  }
  const double n = small.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::fabs(slope + 0.5) < 0.02);
  // closed-form limit: ratio -> sqrt(2) (2 pi)^2 sqrt(1/2) / sqrt(4 pi (2 pi)^3 pi / 2)
  const double limit = std::sqrt(2.0) * 4 * M_PI * M_PI * std::sqrt(0.5) / std::sqrt(4 * M_PI * 8 * M_PI * M_PI * M_PI * M_PI / 2);
  CHECK(rel(yaba_ratio(CollarParams(1e-8)), limit) < 1e-6);
}

TEST_CASE("tensor evolution") {
  const TensorFunctions dtheta2{[](double) { return TensorComponents{0, 0, 1}; }, [](double) { return TensorComponents{}; }};
  std::vector<double> times;
  for (int i = 0; i <= 16; ++i) times.push_back(i / 16.0 * 0.9);
  auto lin = [](double t) { return 1.0 * (1 - t); };
  auto dlin = [](double) { return -1.0; };
  for (int k : {0, 1}) {
    const auto r = tensor_evolution_check(times, lin, dlin, dtheta2, k);
    CHECK(r.passed());
    CHECK(std::isfinite(r.C_emp));
    CHECK(r.C_emp == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
  }
  auto cst = [](double) { return 0.5; };
  auto zero = [](double) { return 0.0; };
  const auto rc = tensor_evolution_check(times, cst, zero, dtheta2, 0);
  CHECK(rc.C_emp == 0.0);
  CHECK(rc.passed());
  CHECK_THROWS_AS(tensor_evolution_check(times, lin, dlin, dtheta2, 2), UnsupportedInput);
}
