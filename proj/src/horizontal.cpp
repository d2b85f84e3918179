#include "pinchlab/horizontal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pinchlab/errors.hpp"

namespace pinchlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

TensorFunctions constant_functions(TensorComponents v) {
  return {[v](double) { return v; }, [](double) { return TensorComponents{}; }};
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

void require_same_collar(const CollarParams& a, const CollarParams& b) {
  if (a.ell() != b.ell()) throw DomainError("tensor fields live on collars of different length");
}

}  // namespace

std::shared_ptr<const CollarGrid> make_grid(const CollarParams& c, std::size_t n) {
  return std::make_shared<const CollarGrid>(c, n);
}

SymTwoTensorField SymTwoTensorField::closed_form(const CollarParams& c, TensorFunctions f) {
  SymTwoTensorField h(c);
  h.fn_ = std::move(f);
  return h;
}

SymTwoTensorField SymTwoTensorField::sampled(std::shared_ptr<const CollarGrid> grid, std::vector<double> ss,
                                             std::vector<double> st, std::vector<double> tt) {
  const std::size_t n = grid->size();
  if (ss.size() != n || st.size() != n || tt.size() != n) throw DomainError("sampled tensor: component sizes must match the grid");
  SymTwoTensorField h(grid->collar());
  const auto& b = grid->basis();
  h.coeffs_ = {b.coefficients(ss), b.coefficients(st), b.coefficients(tt)};
  h.dcoeffs_ = {ChebyshevBasis::derivative(h.coeffs_.ss), ChebyshevBasis::derivative(h.coeffs_.st),
                ChebyshevBasis::derivative(h.coeffs_.tt)};
  h.samples_ = {std::move(ss), std::move(st), std::move(tt)};
  h.grid_ = std::move(grid);
  return h;
}

TensorComponents SymTwoTensorField::value(double s) const {
  if (!grid_) return fn_.value(s);
  const double x = s / collar_.half_width();
  if (!(std::fabs(x) <= 1.0)) throw DomainError("tensor evaluated outside the collar");
  // Nodes return their samples: the interpolant of rho^2-type data is poor
  // between nodes when l is small and the boundary pole is close.
  const auto nodes = grid_->s();
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (nodes[j] == s) return {samples_.ss[j], samples_.st[j], samples_.tt[j]};
  return {ChebyshevBasis::evaluate(coeffs_.ss, x), ChebyshevBasis::evaluate(coeffs_.st, x),
          ChebyshevBasis::evaluate(coeffs_.tt, x)};
}

TensorComponents SymTwoTensorField::ds(double s) const {
  if (!grid_) return fn_.ds(s);
  const double w = collar_.half_width();
  const double x = s / w;
  if (!(std::fabs(x) <= 1.0)) throw DomainError("tensor evaluated outside the collar");
  return {ChebyshevBasis::evaluate(dcoeffs_.ss, x) / w, ChebyshevBasis::evaluate(dcoeffs_.st, x) / w,
          ChebyshevBasis::evaluate(dcoeffs_.tt, x) / w};
}

namespace {

bool grid_matches(const std::shared_ptr<const CollarGrid>& mine, const CollarGrid& g) {
  return mine && mine->size() == g.size() && mine->collar().ell() == g.collar().ell();
}

}  // namespace

GridComponents SymTwoTensorField::on_grid(const CollarGrid& g) const {
  if (grid_matches(grid_, g)) return samples_;
  GridComponents out;
  out.ss.resize(g.size());
  out.st.resize(g.size());
  out.tt.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto v = value(g.s()[j]);
    out.ss[j] = v.ss;
    out.st[j] = v.st;
    out.tt[j] = v.tt;
  }
  return out;
}

GridComponents SymTwoTensorField::ds_on_grid(const CollarGrid& g) const {
  GridComponents out;
  if (grid_matches(grid_, g)) {
    const auto& b = grid_->basis();
    const double inv = 1.0 / collar_.half_width();
    out = {b.values(dcoeffs_.ss), b.values(dcoeffs_.st), b.values(dcoeffs_.tt)};
    for (auto* v : {&out.ss, &out.st, &out.tt})
      for (double& x : *v) x *= inv;
    return out;
  }
  out.ss.resize(g.size());
  out.st.resize(g.size());
  out.tt.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto v = ds(g.s()[j]);
    out.ss[j] = v.ss;
    out.st[j] = v.st;
    out.tt[j] = v.tt;
  }
  return out;
}

bool SymTwoTensorField::same_grid(const SymTwoTensorField& o) const {
  return grid_ && o.grid_ && grid_matches(grid_, *o.grid_);
}

SymTwoTensorField SymTwoTensorField::combine(const SymTwoTensorField& o, double a, double b) const {
  require_same_collar(collar_, o.collar_);
  if (same_grid(o)) {
    const std::size_t n = grid_->size();
    std::vector<double> ss(n), st(n), tt(n);
    for (std::size_t j = 0; j < n; ++j) {
      ss[j] = a * samples_.ss[j] + b * o.samples_.ss[j];
      st[j] = a * samples_.st[j] + b * o.samples_.st[j];
      tt[j] = a * samples_.tt[j] + b * o.samples_.tt[j];
    }
    return sampled(grid_, std::move(ss), std::move(st), std::move(tt));
  }
  auto lhs = std::make_shared<const SymTwoTensorField>(*this);
  auto rhs = std::make_shared<const SymTwoTensorField>(o);
  auto mix = [a, b](TensorComponents p, TensorComponents q) {
    return TensorComponents{a * p.ss + b * q.ss, a * p.st + b * q.st, a * p.tt + b * q.tt};
  };
  return closed_form(collar_, {[=](double s) { return mix(lhs->value(s), rhs->value(s)); },
                               [=](double s) { return mix(lhs->ds(s), rhs->ds(s)); }});
}

SymTwoTensorField SymTwoTensorField::operator+(const SymTwoTensorField& o) const { return combine(o, 1.0, 1.0); }
SymTwoTensorField SymTwoTensorField::operator-(const SymTwoTensorField& o) const { return combine(o, 1.0, -1.0); }

SymTwoTensorField SymTwoTensorField::scaled(double a) const {
  if (grid_) {
    auto ss = samples_.ss, st = samples_.st, tt = samples_.tt;
    for (auto* v : {&ss, &st, &tt})
      for (double& x : *v) x *= a;
    return sampled(grid_, std::move(ss), std::move(st), std::move(tt));
  }
  auto fn = fn_;
  auto mul = [a](TensorComponents p) { return TensorComponents{a * p.ss, a * p.st, a * p.tt}; };
  return closed_form(collar_, {[=](double s) { return mul(fn.value(s)); }, [=](double s) { return mul(fn.ds(s)); }});
}

RadialField RadialField::from_function(std::shared_ptr<const CollarGrid> grid, const std::function<double(double)>& f) {
  RadialField r{std::move(grid), {}};
  r.x.resize(r.grid->size());
  for (std::size_t j = 0; j < r.x.size(); ++j) r.x[j] = f(r.grid->s()[j]);
  return r;
}

SymTwoTensorField metric_tensor(const CollarParams& c) {
  const double scale = c.ell() / kTwoPi;
  return SymTwoTensorField::closed_form(
      c, {[c, scale](double s) {
            const auto g = angle_gauge(c, s);
            const double r2 = scale * scale / (g.cos_u * g.cos_u);
            return TensorComponents{r2, 0.0, r2};
          },
          [c, scale](double s) {
            const auto g = angle_gauge(c, s);
            const double r2 = scale * scale / (g.cos_u * g.cos_u);
            const double d = 2.0 * r2 * g.tan_u() * scale;
            return TensorComponents{d, 0.0, d};
          }});
}

SymTwoTensorField dl_variation(const CollarParams& c) {
  const double ell = c.ell();
  const double pref = ell / (2.0 * kPi * kPi);
  return SymTwoTensorField::closed_form(
      c, {[c, pref](double s) {
            const auto g = angle_gauge(c, s);
            const double sec2 = 1.0 / (g.cos_u * g.cos_u);
            const double a = pref * sec2 * (1.0 + g.u * g.tan_u());
            return TensorComponents{a, 0.0, a};
          },
          [c, pref, ell](double s) {
            const auto g = angle_gauge(c, s);
            const double sec2 = 1.0 / (g.cos_u * g.cos_u);
            const double t = g.tan_u();
            const double da_du = pref * (3.0 * sec2 * t + g.u * sec2 * (2.0 * t * t + sec2));
            const double da = da_du * ell / kTwoPi;
            return TensorComponents{da, 0.0, da};
          }});
}

SymTwoTensorField re_quad_diff(const CollarParams& c, QuadDiffCoeff q) {
  const double a = q.c.real();
  const double b = q.c.imag();
  return SymTwoTensorField::closed_form(c, constant_functions({a, -b, -a}));
}

SymTwoTensorField lie_derivative(const CollarParams& c, const RadialField& x) {
  if (!x.grid) throw DomainError("lie_derivative: radial field has no grid");
  require_same_collar(c, x.grid->collar());
  const auto& g = *x.grid;
  const std::size_t n = g.size();
  if (x.x.size() != n) throw DomainError("lie_derivative: radial field does not match its grid");
  const auto dx = g.d_ds(x.x);
  std::vector<double> ss(n), st(n, 0.0), tt(n);
  for (std::size_t j = 0; j < n; ++j) {
    tt[j] = g.drho2()[j] * x.x[j];
    ss[j] = tt[j] + 2.0 * g.rho2()[j] * dx[j];
  }
  return SymTwoTensorField::sampled(x.grid, std::move(ss), std::move(st), std::move(tt));
}

Divergence divergence(const SymTwoTensorField& h, const CollarGrid& g) {
  const auto v = h.on_grid(g);
  const auto d = h.ds_on_grid(g);
  Divergence out;
  out.s.resize(g.size());
  out.theta.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double phi = g.dlog_rho()[j];
    const double inv = 1.0 / g.rho2()[j];
    out.s[j] = inv * (d.ss[j] - phi * v.ss[j] - phi * v.tt[j]);
    out.theta[j] = inv * d.st[j];
  }
  return out;
}

namespace {

double l2_pairing(const GridComponents& a, const GridComponents& b, const CollarGrid& g) {
  std::vector<double> f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    f[j] = (a.ss[j] * b.ss[j] + 2.0 * a.st[j] * b.st[j] + a.tt[j] * b.tt[j]) / g.rho2()[j];
  return kTwoPi * g.integrate(f);
}

}  // namespace

double l2_inner(const SymTwoTensorField& h, const SymTwoTensorField& k, const CollarGrid& g) {
  return l2_pairing(h.on_grid(g), k.on_grid(g), g);
}

double l2_norm(const SymTwoTensorField& h, const CollarGrid& g) {
  const auto v = h.on_grid(g);
  return std::sqrt(std::max(0.0, l2_pairing(v, v, g)));
}

DecompositionResult horizontal_project(const CollarParams& c, const SymTwoTensorField& k, std::size_t grid_size) {
  require_same_collar(c, k.collar());
  const auto grid = make_grid(c, grid_size);
  const auto& g = *grid;
  const std::size_t n = g.size();
  const auto K = k.on_grid(g);
  const double scale = std::max({max_abs(K.ss), max_abs(K.tt), std::numeric_limits<double>::min()});
  if (max_abs(K.st) > 1e-12 * scale) {
    throw UnsupportedInput("horizontal_project: the s-theta component must vanish (rotationally invariant diagonal input)");
  }

  // ss - tt equation: 2 rho^2 x' = k_ss - k_tt - 2c, so x = x0 + P(c) with P
  // affine in c.  The tt residual k_tt + c - (rho^2)' x is then affine in
  // (c, x0) and is minimised in L^2(g).  x is rebuilt from the current c and
  // the solve repeated on the remaining residual, since P grows like l^-3 and
  // one pass loses digits to cancellation at small l.
  std::vector<double> r1(n), r2(n), f(n);
  {
    for (std::size_t j = 0; j < n; ++j) f[j] = -1.0 / g.rho2()[j];
    const auto P1 = g.antiderivative(f);
    for (std::size_t j = 0; j < n; ++j) {
      r1[j] = 1.0 - g.drho2()[j] * P1[j];
      r2[j] = -g.drho2()[j];
    }
  }
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = a[j] * b[j] / g.rho2()[j];
    return g.integrate(w);
  };
  const double a11 = dot(r1, r1), a12 = dot(r1, r2), a22 = dot(r2, r2);
  const double det = a11 * a22 - a12 * a12;

  double cc = 0.0, x0 = 0.0;
  std::vector<double> x(n), R(n);
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t j = 0; j < n; ++j) f[j] = (K.ss[j] - K.tt[j] - 2.0 * cc) / (2.0 * g.rho2()[j]);
    const auto P = g.antiderivative(f);
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = x0 + P[j];
      R[j] = K.tt[j] + cc - g.drho2()[j] * x[j];
    }
    const double b1 = -dot(R, r1), b2 = -dot(R, r2);
    cc += (b1 * a22 - b2 * a12) / det;
    x0 += (a11 * b2 - a12 * b1) / det;
  }
  for (std::size_t j = 0; j < n; ++j) f[j] = (K.ss[j] - K.tt[j] - 2.0 * cc) / (2.0 * g.rho2()[j]);
  const auto P = g.antiderivative(f);

  DecompositionResult res;
  res.c.c = {cc, 0.0};
  res.x.grid = grid;
  res.x.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) res.x.x[j] = x0 + P[j];

  const auto recon = lie_derivative(c, res.x).on_grid(g);
  GridComponents diff{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    diff.ss[j] = K.ss[j] - cc - recon.ss[j];
    diff.st[j] = K.st[j] - recon.st[j];
    diff.tt[j] = K.tt[j] + cc - recon.tt[j];
  }
  res.residual = std::sqrt(std::max(0.0, l2_pairing(diff, diff, g)));
  const double knorm = std::sqrt(std::max(0.0, l2_pairing(K, K, g)));
  res.relative_residual = knorm > 0.0 ? res.residual / knorm : res.residual;

  // Re(i dw^2) = -2 ds dtheta; its projection coefficient is the imaginary part.
  std::vector<double> num(n), den(n);
  for (std::size_t j = 0; j < n; ++j) {
    num[j] = -2.0 * K.st[j] / g.rho2()[j];
    den[j] = 2.0 / g.rho2()[j];
  }
  res.imag_part = g.integrate(num) / g.integrate(den);
  for (std::size_t j = 0; j < n; ++j)
    res.x_odd_defect = std::max(res.x_odd_defect, std::fabs(res.x.x[j] + res.x.x[n - 1 - j]));
  return res;
}

double pointwise_norm(const CollarParams& c, const SymTwoTensorField& h, double s) {
  const auto v = h.value(s);
  const double r = conformal_factor(c, s);
  return std::sqrt(v.ss * v.ss + 2.0 * v.st * v.st + v.tt * v.tt) / (r * r);
}

double ck_seminorm(const CollarParams& c, const SymTwoTensorField& h, double s, int k) {
  if (k < 0 || k >= 2) throw UnsupportedInput("ck_seminorm: only orders k = 0 and k = 1 are supported");
  const double n0 = pointwise_norm(c, h, s);
  if (k == 0) return n0;
  const auto v = h.value(s);
  const auto d = h.ds(s);
  const double phi = c.ell() / kTwoPi * angle_gauge(c, s).tan_u();
  // nabla_k h_ij for the conformal connection
  const double s_ss = d.ss - 2.0 * phi * v.ss;
  const double s_st = d.st - 2.0 * phi * v.st;
  const double s_tt = d.tt - 2.0 * phi * v.tt;
  const double t_ss = -2.0 * phi * v.st;
  const double t_st = phi * (v.ss - v.tt);
  const double t_tt = 2.0 * phi * v.st;
  const double sum = s_ss * s_ss + 2.0 * s_st * s_st + s_tt * s_tt + t_ss * t_ss + 2.0 * t_st * t_st + t_tt * t_tt;
  const double r = conformal_factor(c, s);
  return n0 + std::sqrt(sum) / (r * r * r);
}

double wp_speed(const CollarParams& c, QuadDiffCoeff q) {
  const double us = c.u_star();
  const double sc = std::sin(c.u_star_complement()) * std::cos(c.u_star_complement());
  const double k = kTwoPi / c.ell();
  return std::sqrt(4.0 * kPi * std::norm(q.c) * k * k * k * (us + sc));
}

double wp_speed_quadrature(const CollarParams& c, QuadDiffCoeff q, std::size_t n) {
  const auto g = make_grid(c, n);
  return l2_norm(re_quad_diff(c, q), *g);
}

double first_variation_inj(const CollarParams& c, const SymTwoTensorField& k) {
  // sigma' = rho^-1 d/dtheta has unit length, and for a rotationally
  // invariant k the integrand is constant along the loop of length 2 inj(0).
  const double r = conformal_factor(c, 0.0);
  const double loop = shortest_loop(c, make_collar_point(c, 0.0, 0.0)).length;
  return 0.25 * k.value(0.0).tt / (r * r) * loop;
}

double center_norm_over_speed(const CollarParams& c) {
  const QuadDiffCoeff one{{1.0, 0.0}};
  return pointwise_norm(c, re_quad_diff(c, one), 0.0) / wp_speed(c, one);
}

double yaba_ratio(const CollarParams& c) { return center_norm_over_speed(c) * std::sqrt(injectivity_radius(c, 0.0)); }

namespace {

struct EvolutionSample {
  double norm;
  double cumulative;  // integral of the C^k speed from times[0]
};

std::vector<EvolutionSample> evolution_samples(std::span<const double> times, const std::function<double(double)>& ell,
                                               const std::function<double(double)>& dell,
                                               const TensorFunctions& omega, int k) {
  auto speed = [&](double t) {
    CollarParams c(ell(t));
    return ck_seminorm(c, dl_variation(c).scaled(dell(t)), 0.0, k);
  };
  std::vector<EvolutionSample> out(times.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      double err = 0.0;
      cum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(speed, times[i - 1], times[i], 12, 1e-12, &err);
    }
    CollarParams c(ell(times[i]));
    out[i] = {ck_seminorm(c, SymTwoTensorField::closed_form(c, omega), 0.0, k), cum};
  }
  return out;
}

// Returns +inf when some pair needs an unbounded constant.
double smallest_constant(const std::vector<EvolutionSample>& v, std::size_t& pairs) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (i == j || !(v[i].norm > 0.0) || !(v[j].norm > 0.0)) continue;
      ++pairs;
      const double lr = std::log(v[i].norm / v[j].norm);
      if (lr <= 1e-14) continue;
      const double I = std::fabs(v[i].cumulative - v[j].cumulative);
      if (!(I > 0.0)) return std::numeric_limits<double>::infinity();
      best = std::max(best, lr / I);
    }
  }
  return best;
}

}  // namespace

TensorEvolutionReport tensor_evolution_check(std::span<const double> times, const std::function<double(double)>& ell,
                                             const std::function<double(double)>& dell, const TensorFunctions& omega,
                                             int k) {
  if (k < 0 || k >= 2) throw UnsupportedInput("tensor_evolution_check: only orders k = 0 and k = 1 are supported");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("tensor_evolution_check: times must be increasing");
  TensorEvolutionReport rep;
  rep.k = k;
  std::size_t pairs = 0;
  rep.C_emp = smallest_constant(evolution_samples(times, ell, dell, omega, k), pairs);
  rep.pairs = pairs;

  std::vector<double> fine;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) fine.push_back(0.5 * (times[i - 1] + times[i]));
    fine.push_back(times[i]);
  }
  std::size_t fine_pairs = 0;
  rep.C_emp_refined = smallest_constant(evolution_samples(fine, ell, dell, omega, k), fine_pairs);
  rep.finite = std::isfinite(rep.C_emp) && std::isfinite(rep.C_emp_refined);
  if (rep.finite) {
    const double ref = std::max(rep.C_emp, rep.C_emp_refined);
    rep.relative_change = ref > 0.0 ? std::fabs(rep.C_emp_refined - rep.C_emp) / ref : 0.0;
  } else {
    rep.relative_change = std::numeric_limits<double>::infinity();
  }
  rep.stable = rep.relative_change <= 0.05;
  return rep;
}

}  // namespace pinchlab
