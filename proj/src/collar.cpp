#include "pinchlab/collar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "pinchlab/errors.hpp"

namespace pinchlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Accept 2 asinh(1) as computed at runtime (a few ulps either side).
constexpr double kLengthCeiling = kMaxCollarLength * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());

std::string range_message(const char* what, double value, double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << what << " = " << value << " outside the valid interval [" << lo << ", " << hi << "]";
  return os.str();
}

void require_in_collar(const CollarParams& c, double s) {
  const double x = c.half_width();
  if (!(std::fabs(s) <= x)) throw DomainError(range_message("s", s, -x, x));
}

std::shared_ptr<const ChebyshevBasis> shared_basis(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const ChebyshevBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const ChebyshevBasis>(n);
  return slot;
}

// cos/sin of |u| given |u| and its complement pi/2 - |u|.
void trig_from_complement(double abs_u, double complement, double& cos_u, double& sin_u) {
  if (abs_u <= 0.25 * kPi) {
    cos_u = std::cos(abs_u);
    sin_u = std::sin(abs_u);
  } else {
    cos_u = std::sin(complement);
    sin_u = std::cos(complement);
  }
}

}  // namespace

CollarParams::CollarParams(double ell) : ell_(ell) {
  if (!(ell > 0.0) || !(ell <= kLengthCeiling)) {
    throw DomainError(range_message("ell", ell, 0.0, kMaxCollarLength) + " (open at 0)");
  }
  sinh_half_ = std::sinh(0.5 * ell);
  cosh_half_ = std::cosh(0.5 * ell);
  u_gap_ = std::atan(sinh_half_);
  u_star_ = 0.5 * kPi - u_gap_;
  half_width_ = kTwoPi * u_star_ / ell;
  tau_max_ = std::asinh(1.0 / sinh_half_);
}

CollarPoint make_collar_point(const CollarParams& c, double s, double theta) {
  require_in_collar(c, s);
  if (!std::isfinite(theta)) throw DomainError("theta must be finite");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return {s, t};
}

AngleGauge angle_gauge(const CollarParams& c, double s) {
  require_in_collar(c, s);
  const double a = std::fabs(s);
  const double abs_u = c.ell() * a / kTwoPi;
  const double to_boundary = c.ell() * (c.half_width() - a) / kTwoPi;
  AngleGauge g{};
  double sin_abs = 0.0;
  trig_from_complement(abs_u, c.u_star_complement() + to_boundary, g.cos_u, sin_abs);
  g.u = std::copysign(abs_u, s);
  g.sin_u = std::copysign(sin_abs, s);
  return g;
}

double half_width(double ell) { return CollarParams(ell).half_width(); }

double conformal_factor(const CollarParams& c, double s) {
  return c.ell() / (kTwoPi * angle_gauge(c, s).cos_u);
}

double fermi_coordinate(const CollarParams& c, double s) {
  return std::asinh(angle_gauge(c, s).tan_u());
}

double dist_to_boundary(const CollarParams& c, double s) {
  require_in_collar(c, s);
  // asinh(tan u*) - asinh(tan u) = asinh((sin u* - sin u) / (cos u* cos u)),
  // written in terms of delta = u* - |u| so that d -> 0 carries full precision.
  const double delta = c.ell() * (c.half_width() - std::fabs(s)) / kTwoPi;
  const double gap = c.u_star_complement();
  const double num = 2.0 * std::sin(gap + 0.5 * delta) * std::sin(0.5 * delta);
  const double cos_u_star = c.sinh_half() / c.cosh_half();
  return std::asinh(num / (cos_u_star * std::sin(gap + delta)));
}

double injectivity_radius(const CollarParams& c, double s) {
  return std::asinh(c.sinh_half() / angle_gauge(c, s).cos_u);
}

double injectivity_radius_from_distance(const CollarParams& c, double d) {
  const double d_max = 2.0 * c.tau_max();
  if (!(d >= 0.0) || !(d <= d_max * (1.0 + 1e-14))) {
    throw DomainError(range_message("d", d, 0.0, d_max));
  }
  // cosh(l/2) cosh d - sinh d = 2 sinh^2(l/4) cosh d + e^-d.
  const double q = std::sinh(0.25 * c.ell());
  return std::asinh(2.0 * q * q * std::cosh(d) + std::exp(-d));
}

InjBounds inj_bounds(double d) {
  if (!(d >= 0.0)) throw DomainError(range_message("d", d, 0.0, std::numeric_limits<double>::infinity()));
  const double e = std::exp(-d);
  return {std::asinh(e), std::asinh((1.0 + kSqrt2) * e)};
}

double collar_area(const CollarParams& c, double s1, double s2) {
  require_in_collar(c, s1);
  require_in_collar(c, s2);
  if (!(s1 <= s2)) throw DomainError("collar_area: endpoints must satisfy s1 <= s2");
  if (s1 == s2) return 0.0;
  return c.ell() * (angle_gauge(c, s2).tan_u() - angle_gauge(c, s1).tan_u());
}

InjProfile inj_profile(const CollarParams& c, std::span<const double> s_grid) {
  if (!std::is_sorted(s_grid.begin(), s_grid.end())) throw DomainError("inj_profile: grid must be ascending");
  InjProfile p;
  p.grid.assign(s_grid.begin(), s_grid.end());
  p.values.reserve(s_grid.size());
  for (double s : s_grid) p.values.push_back(injectivity_radius(c, s));
  return p;
}

GeodesicLoop shortest_loop(const CollarParams& c, const CollarPoint& base) {
  return {base, 2.0 * injectivity_radius(c, base.s)};
}

std::vector<double> chebyshev_s_grid(const CollarParams& c, std::size_t n) {
  const auto basis = shared_basis(n);
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[n - 1 - j] = c.half_width() * basis->node(j);
  return s;
}

CollarGrid::CollarGrid(const CollarParams& c, std::size_t n) : collar_(c), basis_(shared_basis(n)) {
  s_.resize(n);
  u_.resize(n);
  cos_u_.resize(n);
  sin_u_.resize(n);
  rho_.resize(n);
  rho2_.resize(n);
  drho2_.resize(n);
  dlog_rho_.resize(n);
  const double ell = c.ell();
  const double scale = ell / kTwoPi;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = basis_->node(j);
    s_[j] = c.half_width() * x;
    u_[j] = c.u_star() * x;
    const double complement = c.u_star_complement() + c.u_star() * basis_->one_minus_abs_node(j);
    double sin_abs = 0.0;
    trig_from_complement(std::fabs(u_[j]), complement, cos_u_[j], sin_abs);
    sin_u_[j] = std::copysign(sin_abs, x);
    if (x == 0.0) sin_u_[j] = 0.0;
    const double tan_u = sin_u_[j] / cos_u_[j];
    rho_[j] = scale / cos_u_[j];
    rho2_[j] = rho_[j] * rho_[j];
    dlog_rho_[j] = scale * tan_u;
    drho2_[j] = 2.0 * rho2_[j] * dlog_rho_[j];
  }
}

std::vector<double> CollarGrid::d_ds(std::span<const double> f) const {
  auto coeffs = basis_->coefficients(f);
  auto deriv = ChebyshevBasis::derivative(coeffs);
  auto out = basis_->values(deriv);
  const double inv = 1.0 / collar_.half_width();
  for (double& v : out) v *= inv;
  return out;
}

std::vector<double> CollarGrid::antiderivative(std::span<const double> f) const {
  auto coeffs = basis_->coefficients(f);
  auto anti = ChebyshevBasis::antiderivative(coeffs);
  auto out = basis_->values(anti);
  for (double& v : out) v *= collar_.half_width();
  return out;
}

double CollarGrid::integrate(std::span<const double> f) const {
  return collar_.half_width() * ChebyshevBasis::integral(basis_->coefficients(f));
}

double CollarGrid::interpolate(std::span<const double> f, double s) const {
  require_in_collar(collar_, s);
  return ChebyshevBasis::evaluate(basis_->coefficients(f), s / collar_.half_width());
}

BoundSweepReport pointwise_bound_sweep(const CollarParams& c, double r, std::size_t grid_size) {
  if (grid_size < 16) throw DomainError("pointwise_bound_sweep: grid_size must be >= 16");
  if (!(r > 0.0)) throw DomainError("pointwise_bound_sweep: radius must be positive");
  const auto s = chebyshev_s_grid(c, grid_size);
  const std::size_t n = s.size();
  std::vector<double> tau(n), rho(n), pi_rho(n), inj(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto g = angle_gauge(c, s[j]);
    tau[j] = std::asinh(g.tan_u());
    rho[j] = c.ell() / (kTwoPi * g.cos_u);
    pi_rho[j] = c.ell() / (2.0 * g.cos_u);
    inj[j] = std::asinh(c.sinh_half() / g.cos_u);
  }

  BoundSweepReport rep{c.ell(), r, grid_size, {}, {}, {}};
  auto init = [](BoundSlack& b) { b.worst_relative_slack = std::numeric_limits<double>::infinity(); };
  init(rep.rho_ratio);
  init(rep.inj_vs_rho);
  init(rep.inj_comparison);
  auto record = [](BoundSlack& b, double slack) {
    ++b.checks;
    if (slack < 0.0) ++b.violations;
    b.worst_relative_slack = std::min(b.worst_relative_slack, slack);
  };

  for (std::size_t j = 0; j < n; ++j) {
    record(rep.inj_vs_rho, (inj[j] - rho[j]) / rho[j]);
    record(rep.inj_vs_rho, (pi_rho[j] - inj[j]) / rho[j]);
  }

  const double grow = std::exp(r);
  const double inj_factor = kPi * grow;
  // The distance between (s_x, theta_x) and (s_y, theta_y) is at least
  // |tau_x - tau_y| with equality on a common meridian, so the ball condition
  // reduces to the Fermi-coordinate gap.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(tau[i] - tau[j]) > r) continue;
      record(rep.rho_ratio, (rho[j] - rho[i] / grow) / rho[i]);
      record(rep.rho_ratio, (rho[i] * grow - rho[j]) / rho[i]);
      record(rep.inj_comparison, (inj[j] - inj[i] / inj_factor) / inj[i]);
      record(rep.inj_comparison, (inj[i] * inj_factor - inj[j]) / inj[i]);
    }
  }
  return rep;
}

}  // namespace pinchlab
