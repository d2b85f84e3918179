#include "pinchlab/pinch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

// Boost 1.74 pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "internal/json_util.hpp"
#include "internal/numeric.hpp"
#include "internal/parallel.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/horizontal.hpp"
#include "pinchlab/thick_thin.hpp"

namespace pinchlab {
namespace {

using detail::fmt;
using detail::integrate;
using detail::log_spaced;
using detail::relative_change;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLengthCeiling = kMaxCollarLength * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
const Pchip& as_pchip(const std::shared_ptr<const void>& p) { return *static_cast<const Pchip*>(p.get()); }

std::vector<double> schedule_times(const PinchSchedule& sched, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = sched.T() * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

std::vector<double> uniform(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  x.back() = hi;
  return x;
}

// Key=value list of an inline spec, e.g. "p=3,ell0=0.25".
std::vector<std::pair<std::string, double>> parse_params(std::string_view body, std::string_view spec) {
  std::vector<std::pair<std::string, double>> out;
  std::size_t pos = 0;
  while (pos <= body.size() && !body.empty()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string_view item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    const int column = static_cast<int>(spec.size() - body.size() + pos + 1);
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError("schedule spec \"" + std::string(spec) + "\": expected key=value at column " +
                           std::to_string(column),
                       1, column);
    }
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw ParseError("schedule spec \"" + std::string(spec) + "\": value of " + key + " is not a number", 1,
                       column + static_cast<int>(eq) + 1);
    }
    out.emplace_back(key, v);
    pos = comma + 1;
    if (comma == body.size()) break;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- schedules

PinchSchedule PinchSchedule::power(double T, double p, double ell0, double ellT) {
  PinchSchedule s;
  s.kind_ = Kind::power;
  s.T_ = T;
  s.p_ = p;
  s.ell0_ = ell0;
  s.ell_T_ = ellT;
  s.validate();
  return s;
}

PinchSchedule PinchSchedule::sampled(std::vector<double> t, std::vector<double> ell) {
  if (t.size() != ell.size()) throw DomainError("schedule samples: time and length arrays differ in size");
  if (t.size() < 4) throw DomainError("schedule samples: at least four samples are required");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw DomainError("schedule samples: times must be strictly increasing");
  }
  if (t.front() != 0.0) throw DomainError("schedule samples: the first sample must be at t = 0");
  PinchSchedule s;
  s.kind_ = Kind::samples;
  s.T_ = t.back();
  s.ell0_ = ell.front();
  s.ell_T_ = ell.back();
  s.t_samples_ = t;
  s.ell_samples_ = ell;
  s.validate();
  s.interp_ = std::make_shared<const Pchip>(std::move(t), std::move(ell));
  return s;
}

void PinchSchedule::validate() const {
  if (!(T_ > 0.0) || !std::isfinite(T_)) throw DomainError("schedule: T = " + fmt(T_) + " must be positive");
  if (kind_ == Kind::power) {
    if (!(p_ > 0.0) || !std::isfinite(p_)) throw DomainError("schedule: p = " + fmt(p_) + " must be positive");
    if (!(ell0_ >= 0.0) || !(ell_T_ >= 0.0)) throw DomainError("schedule: ell0 and ellT must be nonnegative");
    if (!(ell0_ + ell_T_ <= kLengthCeiling)) {
      throw DomainError("schedule: l(0) = " + fmt(ell0_ + ell_T_) + " exceeds 2 asinh(1)");
    }
    if (ell0_ + ell_T_ == 0.0) throw DomainError("schedule: l(t) must be positive for t < T");
    return;
  }
  for (std::size_t i = 0; i < ell_samples_.size(); ++i) {
    const double l = ell_samples_[i];
    if (!std::isfinite(l) || l < 0.0) throw DomainError("schedule samples: lengths must be finite and nonnegative");
    if (i + 1 < ell_samples_.size() && !(l > 0.0)) {
      throw DomainError("schedule samples: l(t) must be positive for t < T");
    }
    if (i > 0 && l > ell_samples_[i - 1]) throw DomainError("schedule samples: l(t) must be nonincreasing");
  }
  if (!(ell_samples_.front() <= kLengthCeiling)) {
    throw DomainError("schedule: l(0) = " + fmt(ell_samples_.front()) + " exceeds 2 asinh(1)");
  }
}

bool PinchSchedule::is_constant() const noexcept {
  if (kind_ == Kind::power) return ell0_ == 0.0;
  return ell_samples_.front() == ell_samples_.back();
}

void PinchSchedule::require_time(double t) const {
  if (!(t >= 0.0) || !(t <= T_)) throw DomainError("t = " + fmt(t) + " outside the schedule interval [0, " + fmt(T_) + "]");
}

double PinchSchedule::ell(double t) const {
  require_time(t);
  if (kind_ == Kind::power) {
    if (ell0_ == 0.0) return ell_T_;
    return ell0_ * std::pow(1.0 - t / T_, p_) + ell_T_;
  }
  return std::max(as_pchip(interp_)(t), ell_T_);
}

double PinchSchedule::dell(double t) const {
  require_time(t);
  if (kind_ == Kind::power) {
    if (ell0_ == 0.0) return 0.0;
    const double r = 1.0 - t / T_;
    if (r == 0.0 && p_ < 1.0) return -kInf;
    return -ell0_ * p_ / T_ * std::pow(r, p_ - 1.0);
  }
  return std::min(as_pchip(interp_).prime(t), 0.0);
}

PinchSchedule PinchSchedule::from_json(std::string_view text) {
  const auto j = detail::parse_json(text);
  if (!j.is_object()) throw ParseError("schedule: top-level JSON value must be an object", 1, 1);
  const double T = detail::field<double>(j, "T", "schedule");
  const auto form = detail::field<nlohmann::json>(j, "form", "schedule");
  const auto type = detail::field<std::string>(form, "type", "schedule.form");
  auto optional = [&](const char* key, double fallback) {
    return form.contains(key) ? detail::field<double>(form, key, "schedule.form") : fallback;
  };
  if (type == "power") {
    return power(T, detail::field<double>(form, "p", "schedule.form"), optional("ell0", 0.25), optional("ellT", 0.0));
  }
  if (type == "samples") {
    const auto rows = detail::field<std::vector<std::vector<double>>>(form, "samples", "schedule.form");
    std::vector<double> t, ell;
    for (const auto& r : rows) {
      if (r.size() != 2) throw ParseError("schedule.form.samples: each entry must be a [t, ell] pair");
      t.push_back(r[0]);
      ell.push_back(r[1]);
    }
    if (t.empty() || std::fabs(t.back() - T) > 1e-12 * std::max(1.0, std::fabs(T))) {
      throw DomainError("schedule samples: the last sample must be at t = T = " + fmt(T));
    }
    t.back() = T;
    return sampled(std::move(t), std::move(ell));
  }
  throw ParseError("schedule.form: unknown type \"" + type + "\" (expected power or samples)");
}

PinchSchedule PinchSchedule::from_inline(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  const auto params = parse_params(body, spec);
  double T = 1.0, p = 0.0, ell0 = 0.25, ellT = 0.0, ell = 0.25;
  bool have_p = false;
  for (const auto& [key, v] : params) {
    if (key == "T") {
      T = v;
    } else if (key == "p" && kind == "power") {
      p = v;
      have_p = true;
    } else if (key == "ell0" && kind != "constant") {
      ell0 = v;
    } else if (key == "ellT" && kind != "constant") {
      ellT = v;
    } else if (key == "ell" && kind == "constant") {
      ell = v;
    } else {
      throw ParseError("schedule spec \"" + std::string(spec) + "\": unknown parameter " + key + " for " +
                       std::string(kind));
    }
  }
  if (kind == "power") {
    if (!have_p) throw ParseError("schedule spec \"" + std::string(spec) + "\": power requires p");
    return power(T, p, ell0, ellT);
  }
  if (kind == "linear") return power(T, 1.0, ell0, ellT);
  if (kind == "constant") return power(T, 1.0, 0.0, ell);
  throw ParseError("schedule spec \"" + std::string(spec) + "\": unknown form \"" + std::string(kind) +
                       "\" (expected power, linear or constant)",
                   1, 1);
}

PinchSchedule PinchSchedule::parse(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return from_json(text);
  return from_inline(text);
}

std::string PinchSchedule::to_json() const {
  nlohmann::ordered_json j;
  j["T"] = T_;
  nlohmann::ordered_json form;
  if (kind_ == Kind::power) {
    form["type"] = "power";
    form["p"] = p_;
    form["ell0"] = ell0_;
    form["ellT"] = ell_T_;
  } else {
    form["type"] = "samples";
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t_samples_.size(); ++i) rows.push_back({t_samples_[i], ell_samples_[i]});
    form["samples"] = rows;
  }
  j["form"] = form;
  return j.dump();
}

// ---------------------------------------------------------------- WP length

double horizontal_speed_factor(double ell) {
  const CollarParams c(ell);
  const auto r = horizontal_project(c, dl_variation(c), 128);
  return wp_speed(c, r.c);
}

SpeedLaw default_speed_law() { return &horizontal_speed_factor; }

TailAsymptotics measure_tail(const SpeedLaw& law) {
  constexpr double l1 = 1e-12, l2 = 1e-13;
  const double f1 = law(l1), f2 = law(l2);
  TailAsymptotics t;
  if (!(f1 > 0.0) || !(f2 > 0.0) || !std::isfinite(f1) || !std::isfinite(f2)) {
    t.exponent = -kInf;
    t.integrable = false;
    return t;
  }
  t.exponent = std::log(f1 / f2) / std::log(l1 / l2);
  t.integrable = t.exponent > -1.0 + 1e-9;
  return t;
}

double wp_length(const PinchSchedule& sched, double t, const SpeedLaw& law) {
  if (!(t >= 0.0) || !(t < sched.T())) {
    throw DomainError("wp_length: t = " + fmt(t) + " outside [0, " + fmt(sched.T()) + ")");
  }
  const double span = sched.ell(t) - sched.ell_T();
  if (span <= 0.0) return 0.0;
  if (sched.pinches() && !measure_tail(law).integrable) return kInf;
  // l = l_T + v^2 turns the l^{-1/2} endpoint behaviour into a bounded integrand.
  const double lT = sched.ell_T();
  auto g = [&](double v) { return 2.0 * v * law(lT + v * v); };
  return integrate(g, 0.0, std::sqrt(span));
}

double wp_length_between(const PinchSchedule& sched, double t1, double t2, const SpeedLaw& law) {
  if (!(t1 >= 0.0) || !(t1 <= t2) || !(t2 < sched.T())) {
    throw DomainError("wp_length_between: need 0 <= t1 <= t2 < T");
  }
  if (t1 == t2) return 0.0;
  auto g = [&](double tau) {
    const double d = sched.dell(tau);
    return d == 0.0 ? 0.0 : law(sched.ell(tau)) * std::fabs(d);
  };
  return integrate(g, t1, t2);
}

// ---------------------------------------------------------------- boundary gauge

double metric_in_boundary_gauge(const CollarParams& c, double d) {
  const double d0 = c.tau_max();
  if (!(d >= 0.0) || !(d <= d0 * (1.0 + 1e-14))) {
    throw DomainError("d = " + fmt(d) + " outside the valid interval [0, " + fmt(d0) + "]");
  }
  // dist_to_boundary decreases from d(0) at s = 0 to 0 at s = X.
  double lo = 0.0, hi = c.half_width();
  // Bisect to the resolution of s; near the end rho varies like exp(d).
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (dist_to_boundary(c, mid) > d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return conformal_factor(c, 0.5 * (lo + hi));
}

double boundary_gauge_rho(const CollarParams& c, double d) {
  const double d_max = 2.0 * c.tau_max();
  if (!(d >= 0.0) || !(d <= d_max * (1.0 + 1e-14))) {
    throw DomainError("d = " + fmt(d) + " outside the valid interval [0, " + fmt(d_max) + "]");
  }
  return c.ell() / kTwoPi * std::cosh(c.tau_max() - d);
}

double dinj_dell_at_distance(const CollarParams& c, double d) {
  // sinh inj = 2 sinh^2(l/4) cosh d + e^-d.
  const double inj = injectivity_radius_from_distance(c, d);
  return 0.5 * c.sinh_half() * std::cosh(d) / std::cosh(inj);
}

double CuspLimit::rho(double d) const {
  if (!(d >= 0.0)) throw DomainError("d = " + fmt(d) + " must be nonnegative");
  if (cusp) return std::exp(-d) / kPi;
  return boundary_gauge_rho(CollarParams(ell_T), d);
}

double CuspLimit::inj(double d) const {
  if (!(d >= 0.0)) throw DomainError("d = " + fmt(d) + " must be nonnegative");
  if (cusp) return std::asinh(std::exp(-d));
  return injectivity_radius_from_distance(CollarParams(ell_T), d);
}

double CuspLimit::curvature_defect(std::span<const double> d) const {
  // rho_hat'' = rho_hat, checked by central differences with step h.
  double worst = 0.0;
  constexpr double h = 1e-4;
  for (double x : d) {
    const double a = std::max(x, h);
    const double second = (rho(a + h) - 2.0 * rho(a) + rho(a - h)) / (h * h);
    worst = std::max(worst, std::fabs(second - rho(a)) / rho(a));
  }
  return worst;
}

CuspLimit limit_inj(const PinchSchedule& sched) { return CuspLimit{sched.pinches(), sched.ell_T()}; }

std::vector<double> convergence_grid(const PinchSchedule& sched, double window, std::size_t n) {
  if (n < 2) throw DomainError("convergence grid needs at least 2 points");
  if (!(window > 0.0)) throw DomainError("d-window must be positive");
  const double chart = 2.0 * CollarParams(sched.ell(0.0)).tau_max();
  return uniform(0.0, std::min(window, chart), n);
}

double thick_boundary_distance(const CollarParams& c, double delta) {
  const auto thin = thin_interval(c, delta);
  if (thin.empty()) return c.tau_max();
  const double edge = std::min(thin.intervals.front().hi, c.half_width());
  return dist_to_boundary(c, edge);
}

// ---------------------------------------------------------------- C^0 convergence

namespace {

struct Sampled {
  std::vector<double> times, ell, L;
  std::vector<std::vector<double>> root_inj;  // sqrt(inj) on the d-grid
  std::vector<double> S, inj_sup, rho_sup;
};

Sampled sample_convergence(const PinchSchedule& sched, std::size_t nt, const std::vector<double>& d,
                           const SpeedLaw& law) {
  const CuspLimit lim = limit_inj(sched);
  std::vector<double> lim_root(d.size()), lim_inj(d.size()), lim_rho(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    lim_inj[k] = lim.inj(d[k]);
    lim_root[k] = std::sqrt(lim_inj[k]);
    lim_rho[k] = lim.rho(d[k]);
  }
  Sampled out;
  out.times = schedule_times(sched, nt);
  out.ell.resize(nt);
  out.L.resize(nt);
  out.root_inj.resize(nt);
  out.S.resize(nt);
  out.inj_sup.resize(nt);
  out.rho_sup.resize(nt);
  detail::parallel_for(nt, [&](std::size_t i) {
    const double l = sched.ell(out.times[i]);
    out.ell[i] = l;
    out.L[i] = wp_length(sched, out.times[i], law);
    const CollarParams c(l);
    auto& r = out.root_inj[i];
    r.resize(d.size());
    double S = 0.0, isup = 0.0, rsup = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double inj = injectivity_radius_from_distance(c, d[k]);
      r[k] = std::sqrt(inj);
      S = std::max(S, std::fabs(r[k] - lim_root[k]));
      isup = std::max(isup, std::fabs(inj - lim_inj[k]));
      rsup = std::max(rsup, std::fabs(boundary_gauge_rho(c, d[k]) - lim_rho[k]));
    }
    out.S[i] = S;
    out.inj_sup[i] = isup;
    out.rho_sup[i] = rsup;
  });
  return out;
}

// max_i S_i / L_i; infinite when S > 0 at L = 0.
double max_ratio(const std::vector<double>& S, const std::vector<double>& L) {
  double K = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (S[i] == 0.0) continue;
    K = std::max(K, L[i] > 0.0 ? S[i] / L[i] : kInf);
  }
  return K;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

}  // namespace

ConvergenceReport unif_conv_check(const PinchSchedule& sched, const ConvergenceConfig& cfg, const SpeedLaw& law) {
  if (cfg.time_samples < 2) throw DomainError("unif_conv_check: need at least 2 time samples");
  const double L0 = wp_length(sched, 0.0, law);
  if (!std::isfinite(L0)) {
    throw HypothesisViolation("unif_conv_check: the schedule has infinite WP length (tail exponent " +
                              fmt(measure_tail(law).exponent) +
                              " <= -1), so the finite-length hypothesis of uniform convergence fails");
  }
  const auto d = convergence_grid(sched, cfg.window, cfg.d_samples);
  const auto d_fine = convergence_grid(sched, cfg.window, 2 * cfg.d_samples - 1);
  const auto base = sample_convergence(sched, cfg.time_samples, d, law);
  const auto fine = sample_convergence(sched, 2 * cfg.time_samples, d_fine, law);

  ConvergenceReport rep;
  rep.times = base.times;
  rep.ell = base.ell;
  rep.L = base.L;
  rep.S = base.S;
  rep.inj_sup = base.inj_sup;
  rep.rho_sup = base.rho_sup;
  rep.window = d.back();
  rep.K0 = max_ratio(base.S, base.L);
  rep.K0_refined = max_ratio(fine.S, fine.L);
  rep.finite = std::isfinite(rep.K0) && std::isfinite(rep.K0_refined);
  rep.relative_change = relative_change(rep.K0, rep.K0_refined);
  rep.stable = rep.finite && rep.relative_change <= 0.05;
  rep.S_monotone = nonincreasing(base.S) && nonincreasing(fine.S);
  rep.rho_monotone = nonincreasing(base.rho_sup);
  for (std::size_t i = 1; i < base.times.size(); ++i) {
    double step = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      step = std::max(step, std::fabs(base.root_inj[i][k] - base.root_inj[i - 1][k]));
    }
    const double dL = base.L[i - 1] - base.L[i];
    if (step > 0.0) rep.secant_K0 = std::max(rep.secant_K0, dL > 0.0 ? step / dL : kInf);
  }
  return rep;
}

// ---------------------------------------------------------------- inj^{1/2} rate

double material_dinj(const CollarParams& c, double s) {
  const auto g = angle_gauge(c, s);
  const double inj = std::asinh(c.sinh_half() / g.cos_u);
  // cosh(inj) D inj = sec u (cosh(l/2)/2 - sinh(l/2) sin^2 u / l)
  const double rhs = (0.5 * c.cosh_half() - c.sinh_half() * g.sin_u * g.sin_u / c.ell()) / g.cos_u;
  return rhs / std::cosh(inj);
}

double rootinj_ratio(const CollarParams& c, double s) {
  const double inj = injectivity_radius(c, s);
  return std::fabs(material_dinj(c, s)) / (2.0 * std::sqrt(inj) * horizontal_speed_factor(c.ell()));
}

namespace {

struct RatioPass {
  double sup = 0.0;
  double ell = 0.0;
  double s_over_X = 0.0;
  std::size_t points = 0;
};

RatioPass ratio_pass(const std::vector<double>& ells, const std::vector<bool>& moving, std::size_t grid) {
  std::vector<RatioPass> per(ells.size());
  detail::parallel_for(ells.size(), [&](std::size_t i) {
    const CollarParams c(ells[i]);
    const auto s = chebyshev_s_grid(c, grid);
    RatioPass& r = per[i];
    r.points = s.size();
    if (!moving[i]) return;  // l' = 0: both sides vanish
    const double f = horizontal_speed_factor(c.ell());
    for (double x : s) {
      const double v = std::fabs(material_dinj(c, x)) / (2.0 * std::sqrt(injectivity_radius(c, x)) * f);
      if (!(v <= r.sup)) {
        r.sup = v;
        r.ell = c.ell();
        r.s_over_X = x / c.half_width();
      }
    }
  });
  RatioPass total;
  for (const auto& r : per) {
    total.points += r.points;
    if (!(r.sup <= total.sup)) {
      total.sup = r.sup;
      total.ell = r.ell;
      total.s_over_X = r.s_over_X;
    }
  }
  return total;
}

RootInjReport assemble(const RatioPass& a, const RatioPass& b) {
  RootInjReport rep;
  rep.points = a.points;
  rep.K0 = a.sup;
  rep.K0_refined = b.sup;
  rep.argmax_ell = a.ell;
  rep.argmax_s_over_X = a.s_over_X;
  rep.finite = std::isfinite(a.sup) && std::isfinite(b.sup);
  rep.relative_change = relative_change(a.sup, b.sup);
  rep.stable = rep.finite && rep.relative_change <= 0.05;
  return rep;
}

}  // namespace

RootInjReport rootinj_bound_check(const PinchSchedule& sched, std::size_t time_samples, std::size_t grid) {
  if (time_samples < 1 || grid < 2) throw DomainError("rootinj_bound_check: grids too small");
  auto pass = [&](std::size_t nt, std::size_t ng) {
    const auto t = schedule_times(sched, nt);
    std::vector<double> ells(nt);
    std::vector<bool> moving(nt);
    for (std::size_t i = 0; i < nt; ++i) {
      ells[i] = sched.ell(t[i]);
      moving[i] = sched.dell(t[i]) != 0.0;
    }
    return ratio_pass(ells, moving, ng);
  };
  return assemble(pass(time_samples, grid), pass(2 * time_samples, 2 * grid));
}

RootInjReport rootinj_bound_sweep(double ell_min, double ell_max, std::size_t samples, std::size_t grid) {
  if (!(ell_min > 0.0) || !(ell_min < ell_max) || samples < 2 || grid < 2) {
    throw DomainError("rootinj_bound_sweep: need 0 < ell_min < ell_max, samples >= 2, grid >= 2");
  }
  auto pass = [&](std::size_t n, std::size_t ng) {
    return ratio_pass(log_spaced(ell_min, ell_max, n), std::vector<bool>(n, true), ng);
  };
  return assemble(pass(samples, grid), pass(2 * samples, 2 * grid));
}

// ---------------------------------------------------------------- thick-part equivalence

double admissible_t0(const PinchSchedule& sched, double K0, double delta, const SpeedLaw& law) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(K0 >= 0.0) || !std::isfinite(K0)) throw DomainError("K0 must be finite and nonnegative");
  if (K0 == 0.0) return 0.0;
  const double target = std::sqrt(delta) / (2.0 * K0);
  if (wp_length(sched, 0.0, law) <= target) return 0.0;
  double lo = 0.0, hi = sched.T();
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (wp_length(sched, mid, law) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

namespace {

struct EquivPass {
  double C1 = 1.0, C2 = 1.0, C = 0.0, C1_h = 1.0, C2_h = 1.0;
  std::size_t thick = 0;
};

EquivPass equivalence_pass(const PinchSchedule& sched, double t0, double delta, const std::vector<double>& d,
                           std::size_t nt, const SpeedLaw& law) {
  std::vector<double> t(nt);
  for (std::size_t i = 0; i < nt; ++i) t[i] = t0 + (sched.T() - t0) * static_cast<double>(i) / static_cast<double>(nt);
  std::vector<double> L(nt);
  std::vector<std::vector<double>> rho2(nt), inj(nt);
  detail::parallel_for(nt, [&](std::size_t i) {
    L[i] = wp_length(sched, t[i], law);
    const CollarParams c(sched.ell(t[i]));
    rho2[i].resize(d.size());
    inj[i].resize(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double r = boundary_gauge_rho(c, d[k]);
      rho2[i][k] = r * r;
      inj[i][k] = injectivity_radius_from_distance(c, d[k]);
    }
  });
  const CuspLimit lim = limit_inj(sched);
  EquivPass out;
  const double root_delta = std::sqrt(delta);
  for (std::size_t k = 0; k < d.size(); ++k) {
    // x lies in the union over t >= t0 of the delta-thick parts
    double inj_max = 0.0;
    for (std::size_t i = 0; i < nt; ++i) inj_max = std::max(inj_max, inj[i][k]);
    if (inj_max < delta) continue;
    ++out.thick;
    double rmin = kInf, rmax = 0.0, imin = kInf, imax = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      rmin = std::min(rmin, rho2[i][k]);
      rmax = std::max(rmax, rho2[i][k]);
      imin = std::min(imin, inj[i][k]);
      imax = std::max(imax, inj[i][k]);
    }
    out.C1 = std::max(out.C1, rmax / rmin);
    out.C2 = std::max(out.C2, imax / imin);
    const double h = lim.rho(d[k]);
    const double h2 = h * h, ih = lim.inj(d[k]);
    out.C1_h = std::max({out.C1_h, rmax / h2, h2 / rmin});
    out.C2_h = std::max({out.C2_h, imax / ih, ih / imin});
    // |g(t1) - g(t2)|_{g(s)} = |rho1^2 - rho2^2| / rho_s^2, worst s has the smallest rho_s.
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = i + 1; j < nt; ++j) {
        const double dL = L[i] - L[j];
        const double diff = std::fabs(rho2[i][k] - rho2[j][k]) / rmin;
        if (diff == 0.0) continue;
        out.C = std::max(out.C, dL > 0.0 ? diff * root_delta / dL : kInf);
      }
    }
  }
  return out;
}

}  // namespace

EquivalenceReport equivalence_checks(const PinchSchedule& sched, double t0, double K0, const EquivalenceConfig& cfg,
                                     const SpeedLaw& law) {
  if (!(t0 >= 0.0) || !(t0 < sched.T())) throw DomainError("equivalence_checks: t0 = " + fmt(t0) + " outside [0, T)");
  if (!(cfg.delta > 0.0)) throw DomainError("equivalence_checks: delta must be positive");
  if (cfg.time_samples < 2 || cfg.d_samples < 2) throw DomainError("equivalence_checks: grids too small");
  const double L0 = wp_length(sched, t0, law);
  const double lhs = std::pow(2.0 * K0 * L0, 2);
  if (!(lhs <= cfg.delta)) {
    std::string where;
    if (std::isfinite(K0) && std::isfinite(L0)) where = "; admissible t0 >= " + fmt(admissible_t0(sched, K0, cfg.delta, law));
    throw HypothesisViolation("equivalence_checks: (2 K0 L(t0))^2 = " + fmt(lhs) + " exceeds delta = " +
                              fmt(cfg.delta) + " (need L(t0) <= " + fmt(std::sqrt(cfg.delta) / (2.0 * K0)) + where +
                              ")");
  }
  const auto d = convergence_grid(sched, cfg.window, cfg.d_samples);
  const auto d_fine = convergence_grid(sched, cfg.window, 2 * cfg.d_samples - 1);
  const auto a = equivalence_pass(sched, t0, cfg.delta, d, cfg.time_samples, law);
  const auto b = equivalence_pass(sched, t0, cfg.delta, d_fine, 2 * cfg.time_samples, law);

  EquivalenceReport rep;
  rep.t0 = t0;
  rep.delta = cfg.delta;
  rep.K0 = K0;
  rep.hypothesis_lhs = lhs;
  rep.window = d.back();
  rep.thick_points = a.thick;
  rep.C1 = a.C1;
  rep.C2 = a.C2;
  rep.C = a.C;
  rep.C1_h = a.C1_h;
  rep.C2_h = a.C2_h;
  rep.C1_refined = b.C1;
  rep.C2_refined = b.C2;
  rep.C_refined = b.C;
  rep.C1_h_refined = b.C1_h;
  rep.C2_h_refined = b.C2_h;
  for (double v : {a.C1, a.C2, a.C, a.C1_h, a.C2_h, b.C1, b.C2, b.C, b.C1_h, b.C2_h}) {
    rep.finite = rep.finite && std::isfinite(v);
  }
  rep.max_relative_change = std::max({relative_change(a.C1, b.C1), relative_change(a.C2, b.C2),
                                      relative_change(a.C, b.C), relative_change(a.C1_h, b.C1_h),
                                      relative_change(a.C2_h, b.C2_h)});
  rep.stable = rep.finite && rep.max_relative_change <= 0.05;
  return rep;
}

// ---------------------------------------------------------------- Lipschitz in t

namespace {

struct LipPass {
  double constant = 0.0;
  double oracle = 0.0;
};

LipPass lipschitz_pass(const PinchSchedule& sched, double t_max, const std::vector<double>& d, std::size_t n) {
  std::vector<double> t = uniform(0.0, t_max, n + 1);
  std::vector<std::vector<double>> inj(n + 1);
  std::vector<double> oracle(n + 1, 0.0);
  detail::parallel_for(n + 1, [&](std::size_t i) {
    const CollarParams c(sched.ell(t[i]));
    const double rate = std::fabs(sched.dell(t[i]));
    inj[i].resize(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      inj[i][k] = injectivity_radius_from_distance(c, d[k]);
      if (rate > 0.0) oracle[i] = std::max(oracle[i], rate * dinj_dell_at_distance(c, d[k]));
    }
  });
  LipPass out;
  for (std::size_t i = 0; i + 1 <= n; ++i) {
    const double h = t[i + 1] - t[i];
    for (std::size_t k = 0; k < d.size(); ++k) {
      out.constant = std::max(out.constant, std::fabs(inj[i + 1][k] - inj[i][k]) / h);
    }
  }
  for (double o : oracle) out.oracle = std::max(out.oracle, o);
  return out;
}

}  // namespace

LipschitzReport lipschitz_check(const PinchSchedule& sched, std::size_t time_samples, std::size_t d_samples,
                                double fraction, double window) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) throw DomainError("lipschitz_check: fraction must lie in (0, 1)");
  if (time_samples < 2 || d_samples < 2) throw DomainError("lipschitz_check: grids too small");
  LipschitzReport rep;
  rep.t_max = fraction * sched.T();
  const auto d = convergence_grid(sched, window, d_samples);
  const auto d_fine = convergence_grid(sched, window, 2 * d_samples - 1);
  const auto a = lipschitz_pass(sched, rep.t_max, d, time_samples);
  const auto b = lipschitz_pass(sched, rep.t_max, d_fine, 2 * time_samples);
  rep.constant = a.constant;
  rep.constant_refined = b.constant;
  rep.oracle = std::max(a.oracle, b.oracle);
  rep.finite = std::isfinite(a.constant) && std::isfinite(b.constant);
  rep.relative_change = relative_change(a.constant, b.constant);
  rep.stable = rep.finite && rep.relative_change <= 0.02;
  return rep;
}

// ---------------------------------------------------------------- curve report

CurveReport simulate(const PinchSchedule& sched, const CurveConfig& cfg, const SpeedLaw& law) {
  if (cfg.time_samples < 1) throw DomainError("simulate: need at least one time sample");
  CurveReport rep;
  rep.tail = measure_tail(law);
  rep.d_grid = convergence_grid(sched, cfg.window, cfg.d_samples);
  rep.times = schedule_times(sched, cfg.time_samples);
  const std::size_t n = rep.times.size();
  rep.ell.resize(n);
  rep.wp_speed.resize(n);
  rep.L.resize(n);
  rep.S.resize(n);
  rep.ratio.resize(n);
  rep.d_delta.resize(n);
  rep.inj_sup.resize(n);
  rep.profiles.resize(n);
  const CuspLimit lim = limit_inj(sched);
  detail::parallel_for(n, [&](std::size_t i) {
    const double t = rep.times[i];
    const double l = sched.ell(t);
    const double dl = sched.dell(t);
    const CollarParams c(l);
    rep.ell[i] = l;
    rep.wp_speed[i] = dl == 0.0 ? 0.0 : law(l) * std::fabs(dl);
    rep.L[i] = wp_length(sched, t, law);
    rep.d_delta[i] = thick_boundary_distance(c, cfg.delta);
    auto& prof = rep.profiles[i];
    prof.grid = rep.d_grid;
    prof.values.resize(rep.d_grid.size());
    double S = 0.0, isup = 0.0;
    for (std::size_t k = 0; k < rep.d_grid.size(); ++k) {
      const double inj = injectivity_radius_from_distance(c, rep.d_grid[k]);
      const double ref = lim.inj(rep.d_grid[k]);
      prof.values[k] = inj;
      S = std::max(S, std::fabs(std::sqrt(inj) - std::sqrt(ref)));
      isup = std::max(isup, std::fabs(inj - ref));
    }
    rep.S[i] = S;
    rep.inj_sup[i] = isup;
    if (S == 0.0) {
      rep.ratio[i] = 0.0;
    } else if (std::isfinite(rep.L[i])) {
      rep.ratio[i] = rep.L[i] > 0.0 ? S / rep.L[i] : kInf;
    } else {
      rep.ratio[i] = 0.0;
    }
  });
  rep.finite_length = std::isfinite(rep.L.front());
  rep.K0 = rep.finite_length ? max_ratio(rep.S, rep.L) : kInf;
  if (!rep.finite_length) {
    rep.warnings.push_back("infinite WP length: speed tail exponent " + fmt(rep.tail.exponent) +
                           " <= -1; uniform convergence is not asserted and the ratio column is set to 0");
  }
  return rep;
}

}  // namespace pinchlab
