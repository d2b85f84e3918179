#pragma once

// Pinch schedules l(t) on [0, T), the Weil-Petersson length L(t) of the
// model curve t -> collar(l(t)), the cusp limit and the convergence checks
// phrased in the boundary gauge (distance d from one fixed collar end).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinchlab/collar.hpp"

namespace pinchlab {

class PinchSchedule {
 public:
  enum class Kind { power, samples };

  // l(t) = ell0 (1 - t/T)^p + ellT.
  static PinchSchedule power(double T, double p, double ell0, double ellT = 0.0);
  // Monotone cubic (PCHIP) through at least four samples spanning [0, T].
  static PinchSchedule sampled(std::vector<double> t, std::vector<double> ell);

  // {"T": .., "form": {"type": "power"|"samples", "p", "ell0", "ellT", "samples": [[t, l], ..]}}
  static PinchSchedule from_json(std::string_view text);
  // "power:p=3[,ell0=..][,ellT=..][,T=..]", "linear[:..]", "constant[:ell=..][,T=..]".
  static PinchSchedule from_inline(std::string_view spec);
  // JSON when the text starts with '{', inline spec otherwise.
  static PinchSchedule parse(std::string_view text);
  std::string to_json() const;

  Kind kind() const noexcept { return kind_; }
  double T() const noexcept { return T_; }
  double p() const noexcept { return p_; }
  double ell0() const noexcept { return ell0_; }
  double ell_T() const noexcept { return ell_T_; }
  bool pinches() const noexcept { return ell_T_ == 0.0; }
  bool is_constant() const noexcept;

  // t in [0, T]; DomainError otherwise.
  double ell(double t) const;
  double dell(double t) const;

 private:
  PinchSchedule() = default;
  void validate() const;
  void require_time(double t) const;

  Kind kind_ = Kind::power;
  double T_ = 1.0;
  double p_ = 1.0;
  double ell0_ = 0.0;
  double ell_T_ = 0.0;
  std::vector<double> t_samples_, ell_samples_;
  std::shared_ptr<const void> interp_;
};

// Speed per unit |l'|: wp_speed of the projected part of dl_variation.
using SpeedLaw = std::function<double(double)>;
double horizontal_speed_factor(double ell);
SpeedLaw default_speed_law();

struct TailAsymptotics {
  double exponent = 0.0;  // slope of log f(l) against log l as l -> 0
  bool integrable = true;  // exponent > -1
};
TailAsymptotics measure_tail(const SpeedLaw& law);

// L(t) = integral_t^T f(l(tau)) |l'(tau)| dtau, computed in the variable l
// (reparametrization invariance).  +inf when l -> 0 through a non-integrable tail.
double wp_length(const PinchSchedule& sched, double t, const SpeedLaw& law = default_speed_law());
// The same time integral over [t1, t2], evaluated directly in t.
double wp_length_between(const PinchSchedule& sched, double t1, double t2, const SpeedLaw& law = default_speed_law());

// rho(s(d)) with s(d) from bisection on dist_to_boundary; 0 <= d <= d(0).
double metric_in_boundary_gauge(const CollarParams& c, double d);
// (l / 2 pi) cosh(tau_max - d), valid on the one-end chart 0 <= d <= 2 tau_max.
double boundary_gauge_rho(const CollarParams& c, double d);
// d/dl of inj at fixed d on the same chart.
double dinj_dell_at_distance(const CollarParams& c, double d);

// The limit of the boundary-gauge profiles: the cusp for l_T = 0, the
// l_T-collar otherwise.
struct CuspLimit {
  bool cusp = true;
  double ell_T = 0.0;
  double rho(double d) const;
  double inj(double d) const;
  // sup of |rho'' - rho| / rho over a d-grid; 0 for the cusp.
  double curvature_defect(std::span<const double> d) const;
};
CuspLimit limit_inj(const PinchSchedule& sched);

struct ConvergenceConfig {
  std::size_t time_samples = 32;  // t_i = T i / n, i < n
  std::size_t d_samples = 257;
  double window = 5.0;            // D; clipped to 2 tau_max(l(0))
};

// Uniform d-grid on [0, min(D, 2 tau_max(l(0)))].
std::vector<double> convergence_grid(const PinchSchedule& sched, double window, std::size_t n);

struct ConvergenceReport {
  std::vector<double> times, ell, L, S;
  std::vector<double> inj_sup;  // sup_d |inj - I|
  std::vector<double> rho_sup;  // sup_d |rho_hat - rho_hat_limit|
  double window = 0.0;
  double K0 = 0.0;
  double K0_refined = 0.0;
  double relative_change = 0.0;
  double secant_K0 = 0.0;  // max over consecutive samples of the sup |d sqrt(inj)| / dL
  bool finite = true;
  bool stable = true;
  bool S_monotone = true;
  bool rho_monotone = true;
  bool passed() const noexcept { return finite && stable && S_monotone; }
};

// Throws HypothesisViolation when L(0) is infinite.
ConvergenceReport unif_conv_check(const PinchSchedule& sched, const ConvergenceConfig& cfg = {},
                                  const SpeedLaw& law = default_speed_law());

struct RootInjReport {
  std::size_t points = 0;
  double K0 = 0.0;
  double K0_refined = 0.0;
  double relative_change = 0.0;
  double argmax_ell = 0.0;
  double argmax_s_over_X = 0.0;
  bool finite = true;
  bool stable = true;
  bool passed() const noexcept { return finite && stable; }
};

// |D inj| / (2 sqrt(inj) f(l)) at collar point s: d/dt sqrt(inj) along the
// horizontal curve divided by its WP speed.  The factor l' cancels.
double rootinj_ratio(const CollarParams& c, double s);
// Material derivative of inj along the horizontal curve, per unit l'.
double material_dinj(const CollarParams& c, double s);

// Over the schedule's sampled lengths and an n-node s-grid per collar; the
// refined pass doubles both.
RootInjReport rootinj_bound_check(const PinchSchedule& sched, std::size_t time_samples = 32,
                                  std::size_t grid = 256);
// Over log-spaced lengths in [ell_min, ell_max].
RootInjReport rootinj_bound_sweep(double ell_min, double ell_max, std::size_t samples, std::size_t grid);

struct EquivalenceConfig {
  double delta = 0.01;
  double window = 3.0;
  std::size_t time_samples = 64;  // on [t0, T)
  std::size_t d_samples = 129;
};

struct EquivalenceReport {
  double t0 = 0.0;
  double delta = 0.0;
  double K0 = 0.0;
  double hypothesis_lhs = 0.0;  // (2 K0 L(t0))^2
  double window = 0.0;
  std::size_t thick_points = 0;
  double C1 = 0.0, C2 = 0.0, C = 0.0;
  double C1_refined = 0.0, C2_refined = 0.0, C_refined = 0.0;
  double C1_h = 0.0, C2_h = 0.0;  // g(t) and inj against the limit
  double C1_h_refined = 0.0, C2_h_refined = 0.0;
  double max_relative_change = 0.0;
  bool finite = true;
  bool stable = true;
  bool passed() const noexcept { return finite && stable; }
};

// Smallest t0 with (2 K0 L(t0))^2 <= delta.
double admissible_t0(const PinchSchedule& sched, double K0, double delta, const SpeedLaw& law = default_speed_law());
// Throws HypothesisViolation when (2 K0 L(t0))^2 > delta.
EquivalenceReport equivalence_checks(const PinchSchedule& sched, double t0, double K0, const EquivalenceConfig& cfg = {},
                                     const SpeedLaw& law = default_speed_law());

struct LipschitzReport {
  double t_max = 0.0;
  double constant = 0.0;
  double constant_refined = 0.0;
  double oracle = 0.0;  // max |l'| |d inj / dl| over the same samples
  double relative_change = 0.0;
  bool finite = true;
  bool stable = true;  // within 2%
  bool passed() const noexcept { return finite && stable; }
};

// Difference quotients of inj(t, d) on [0, t_max], t_max = fraction * T.
LipschitzReport lipschitz_check(const PinchSchedule& sched, std::size_t time_samples = 256, std::size_t d_samples = 129,
                                double fraction = 0.9, double window = 5.0);

struct CurveConfig {
  std::size_t time_samples = 32;
  std::size_t d_samples = 257;
  double window = 5.0;
  double delta = 0.01;
};

struct CurveReport {
  std::vector<double> times, ell, wp_speed, L, S, ratio, d_delta;
  std::vector<double> d_grid;
  std::vector<InjProfile> profiles;  // boundary-gauge inj on d_grid
  double K0 = 0.0;
  std::vector<double> inj_sup;
  bool finite_length = true;
  TailAsymptotics tail;
  std::vector<std::string> warnings;
};

CurveReport simulate(const PinchSchedule& sched, const CurveConfig& cfg = {}, const SpeedLaw& law = default_speed_law());

// Distance from the collar end to the delta-thin part; d(0) when there is none.
double thick_boundary_distance(const CollarParams& c, double delta);

}  // namespace pinchlab
