#pragma once

// Closed-form geometry of the standard hyperbolic collar
//
//   C(l) = (-X(l), X(l)) x S^1,   g = rho(s)^2 (ds^2 + dtheta^2),
//   rho(s) = l / (2 pi cos(l s / 2 pi)),
//   X(l)   = (2 pi / l) (pi/2 - arctan(sinh(l/2))).
//
// Three gauges appear throughout: the conformal coordinate s (primary), the
// angle u = l s / 2 pi, and the Fermi coordinate tau = asinh(tan u), the
// signed distance to the central geodesic.  The distance to the collar
// boundary is d = tau_max - |tau| with tau_max = asinh(1 / sinh(l/2)).

#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "pinchlab/chebyshev.hpp"

namespace pinchlab {

// 2 asinh(1): the largest core length for which the collar regime applies.
inline constexpr double kMaxCollarLength = 1.7627471740390860504652186499596;
inline constexpr double kAsinhOne = 0.88137358701954302523260932497979;

class CollarParams {
 public:
  // Throws DomainError unless 0 < ell <= 2 asinh(1).
  explicit CollarParams(double ell);

  double ell() const noexcept { return ell_; }
  double half_width() const noexcept { return half_width_; }
  // u* = l X / 2 pi and its complement pi/2 - u* = arctan(sinh(l/2)).
  double u_star() const noexcept { return u_star_; }
  double u_star_complement() const noexcept { return u_gap_; }
  // Distance from the central geodesic to either boundary circle.
  double tau_max() const noexcept { return tau_max_; }
  double sinh_half() const noexcept { return sinh_half_; }
  double cosh_half() const noexcept { return cosh_half_; }

 private:
  double ell_;
  double sinh_half_;
  double cosh_half_;
  double u_gap_;
  double u_star_;
  double half_width_;
  double tau_max_;
};

struct CollarPoint {
  double s = 0.0;
  double theta = 0.0;
};

// Validates |s| < X and wraps theta into [0, 2 pi).
CollarPoint make_collar_point(const CollarParams& c, double s, double theta);

// Accurate trigonometry of u = l s / 2 pi, valid up to the boundary.
struct AngleGauge {
  double u;
  double cos_u;
  double sin_u;
  double tan_u() const { return sin_u / cos_u; }
};
AngleGauge angle_gauge(const CollarParams& c, double s);

double half_width(double ell);
double conformal_factor(const CollarParams& c, double s);
double fermi_coordinate(const CollarParams& c, double s);
double dist_to_boundary(const CollarParams& c, double s);
double injectivity_radius(const CollarParams& c, double s);

// asinh(cosh(l/2) cosh d - sinh d), evaluated without cancellation at large d.
// Valid for 0 <= d <= 2 tau_max (the far half of the collar is the mirror image).
double injectivity_radius_from_distance(const CollarParams& c, double d);

struct InjBounds {
  double lo;
  double hi;
};
InjBounds inj_bounds(double d);

// 2 pi * integral of rho^2 over [s1, s2] x S^1.
double collar_area(const CollarParams& c, double s1, double s2);

struct InjProfile {
  std::vector<double> grid;
  std::vector<double> values;
};

// inj on the ascending s-grid; throws DomainError for points outside the collar.
InjProfile inj_profile(const CollarParams& c, std::span<const double> s_grid);

struct GeodesicLoop {
  CollarPoint base;
  double length;
};
GeodesicLoop shortest_loop(const CollarParams& c, const CollarPoint& base);

// Ascending s-values of the N first-kind Chebyshev nodes in u in (-u*, u*).
std::vector<double> chebyshev_s_grid(const CollarParams& c, std::size_t n);

// Spectral machinery on the collar: the Chebyshev basis mapped onto
// s in (-X, X), with the metric quantities cached at each node.
class CollarGrid {
 public:
  CollarGrid(const CollarParams& c, std::size_t n);

  const CollarParams& collar() const noexcept { return collar_; }
  const ChebyshevBasis& basis() const noexcept { return *basis_; }
  std::size_t size() const noexcept { return s_.size(); }

  std::span<const double> s() const noexcept { return s_; }
  std::span<const double> u() const noexcept { return u_; }
  std::span<const double> cos_u() const noexcept { return cos_u_; }
  std::span<const double> sin_u() const noexcept { return sin_u_; }
  std::span<const double> rho() const noexcept { return rho_; }
  std::span<const double> rho2() const noexcept { return rho2_; }
  // (rho^2)' and (log rho)' with respect to s.
  std::span<const double> drho2() const noexcept { return drho2_; }
  std::span<const double> dlog_rho() const noexcept { return dlog_rho_; }

  std::vector<double> d_ds(std::span<const double> f) const;
  // F(s) = integral_0^s f.
  std::vector<double> antiderivative(std::span<const double> f) const;
  // integral_{-X}^{X} f ds.
  double integrate(std::span<const double> f) const;
  double interpolate(std::span<const double> f, double s) const;

 private:
  CollarParams collar_;
  std::shared_ptr<const ChebyshevBasis> basis_;
  std::vector<double> s_, u_, cos_u_, sin_u_, rho_, rho2_, drho2_, dlog_rho_;
};

// Lemma-level bound sweep on the collar (distance ball of radius r).
struct BoundSlack {
  double worst_relative_slack;  // min over the sweep of (bound - value) / scale
  std::size_t checks = 0;
  std::size_t violations = 0;
};

struct BoundSweepReport {
  double ell;
  double radius;
  std::size_t grid_size;
  BoundSlack rho_ratio;       // rho(x) e^-r <= rho(y) <= rho(x) e^r
  BoundSlack inj_vs_rho;      // rho(y) <= inj(y) <= pi rho(y)
  BoundSlack inj_comparison;  // inj(x) / (pi e^r) <= inj(y) <= inj(x) pi e^r
  bool passed() const {
    return rho_ratio.violations == 0 && inj_vs_rho.violations == 0 &&
           inj_comparison.violations == 0;
  }
};

BoundSweepReport pointwise_bound_sweep(const CollarParams& c, double r, std::size_t grid_size);

}  // namespace pinchlab
