#pragma once

// Rotationally invariant symmetric 2-tensors on the collar cylinder and the
// L^2(g) splitting of a metric variation into Re(c dw^2) plus a Lie part
// L_X g with X = x(s) d/ds.  w = s + i theta.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pinchlab/collar.hpp"

namespace pinchlab {

struct TensorComponents {
  double ss = 0.0;
  double st = 0.0;
  double tt = 0.0;
};

// Component functions of s, independent of any particular collar.
struct TensorFunctions {
  std::function<TensorComponents(double)> value;
  std::function<TensorComponents(double)> ds;
};

struct GridComponents {
  std::vector<double> ss, st, tt;
};

class SymTwoTensorField {
 public:
  static SymTwoTensorField closed_form(const CollarParams& c, TensorFunctions f);
  // Samples at the nodes of `grid`; off-grid values and s-derivatives come
  // from the Chebyshev interpolant.
  static SymTwoTensorField sampled(std::shared_ptr<const CollarGrid> grid, std::vector<double> ss,
                                   std::vector<double> st, std::vector<double> tt);

  const CollarParams& collar() const noexcept { return collar_; }
  bool is_sampled() const noexcept { return static_cast<bool>(grid_); }
  const std::shared_ptr<const CollarGrid>& grid() const noexcept { return grid_; }

  TensorComponents value(double s) const;
  TensorComponents ds(double s) const;
  GridComponents on_grid(const CollarGrid& g) const;
  GridComponents ds_on_grid(const CollarGrid& g) const;

  SymTwoTensorField operator+(const SymTwoTensorField& o) const;
  SymTwoTensorField operator-(const SymTwoTensorField& o) const;
  SymTwoTensorField scaled(double a) const;

 private:
  SymTwoTensorField(const CollarParams& c) : collar_(c) {}
  bool same_grid(const SymTwoTensorField& o) const;
  SymTwoTensorField combine(const SymTwoTensorField& o, double a, double b) const;

  CollarParams collar_;
  TensorFunctions fn_;
  std::shared_ptr<const CollarGrid> grid_;
  GridComponents samples_;
  GridComponents coeffs_;   // Chebyshev coefficients of the samples
  GridComponents dcoeffs_;  // d/dx of the above
};

struct QuadDiffCoeff {
  std::complex<double> c;
};

struct RadialField {
  std::shared_ptr<const CollarGrid> grid;
  std::vector<double> x;
  static RadialField from_function(std::shared_ptr<const CollarGrid> grid, const std::function<double(double)>& f);
};

struct DecompositionResult {
  QuadDiffCoeff c;
  RadialField x;
  double residual = 0.0;           // L^2(g) norm of k - Re(c dw^2) - L_X g
  double relative_residual = 0.0;  // residual / ||k||
  double imag_part = 0.0;          // L^2 projection of k_st onto Re(i dw^2)
  double x_odd_defect = 0.0;       // max |x(s) + x(-s)|
};

std::shared_ptr<const CollarGrid> make_grid(const CollarParams& c, std::size_t n);

SymTwoTensorField metric_tensor(const CollarParams& c);
// d/dl of rho^2 (ds^2 + dtheta^2) at fixed (s, theta).
SymTwoTensorField dl_variation(const CollarParams& c);
SymTwoTensorField re_quad_diff(const CollarParams& c, QuadDiffCoeff q);
SymTwoTensorField lie_derivative(const CollarParams& c, const RadialField& x);

// div_g h as a 1-form (s and theta components) at the grid nodes.
struct Divergence {
  std::vector<double> s, theta;
};
Divergence divergence(const SymTwoTensorField& h, const CollarGrid& g);

double l2_inner(const SymTwoTensorField& h, const SymTwoTensorField& k, const CollarGrid& g);
double l2_norm(const SymTwoTensorField& h, const CollarGrid& g);

// Throws UnsupportedInput when k has a nonzero s-theta component.
DecompositionResult horizontal_project(const CollarParams& c, const SymTwoTensorField& k, std::size_t grid_size = 512);

double pointwise_norm(const CollarParams& c, const SymTwoTensorField& h, double s);
// |h|_g + |nabla h|_g for k = 1; throws UnsupportedInput for k >= 2.
double ck_seminorm(const CollarParams& c, const SymTwoTensorField& h, double s, int k);

// ||Re(q dw^2)||_{L^2(C, g)} in closed form.
double wp_speed(const CollarParams& c, QuadDiffCoeff q);
// Same quantity by Chebyshev quadrature of |Re(q dw^2)|_g^2 on an n-node grid.
double wp_speed_quadrature(const CollarParams& c, QuadDiffCoeff q, std::size_t n);

// (1/4) of the loop integral of k(sigma', sigma') along the central geodesic.
double first_variation_inj(const CollarParams& c, const SymTwoTensorField& k);

// |Re(dw^2)|_g(0) / wp_speed(l, 1), and the same times inj(0)^{1/2}.
double center_norm_over_speed(const CollarParams& c);
double yaba_ratio(const CollarParams& c);

struct TensorEvolutionReport {
  int k = 0;
  std::size_t pairs = 0;
  double C_emp = 0.0;          // on the supplied time grid
  double C_emp_refined = 0.0;  // on the grid with every step halved
  double relative_change = 0.0;
  bool finite = true;
  bool stable = true;  // relative change <= 5%
  bool passed() const noexcept { return finite && stable; }
};

// Smallest C with |Omega|_{C^k(g(t1))} <= |Omega|_{C^k(g(t2))} exp(C |int |d_t g|_{C^k(g(t))} dt|)
// at the collar centre over all sampled pairs, for the family g(t) = collar(ell(t)).
TensorEvolutionReport tensor_evolution_check(std::span<const double> times, const std::function<double(double)>& ell,
                                             const std::function<double(double)>& dell, const TensorFunctions& omega,
                                             int k);

}  // namespace pinchlab
