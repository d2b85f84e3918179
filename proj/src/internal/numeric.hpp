#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pinchlab::detail {

inline constexpr double kQuadTolerance = 1e-10;

// Adaptive Gauss-Kronrod over [a, b], run on the unit interval: Boost 1.74
// compares an unscaled error estimate against a scaled tolerance, which
// stalls the recursion on short intervals.
template <class F>
double integrate(F&& f, double a, double b, double tol = kQuadTolerance) {
  using GK61 = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double h = b - a;
  auto unit = [&](double w) { return f(a + h * w); };
  double err = 0.0;
  return h * GK61::integrate(unit, 0.0, 1.0, 10, tol, &err);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline double relative_change(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) / scale;
}

// n >= 2 points, endpoints exact.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  x.front() = lo;
  x.back() = hi;
  return x;
}

}  // namespace pinchlab::detail
