#include "pinchlab/chebyshev.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pinchlab {
namespace {

struct DctPlans {
  fftw_plan forward = nullptr;  // REDFT10: values -> 2 sum x_j cos(pi k (j+1/2)/N)
  fftw_plan inverse = nullptr;  // REDFT01: X_0 + 2 sum_k X_k cos(pi k (j+1/2)/N)
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
const DctPlans& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, DctPlans> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> a(n), b(n);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  DctPlans p;
  p.forward = fftw_plan_r2r_1d(len, a.data(), b.data(), FFTW_REDFT10, flags);
  p.inverse = fftw_plan_r2r_1d(len, a.data(), b.data(), FFTW_REDFT01, flags);
  if (!p.forward || !p.inverse) throw std::runtime_error("FFTW planning failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace

ChebyshevBasis::ChebyshevBasis(std::size_t n) : n_(n), nodes_(n), gaps_(n) {
  if (n < 2) throw std::invalid_argument("Chebyshev basis needs at least 2 nodes");
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    nodes_[j] = std::cos(theta);
    const double folded = std::min(theta, std::numbers::pi - theta);
    const double h = std::sin(0.5 * folded);
    gaps_[j] = 2.0 * h * h;
  }
  // 0 is a node for odd N; force it exact.
  if (n % 2 == 1) {
    nodes_[n / 2] = 0.0;
    gaps_[n / 2] = 1.0;
  }
}

std::vector<double> ChebyshevBasis::coefficients(std::span<const double> values) const {
  if (values.size() != n_) throw std::invalid_argument("coefficients: size mismatch");
  std::vector<double> out(n_);
  fftw_execute_r2r(plans_for(n_).forward, const_cast<double*>(values.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
  out[0] *= 0.5;
  return out;
}

std::vector<double> ChebyshevBasis::values(std::span<const double> coeffs) const {
  if (coeffs.size() != n_) throw std::invalid_argument("values: size mismatch");
  std::vector<double> in(coeffs.begin(), coeffs.end());
  for (std::size_t k = 1; k < n_; ++k) in[k] *= 0.5;
  std::vector<double> out(n_);
  fftw_execute_r2r(plans_for(n_).inverse, in.data(), out.data());
  return out;
}

std::vector<double> ChebyshevBasis::derivative(std::span<const double> a) {
  const std::size_t n = a.size();
  std::vector<double> b(n, 0.0);
  if (n < 2) return b;
  // b_{k-1} = b_{k+1} + 2 k a_k, then halve b_0.
  for (std::size_t k = n - 1; k >= 1; --k) {
    const double next = (k + 1 < n) ? b[k + 1] : 0.0;
    b[k - 1] = next + 2.0 * static_cast<double>(k) * a[k];
  }
  b[0] *= 0.5;
  return b;
}

std::vector<double> ChebyshevBasis::antiderivative(std::span<const double> a) {
  const std::size_t n = a.size();
  std::vector<double> c(n, 0.0);
  auto at = [&](std::size_t k) { return k < n ? a[k] : 0.0; };
  if (n > 1) c[1] = at(0) - 0.5 * at(2);
  for (std::size_t k = 2; k < n; ++k) {
    c[k] = (at(k - 1) - at(k + 1)) / (2.0 * static_cast<double>(k));
  }
  // T_k(0) = cos(k pi / 2).
  double at_zero = 0.0;
  for (std::size_t k = 2; k < n; k += 2) at_zero += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * c[k];
  c[0] = -at_zero;
  return c;
}

double ChebyshevBasis::integral(std::span<const double> a) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); k += 2) {
    const double kk = static_cast<double>(k);
    sum += a[k] * 2.0 / (1.0 - kk * kk);
  }
  return sum;
}

double ChebyshevBasis::evaluate(std::span<const double> a, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) {
    const double b0 = 2.0 * x * b1 - b2 + a[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + (a.empty() ? 0.0 : a[0]);
}

}  // namespace pinchlab
