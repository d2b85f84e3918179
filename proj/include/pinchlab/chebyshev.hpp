#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pinchlab {

// Chebyshev first-kind (Gauss) nodes x_j = cos(pi (j + 1/2) / N) on [-1, 1],
// in the natural DCT order (x decreasing).  Series are stored as plain
// coefficients f = sum_k a_k T_k, a_0 not halved.
class ChebyshevBasis {
 public:
  explicit ChebyshevBasis(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double node(std::size_t j) const { return nodes_[j]; }
  // 1 - |x_j| without cancellation near the endpoints.
  double one_minus_abs_node(std::size_t j) const { return gaps_[j]; }
  std::span<const double> nodes() const noexcept { return nodes_; }

  std::vector<double> coefficients(std::span<const double> values) const;
  std::vector<double> values(std::span<const double> coeffs) const;

  static std::vector<double> derivative(std::span<const double> coeffs);
  // Antiderivative normalised to vanish at x = 0; same length as the input
  // (the dropped T_N term vanishes on the first-kind grid).
  static std::vector<double> antiderivative(std::span<const double> coeffs);
  static double integral(std::span<const double> coeffs);
  static double evaluate(std::span<const double> coeffs, double x);

 private:
  std::size_t n_;
  std::vector<double> nodes_;
  std::vector<double> gaps_;
};

}  // namespace pinchlab
