#ifndef GREYBOX_CHEBYSHEV_HPP
#define GREYBOX_CHEBYSHEV_HPP

#include <vector>

#include <Eigen/Dense>

#include "greybox/error.hpp"
#include "greybox/signal.hpp"

namespace greybox {

// T_j(x) by the three-term recurrence T_{j+1} = 2x T_j - T_{j-1}.
inline double chebyshev_t(int degree, double x) {
  if (degree < 0) throw ArgumentError("chebyshev: negative degree");
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int j = 1; j < degree; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// T_degree(u(t) / alpha). Values with |u| > alpha are still evaluated by the polynomial.
inline Signal chebyshev_signal(const Signal& u, double alpha, int degree) {
  if (!(alpha > 0.0)) throw ArgumentError("chebyshev: alpha must be positive");
  std::vector<double> out(u.size());
  const auto s = u.samples();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = chebyshev_t(degree, s[i] / alpha);
  return Signal(u.t0(), u.dt(), std::move(out));
}

// z_k = T_{2k+1}(u / alpha), k >= 1.
inline Signal chebyshev_feature(const Signal& u, double alpha, int k) {
  if (k < 1) throw ArgumentError("chebyshev feature: index must be >= 1");
  return chebyshev_signal(u, alpha, 2 * k + 1);
}

// Odd degrees 3, 5, ..., 2n+1.
inline std::vector<int> odd_feature_degrees(int n) {
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) d[static_cast<std::size_t>(k - 1)] = 2 * k + 1;
  return d;
}

// count x degrees.size() matrix whose column j is T_{degrees[j]}(u / alpha).
inline Eigen::MatrixXd feature_matrix(const Signal& u, double alpha, const std::vector<int>& degrees) {
  if (!(alpha > 0.0)) throw ArgumentError("chebyshev: alpha must be positive");
  Eigen::MatrixXd z(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(degrees.size()));
  const auto s = u.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < degrees.size(); ++j) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = chebyshev_t(degrees[j], s[i] / alpha);
    }
  }
  return z;
}

}  // namespace greybox

#endif  // GREYBOX_CHEBYSHEV_HPP
