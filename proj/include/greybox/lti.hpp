#ifndef GREYBOX_LTI_HPP
#define GREYBOX_LTI_HPP

// Exact sampling of continuous-time LTI systems driven by inputs that are
// linear between grid samples (first-order hold).

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "greybox/error.hpp"

namespace greybox::lti {

// x' = a x + b u, single scalar input channel.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

// x_{i+1} = phi x_i + gamma0 u_i + gamma1 u_{i+1}, exact when u is linear on [t_i, t_{i+1}].
struct FohStep {
  Eigen::MatrixXd phi;
  Eigen::VectorXd gamma0;
  Eigen::VectorXd gamma1;
};

inline FohStep discretize_foh(const StateSpace& sys, double dt) {
  const Eigen::Index n = sys.a.rows();
  if (sys.a.cols() != n || sys.b.size() != n) throw ArgumentError("discretize_foh: inconsistent dimensions");
  if (!(dt > 0.0)) throw ArgumentError("discretize_foh: dt must be positive");

  // exp([[A, b, 0], [0, 0, 1], [0, 0, 0]] dt) holds  int e^{A(h-s)} b ds  and  int e^{A(h-s)} b s ds.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 2, n + 2);
  aug.topLeftCorner(n, n) = sys.a;
  aug.block(0, n, n, 1) = sys.b;
  aug(n, n + 1) = 1.0;
  const Eigen::MatrixXd e = (aug * dt).exp();

  FohStep step;
  step.phi = e.topLeftCorner(n, n);
  const Eigen::VectorXd e12 = e.block(0, n, n, 1);
  const Eigen::VectorXd e13 = e.block(0, n + 1, n, 1) / dt;
  step.gamma0 = e12 - e13;
  step.gamma1 = e13;
  return step;
}

// Propagates independent input columns through the same system from zero state.
// inputs: count x cols. Returns one count x cols matrix per state component.
inline std::vector<Eigen::MatrixXd> propagate(const FohStep& step, const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = step.phi.rows();
  const Eigen::Index count = inputs.rows();
  const Eigen::Index cols = inputs.cols();
  std::vector<Eigen::MatrixXd> states(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(count, cols));
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, cols);
  Eigen::MatrixXd next(n, cols);
  for (Eigen::Index i = 0; i + 1 < count; ++i) {
    next.noalias() = step.phi * x;
    next.noalias() += step.gamma0 * inputs.row(i);
    next.noalias() += step.gamma1 * inputs.row(i + 1);
    x.swap(next);
    for (Eigen::Index s = 0; s < n; ++s) states[static_cast<std::size_t>(s)].row(i + 1) = x.row(s);
  }
  return states;
}

// Solves P(d/dt) y = z, P(s) = sum_e p_e s^e, from rest, returning y and its
// derivatives up to order deg P at every grid sample. The top derivative is
// recovered algebraically from the ODE, so no numerical differentiation occurs.
class PolynomialFilter {
 public:
  PolynomialFilter(std::vector<double> ascending, double dt) : coeffs_(std::move(ascending)) {
    if (coeffs_.empty()) throw ArgumentError("polynomial filter: empty polynomial");
    if (coeffs_.back() == 0.0) throw ArgumentError("polynomial filter: leading coefficient is zero");
    if (coeffs_.size() == 1) return;  // static gain
    const auto deg = static_cast<Eigen::Index>(coeffs_.size() - 1);
    StateSpace companion{Eigen::MatrixXd::Zero(deg, deg), Eigen::VectorXd::Zero(deg)};
    for (Eigen::Index e = 0; e + 1 < deg; ++e) companion.a(e, e + 1) = 1.0;
    for (Eigen::Index e = 0; e < deg; ++e) {
      companion.a(deg - 1, e) = -coeffs_[static_cast<std::size_t>(e)] / coeffs_.back();
    }
    companion.b(deg - 1) = 1.0 / coeffs_.back();
    step_ = discretize_foh(companion, dt);
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  // z: count x cols. Element e of the result holds y^{(e)} for e = 0..degree().
  std::vector<Eigen::MatrixXd> derivatives(const Eigen::MatrixXd& z) const {
    std::vector<Eigen::MatrixXd> out;
    if (coeffs_.size() > 1) out = propagate(step_, z);
    Eigen::MatrixXd top = z;
    for (std::size_t e = 0; e + 1 < coeffs_.size(); ++e) top -= coeffs_[e] * out[e];
    top /= coeffs_.back();
    out.push_back(std::move(top));
    return out;
  }

 private:
  std::vector<double> coeffs_;
  FohStep step_;
};

// Ascending-coefficient polynomial product.
inline std::vector<double> poly_multiply(std::span<const double> p, std::span<const double> q) {
  std::vector<double> out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  }
  return out;
}

// True when every root of the ascending-coefficient polynomial has negative real part.
inline bool is_hurwitz(std::span<const double> ascending) {
  std::size_t deg = ascending.size();
  while (deg > 0 && ascending[deg - 1] == 0.0) --deg;
  if (deg == 0) return false;
  deg -= 1;
  for (std::size_t i = 0; i <= deg; ++i) {
    if (!std::isfinite(ascending[i])) return false;
  }
  if (deg == 0) return true;
  const auto n = static_cast<Eigen::Index>(deg);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index e = 0; e + 1 < n; ++e) companion(e, e + 1) = 1.0;
  for (Eigen::Index e = 0; e < n; ++e) companion(n - 1, e) = -ascending[static_cast<std::size_t>(e)] / ascending[deg];
  const Eigen::VectorXcd roots = companion.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (!(roots(i).real() < 0.0)) return false;
  }
  return true;
}

}  // namespace greybox::lti

#endif  // GREYBOX_LTI_HPP
