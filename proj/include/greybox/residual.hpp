#ifndef GREYBOX_RESIDUAL_HPP
#define GREYBOX_RESIDUAL_HPP

// Hammerstein residual model: odd Chebyshev features z_k = T_{2k+1}(u / alpha)
// driving the linear ODE
//   sum_{d=1}^m A_d r^{(d)} = sum_{d=1}^m sum_{k=1}^n B_{d,k} z_k^{(d)}
// from rest. Integrating once gives proper transfer functions with a shared
// denominator,
//   D(s) = sum_{d=1}^m A_d s^{d-1},   N_k(s) = sum_{d=1}^m B_{d,k} s^{d-1},
//   r = sum_k N_k(s) / D(s) z_k.
// Fitted models pin A_1 = D(0) = 1, which removes the overall scale of (A, B).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <ceres/ceres.h>
#include <Eigen/Dense>

#include "greybox/chebyshev.hpp"
#include "greybox/error.hpp"
#include "greybox/excitation.hpp"
#include "greybox/lti.hpp"
#include "greybox/signal.hpp"

namespace greybox {

struct ResidualParams {
  double alpha = 1.0;
  int m = 5;
  int n = 6;
  std::vector<double> a;  // A_1..A_m, A_1 = 1 for fitted models
  Eigen::MatrixXd b;      // m x n, b(d - 1, k - 1) = B_{d,k}

  // Ascending coefficients of D(s), degree m - 1.
  const std::vector<double>& denominator() const { return a; }

  void validate() const {
    if (!(alpha > 0.0)) throw ParameterError("residual: alpha must be positive");
    if (m < 1 || n < 1) throw ParameterError("residual: m and n must be at least one");
    if (a.size() != static_cast<std::size_t>(m) || b.rows() != m || b.cols() != n) {
      throw ParameterError("residual: coefficient dimensions do not match (m, n)");
    }
    if (a.back() == 0.0) throw ParameterError("residual: leading denominator coefficient A_m is zero");
    if (!lti::is_hurwitz(denominator())) throw ParameterError("residual: denominator D(s) is not Hurwitz");
    if (!b.allFinite()) throw ParameterError("residual: numerator coefficients are not finite");
  }

  // The zero model: B = 0 with D(s) = (1 + s / omega_c)^{m-1}.
  static ResidualParams zero(double alpha, int m, int n, double omega_c);
};

// Maps m unconstrained reals onto every degree-m Hurwitz polynomial with D(0) = 1,
// as a product of floor(m/2) factors 1 + e^{p} s + e^{q} s^2 and, for odd m,
// one factor 1 + e^{p} s.
class HurwitzParameterization {
 public:
  explicit HurwitzParameterization(int m) : m_(m) {
    if (m < 0) throw ArgumentError("hurwitz parameterization: negative degree");
  }

  int size() const { return m_; }

  // Ascending coefficients 1, c_1, ..., c_m.
  std::vector<double> coefficients(const Eigen::VectorXd& eta) const {
    const auto factors = build_factors(eta);
    std::vector<double> poly{1.0};
    for (const auto& f : factors) poly = lti::poly_multiply(poly, f);
    return poly;
  }

  // J(i, j) = d c_{i+1} / d eta_j
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& eta) const {
    const auto factors = build_factors(eta);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m_, m_);
    for (int j = 0; j < m_; ++j) {
      const std::size_t owner = static_cast<std::size_t>(j / 2);
      const std::size_t power = static_cast<std::size_t>(j % 2) + 1;
      std::vector<double> poly{1.0};
      for (std::size_t f = 0; f < factors.size(); ++f) {
        if (f == owner) {
          std::vector<double> d(factors[f].size(), 0.0);
          d[power] = factors[f][power];
          poly = lti::poly_multiply(poly, d);
        } else {
          poly = lti::poly_multiply(poly, factors[f]);
        }
      }
      for (int i = 0; i < m_; ++i) jac(i, j) = poly[static_cast<std::size_t>(i) + 1];
    }
    return jac;
  }

  // eta giving D(s) = (1 + s / omega_c)^m.
  Eigen::VectorXd repeated_root(double omega_c) const {
    Eigen::VectorXd eta(m_);
    for (int j = 0; j + 1 < m_; j += 2) {
      eta(j) = std::log(2.0 / omega_c);
      eta(j + 1) = std::log(1.0 / (omega_c * omega_c));
    }
    if (m_ % 2 == 1) eta(m_ - 1) = std::log(1.0 / omega_c);
    return eta;
  }

  // eta giving distinct real roots omega_c * ratio^{i - (m - 1)/2}, i = 0..m-1,
  // consecutive roots paired into the quadratic factors. Identical factors are
  // a symmetric point that gradient descent never leaves, so optimizers
  // should start here rather than at repeated_root.
  Eigen::VectorXd spread_roots(double omega_c, double ratio) const {
    if (!(omega_c > 0.0) || !(ratio >= 1.0)) throw ArgumentError("hurwitz parameterization: invalid root spread");
    std::vector<double> roots(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) roots[static_cast<std::size_t>(i)] = omega_c * std::pow(ratio, i - 0.5 * (m_ - 1));
    Eigen::VectorXd eta(m_);
    for (int j = 0; j + 1 < m_; j += 2) {
      const double r1 = roots[static_cast<std::size_t>(j)];
      const double r2 = roots[static_cast<std::size_t>(j) + 1];
      eta(j) = std::log(1.0 / r1 + 1.0 / r2);
      eta(j + 1) = std::log(1.0 / (r1 * r2));
    }
    if (m_ % 2 == 1) eta(m_ - 1) = std::log(1.0 / roots.back());
    return eta;
  }

 private:
  std::vector<std::vector<double>> build_factors(const Eigen::VectorXd& eta) const {
    if (eta.size() != m_) throw ArgumentError("hurwitz parameterization: wrong parameter count");
    std::vector<std::vector<double>> factors;
    for (int j = 0; j + 1 < m_; j += 2) factors.push_back({1.0, std::exp(eta(j)), std::exp(eta(j + 1))});
    if (m_ % 2 == 1) factors.push_back({1.0, std::exp(eta(m_ - 1))});
    return factors;
  }

  int m_;
};

inline ResidualParams ResidualParams::zero(double alpha, int m, int n, double omega_c) {
  ResidualParams p;
  p.alpha = alpha;
  p.m = m;
  p.n = n;
  const HurwitzParameterization hp(m - 1);
  p.a = hp.coefficients(hp.repeated_root(omega_c));
  p.b = Eigen::MatrixXd::Zero(m, n);
  p.validate();
  return p;
}

// Random stable residual: eta ~ Uniform(-log_spread, log_spread) + eta(omega_c = 1),
// B ~ Uniform(-1, 1).
inline ResidualParams sample_residual(double alpha, int m, int n, UniformStream& stream, double log_spread = 0.5) {
  const HurwitzParameterization hp(m - 1);
  Eigen::VectorXd eta = hp.repeated_root(1.0);
  for (int j = 0; j < m - 1; ++j) eta(j) += stream.between(-log_spread, log_spread);
  ResidualParams p;
  p.alpha = alpha;
  p.m = m;
  p.n = n;
  p.a = hp.coefficients(eta);
  p.b.resize(m, n);
  for (int k = 0; k < n; ++k) {
    for (int d = 0; d < m; ++d) p.b(d, k) = stream.symmetric();
  }
  p.validate();
  return p;
}

namespace detail {

// Trapezoid weights of inner_product over [t0 + burn_in, end].
inline Eigen::VectorXd window_weights(const Signal& like, double burn_in) {
  const std::size_t start = window_start(like, burn_in);
  const std::size_t last = like.size() - 1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(like.size()));
  const double inv = 1.0 / static_cast<double>(last - start);
  for (std::size_t i = start; i <= last; ++i) w(static_cast<Eigen::Index>(i)) = inv;
  w(static_cast<Eigen::Index>(start)) *= 0.5;
  w(static_cast<Eigen::Index>(last)) *= 0.5;
  return w;
}

inline Eigen::VectorXd as_vector(const Signal& s) {
  const auto v = s.samples();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Signal as_signal(const Signal& like, const Eigen::VectorXd& v) {
  return Signal(like.t0(), like.dt(), std::vector<double>(v.data(), v.data() + v.size()));
}

// Column (d - 1) * n + (k - 1) is the response of s^{d-1} / D(s) to feature k.
inline Eigen::MatrixXd hammerstein_basis(const std::vector<double>& denominator, const Eigen::MatrixXd& features,
                                         double dt) {
  const int m = static_cast<int>(denominator.size());
  const auto n = features.cols();
  const auto derivs = lti::PolynomialFilter(denominator, dt).derivatives(features);
  Eigen::MatrixXd basis(features.rows(), m * n);
  for (int d = 1; d <= m; ++d) basis.middleCols((d - 1) * n, n) = derivs[static_cast<std::size_t>(d - 1)];
  return basis;
}

inline Eigen::VectorXd flatten_b(const Eigen::MatrixXd& b) {
  Eigen::VectorXd out(b.size());
  for (Eigen::Index d = 0; d < b.rows(); ++d) {
    for (Eigen::Index k = 0; k < b.cols(); ++k) out(d * b.cols() + k) = b(d, k);
  }
  return out;
}

inline Eigen::MatrixXd unflatten_b(const Eigen::VectorXd& v, int m, int n) {
  Eigen::MatrixXd b(m, n);
  for (int d = 0; d < m; ++d) {
    for (int k = 0; k < n; ++k) b(d, k) = v(d * n + k);
  }
  return b;
}

// d r / d A_j = -sum_{d,k} B_{d,k} s^{d+j-2} / D(s)^2 z_k, j = 1..m.
inline Eigen::MatrixXd denominator_sensitivities(const ResidualParams& p, const Eigen::MatrixXd& features, double dt) {
  const auto den = p.denominator();
  const auto squared = lti::poly_multiply(den, den);
  const auto w = lti::PolynomialFilter(squared, dt).derivatives(features);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(features.rows(), p.m);
  for (int j = 1; j <= p.m; ++j) {
    for (int d = 1; d <= p.m; ++d) {
      out.col(j - 1) -= w[static_cast<std::size_t>(d + j - 2)] * p.b.row(d - 1).transpose();
    }
  }
  return out;
}

}  // namespace detail

// Response of the residual's LTI part to an arbitrary feature matrix (count x n).
inline Signal simulate_hammerstein(const ResidualParams& params, const Eigen::MatrixXd& features, const Signal& like) {
  params.validate();
  if (features.cols() != params.n || features.rows() != static_cast<Eigen::Index>(like.size())) {
    throw GridMismatchError("residual: feature matrix does not match (grid, n)");
  }
  const Eigen::MatrixXd basis = detail::hammerstein_basis(params.denominator(), features, like.dt());
  return detail::as_signal(like, basis * detail::flatten_b(params.b));
}

inline Signal simulate_residual(const ResidualParams& params, const Signal& u) {
  params.validate();
  return simulate_hammerstein(params, feature_matrix(u, params.alpha, odd_feature_degrees(params.n)), u);
}

struct ResidualLossGradient {
  double loss = 0.0;         // <target - r, target - r> on the window
  std::vector<double> grad_a;  // d loss / d A_d
  Eigen::MatrixXd grad_b;      // d loss / d B_{d,k}
};

// Loss and its exact gradient with respect to every A_d and B_{d,k}.
inline ResidualLossGradient residual_loss_gradient(const ResidualParams& params, const Signal& u, const Signal& target,
                                                   double burn_in = 0.0) {
  params.validate();
  Signal::require_same_grid(u, target);
  const Eigen::MatrixXd z = feature_matrix(u, params.alpha, odd_feature_degrees(params.n));
  const Eigen::MatrixXd basis = detail::hammerstein_basis(params.denominator(), z, u.dt());
  const Eigen::VectorXd w = detail::window_weights(u, burn_in);
  const Eigen::VectorXd e = detail::as_vector(target) - basis * detail::flatten_b(params.b);
  const Eigen::VectorXd we = w.cwiseProduct(e);

  ResidualLossGradient out;
  out.loss = e.dot(we);
  out.grad_b = detail::unflatten_b(-2.0 * basis.transpose() * we, params.m, params.n);
  const Eigen::VectorXd ga = -2.0 * detail::denominator_sensitivities(params, z, u.dt()).transpose() * we;
  out.grad_a.assign(ga.data(), ga.data() + ga.size());
  return out;
}

struct ResidualFitOptions {
  double omega_c = 4.0;  // initial roots of D(s) spread geometrically around omega_c
  double root_ratio = 1.5;
  double burn_in = 0.0;
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
};

struct ResidualFit {
  ResidualParams params;
  std::vector<double> loss_trace;
  double initial_loss = 0.0;  // zero-residual loss <target, target>
  double loss = 0.0;
  double gradient_norm = 0.0;  // infinity norm w.r.t. the stable parameterization
  int iterations = 0;
  std::string termination;
  double relative_error = 0.0;  // ||target - r|| / ||target||, 0 for a zero target
  Eigen::VectorXd eta;
};

namespace detail {

// Variable projection: for fixed denominator, the loss is quadratic in B and
// B is eliminated by weighted least squares. The reduced gradient equals the
// partial gradient in A at the optimal B.
class ProjectedResidualLoss final : public ceres::FirstOrderFunction {
 public:
  ProjectedResidualLoss(const Signal& u, const Signal& target, double alpha, int m, int n, double burn_in)
      : like_(u),
        alpha_(alpha),
        m_(m),
        n_(n),
        param_(m - 1),
        features_(feature_matrix(u, alpha, odd_feature_degrees(n))),
        target_(as_vector(target)),
        weights_(window_weights(u, burn_in)),
        sqrt_weights_(weights_.cwiseSqrt()) {}

  int NumParameters() const override { return m_ - 1; }

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::VectorXd eta = Eigen::Map<const Eigen::VectorXd>(parameters, m_ - 1);
    ResidualParams p = solve(eta);
    if (!p.b.allFinite()) return false;
    const Eigen::VectorXd e = target_ - basis_ * flatten_b(p.b);
    const Eigen::VectorXd we = weights_.cwiseProduct(e);
    *cost = e.dot(we);
    if (!std::isfinite(*cost)) return false;
    if (gradient != nullptr) {
      const Eigen::VectorXd ga = -2.0 * denominator_sensitivities(p, features_, like_.dt()).transpose() * we;
      // A_1 is pinned; eta drives A_2..A_m.
      const Eigen::VectorXd g = param_.jacobian(eta).transpose() * ga.tail(m_ - 1);
      if (!g.allFinite()) return false;
      Eigen::Map<Eigen::VectorXd>(gradient, m_ - 1) = g;
    }
    return true;
  }

  // Optimal B for the denominator given by eta; leaves the basis in basis_.
  ResidualParams solve(const Eigen::VectorXd& eta) const {
    ResidualParams p;
    p.alpha = alpha_;
    p.m = m_;
    p.n = n_;
    p.a = param_.coefficients(eta);
    basis_ = hammerstein_basis(p.denominator(), features_, like_.dt());
    Eigen::MatrixXd scaled = sqrt_weights_.asDiagonal() * basis_;
    Eigen::VectorXd norms = scaled.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < norms.size(); ++c) {
      if (!(norms(c) > 0.0)) norms(c) = 1.0;
    }
    scaled = scaled * norms.cwiseInverse().asDiagonal();
    const Eigen::VectorXd rhs = sqrt_weights_.cwiseProduct(target_);
    const Eigen::VectorXd coeffs = scaled.completeOrthogonalDecomposition().solve(rhs).cwiseQuotient(norms);
    p.b = unflatten_b(coeffs, m_, n_);
    return p;
  }

  double zero_loss() const { return target_.dot(weights_.cwiseProduct(target_)); }

 private:
  Signal like_;
  double alpha_;
  int m_;
  int n_;
  HurwitzParameterization param_;
  Eigen::MatrixXd features_;
  Eigen::VectorXd target_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
  mutable Eigen::MatrixXd basis_;
};

class LossTrace final : public ceres::IterationCallback {
 public:
  explicit LossTrace(std::vector<double>& trace) : trace_(trace) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
    trace_.push_back(summary.cost);
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<double>& trace_;
};

}  // namespace detail

// Prediction-error fit of the residual to target = y - y_hat.
// Separable least squares: B by weighted linear least squares, the stable
// denominator parameters by BFGS.
inline ResidualFit fit_residual(const Signal& u, const Signal& target, double alpha, int m, int n,
                                ResidualFitOptions options = {}) {
  Signal::require_same_grid(u, target);
  if (!(alpha > 0.0) || m < 1 || n < 1) throw ArgumentError("fit_residual: invalid (alpha, m, n)");

  auto* loss = new detail::ProjectedResidualLoss(u, target, alpha, m, n, options.burn_in);
  const ceres::GradientProblem problem(loss);  // takes ownership

  ResidualFit fit;
  fit.initial_loss = loss->zero_loss();
  fit.eta = HurwitzParameterization(m - 1).spread_roots(options.omega_c, options.root_ratio);

  ceres::GradientProblemSolver::Options solver_options;
  solver_options.line_search_direction_type = ceres::BFGS;
  solver_options.max_num_iterations = options.max_iterations;
  solver_options.gradient_tolerance = options.gradient_tolerance;
  solver_options.function_tolerance = 0.0;
  solver_options.parameter_tolerance = 0.0;
  solver_options.logging_type = ceres::SILENT;
  detail::LossTrace trace(fit.loss_trace);
  solver_options.callbacks.push_back(&trace);

  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(solver_options, problem, fit.eta.data(), &summary);
  if (summary.termination_type == ceres::FAILURE && fit.loss_trace.empty()) {
    throw FitError("fit_residual: optimizer failed before the first iterate: " + summary.message);
  }

  fit.params = loss->solve(fit.eta);
  fit.params.validate();
  double cost = 0.0;
  Eigen::VectorXd grad(m - 1);
  if (!loss->Evaluate(fit.eta.data(), &cost, grad.data()) || !std::isfinite(cost)) {
    throw FitError("fit_residual: final iterate is not finite");
  }
  fit.loss = cost;
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  fit.iterations = static_cast<int>(summary.iterations.size()) - 1;
  if (fit.gradient_norm < options.gradient_tolerance) {
    fit.termination = "gradient";
  } else if (summary.termination_type == ceres::NO_CONVERGENCE) {
    fit.termination = "iterations";
  } else {
    fit.termination = "stalled: " + summary.message;
  }
  fit.relative_error = fit.initial_loss > 0.0 ? std::sqrt(cost / fit.initial_loss) : 0.0;
  return fit;
}

}  // namespace greybox

#endif  // GREYBOX_RESIDUAL_HPP
