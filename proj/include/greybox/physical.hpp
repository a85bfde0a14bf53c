#ifndef GREYBOX_PHYSICAL_HPP
#define GREYBOX_PHYSICAL_HPP

// Linearized pendulum  x'' + 2 zeta w0 x' + w0^2 x = u,  y = x,
// its damping-ratio sensitivity, and prediction-error estimation of zeta.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "greybox/error.hpp"
#include "greybox/golden_section.hpp"
#include "greybox/lti.hpp"
#include "greybox/signal.hpp"

namespace greybox {

struct PhysicalParams {
  double zeta = 0.5;
  double omega0 = 2.0;  // known

  void validate() const {
    if (!(zeta > 0.0) || !(omega0 > 0.0)) throw ParameterError("physical model: zeta and omega0 must be positive");
  }
};

namespace detail {

inline Eigen::MatrixXd as_column(const Signal& u) {
  const auto s = u.samples();
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

inline Signal from_column(const Signal& like, const Eigen::MatrixXd& col) {
  return Signal(like.t0(), like.dt(), std::vector<double>(col.data(), col.data() + col.rows()));
}

}  // namespace detail

struct PhysicalResponse {
  Signal output;       // y_hat
  Signal sensitivity;  // d y_hat / d zeta
};

// Joint model/forward-sensitivity system, states (x, x', s, s'):
//   s'' + 2 zeta w0 s' + w0^2 s = -2 w0 x'
inline PhysicalResponse simulate_physical_with_sensitivity(const PhysicalParams& params, const Signal& u) {
  params.validate();
  const double w0 = params.omega0;
  const double damping = 2.0 * params.zeta * w0;
  lti::StateSpace sys{Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Zero(4)};
  sys.a(0, 1) = 1.0;
  sys.a(1, 0) = -w0 * w0;
  sys.a(1, 1) = -damping;
  sys.a(2, 3) = 1.0;
  sys.a(3, 1) = -2.0 * w0;
  sys.a(3, 2) = -w0 * w0;
  sys.a(3, 3) = -damping;
  sys.b(1) = 1.0;
  const auto states = lti::propagate(lti::discretize_foh(sys, u.dt()), detail::as_column(u));
  return {detail::from_column(u, states[0]), detail::from_column(u, states[2])};
}

inline Signal simulate_physical(const PhysicalParams& params, const Signal& u) {
  params.validate();
  const double w0 = params.omega0;
  lti::StateSpace sys{Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)};
  sys.a(0, 1) = 1.0;
  sys.a(1, 0) = -w0 * w0;
  sys.a(1, 1) = -2.0 * params.zeta * w0;
  sys.b(1) = 1.0;
  const auto states = lti::propagate(lti::discretize_foh(sys, u.dt()), detail::as_column(u));
  return detail::from_column(u, states[0]);
}

inline Signal sensitivity_zeta(const PhysicalParams& params, const Signal& u) {
  return simulate_physical_with_sensitivity(params, u).sensitivity;
}

// Steady-state gain and phase of 1 / (s^2 + 2 zeta w0 s + w0^2) at s = i w.
inline std::pair<double, double> physical_frequency_response(const PhysicalParams& p, double w) {
  const double re = p.omega0 * p.omega0 - w * w;
  const double im = 2.0 * p.zeta * p.omega0 * w;
  return {1.0 / std::hypot(re, im), -std::atan2(im, re)};
}

struct ZetaSearch {
  double lo = 0.05;
  double hi = 2.0;
  double grid_step = 0.05;
  double tolerance = 1e-7;
  double burn_in = 0.0;
};

struct ZetaIteration {
  double lo = 0.0;
  double hi = 0.0;
  double zeta = 0.0;
  double loss = 0.0;
};

struct ZetaFit {
  double zeta_hat = 0.0;
  double loss = 0.0;      // <y - y_hat, y - y_hat> on the fit window
  double mismatch = 0.0;  // ||y - y_hat|| / ||y|| on the fit window
  ZetaSearch search;
  std::vector<std::pair<double, double>> grid;  // (zeta, loss) of the initial scan
  std::vector<ZetaIteration> iterations;
};

inline double zeta_loss(const Signal& u, const Signal& y, double omega0, double zeta, double burn_in) {
  const Signal e = y - simulate_physical({zeta, omega0}, u);
  return inner_product(e, e, burn_in);
}

// d/dzeta <y - y_hat, y - y_hat> = -2 <y - y_hat, s>.
inline double zeta_loss_derivative(const Signal& u, const Signal& y, double omega0, double zeta, double burn_in) {
  const auto resp = simulate_physical_with_sensitivity({zeta, omega0}, u);
  return -2.0 * inner_product(y - resp.output, resp.sensitivity, burn_in);
}

// Coarse scan over the search interval, then golden-section refinement around the best node.
inline ZetaFit estimate_zeta(const Signal& u, const Signal& y, double omega0, ZetaSearch search = {}) {
  Signal::require_same_grid(u, y);
  if (!(search.lo > 0.0) || !(search.hi > search.lo)) throw ArgumentError("estimate_zeta: invalid search interval");
  if (!(search.grid_step > 0.0)) throw ArgumentError("estimate_zeta: grid step must be positive");

  ZetaFit fit;
  fit.search = search;
  const auto nodes = static_cast<std::size_t>(std::floor((search.hi - search.lo) / search.grid_step + 1e-9)) + 1;
  if (nodes < 3) throw ArgumentError("estimate_zeta: search interval holds fewer than three grid nodes");
  std::size_t best = 0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double z = search.lo + static_cast<double>(j) * search.grid_step;
    fit.grid.emplace_back(z, zeta_loss(u, y, omega0, z, search.burn_in));
    if (fit.grid[j].second < fit.grid[best].second) best = j;
  }
  if (best == 0 || best + 1 == nodes) {
    throw BracketingError("estimate_zeta: loss minimum lies on the boundary of [" + std::to_string(search.lo) + ", " +
                          std::to_string(search.hi) + "]; widen the search interval",
                          best != 0);
  }

  auto loss = [&](double z) { return zeta_loss(u, y, omega0, z, search.burn_in); };
  const auto gs = golden_section_minimize(loss, fit.grid[best - 1].first, fit.grid[best + 1].first, search.tolerance);
  for (const auto& s : gs.trace) fit.iterations.push_back({s.lo, s.hi, s.best_x, s.best_f});
  fit.zeta_hat = gs.x;
  fit.loss = gs.f;
  fit.mismatch = mismatch_norm(y, simulate_physical({gs.x, omega0}, u), search.burn_in);
  return fit;
}

}  // namespace greybox

#endif  // GREYBOX_PHYSICAL_HPP
