#ifndef GREYBOX_PLANT_HPP
#define GREYBOX_PLANT_HPP

// The nonlinear pendulum that generates the data:
//   x'' + 2 zeta w0 x' + w0^2 sin(x) = u(t),   y = sin(x).

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "greybox/error.hpp"
#include "greybox/radau.hpp"
#include "greybox/signal.hpp"

namespace greybox {

struct PlantState {
  double x = 0.0;  // angle from the lower equilibrium, not wrapped
  double v = 0.0;
};

struct PlantParams {
  double zeta = 0.5;
  double omega0 = 2.0;

  void validate() const {
    if (!(zeta > 0.0) || !(omega0 > 0.0)) throw ParameterError("plant: zeta and omega0 must be positive");
  }
};

inline double pendulum_energy(const PlantParams& p, const PlantState& s) {
  return 0.5 * s.v * s.v + p.omega0 * p.omega0 * (1.0 - std::cos(s.x));
}

// State trajectory on u's grid. The input is linear between samples.
inline std::vector<PlantState> simulate_true_states(const PlantParams& params, const Signal& u, PlantState x0 = {},
                                                    RadauOptions options = {}) {
  params.validate();
  using Vec = Eigen::Vector2d;
  const double damping = 2.0 * params.zeta * params.omega0;
  const double stiffness = params.omega0 * params.omega0;

  std::vector<PlantState> out(u.size());
  out[0] = x0;
  Vec x(x0.x, x0.v);
  RadauIIA5<2> solver(options);
  const auto samples = u.samples();
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double ta = u.time(i);
    const double tb = u.time(i + 1);
    const double ua = samples[i];
    const double slope = (samples[i + 1] - samples[i]) / (tb - ta);
    auto rhs = [&](double t, const Vec& s) {
      const double input = ua + slope * (t - ta);
      return Vec(s(1), input - damping * s(1) - stiffness * std::sin(s(0)));
    };
    auto jac = [&](double, const Vec& s) {
      Eigen::Matrix2d j;
      j << 0.0, 1.0, -stiffness * std::cos(s(0)), -damping;
      return j;
    };
    solver.advance(rhs, jac, ta, tb, x);
    if (!x.allFinite()) throw IntegrationError("plant: non-finite state", tb);
    out[i + 1] = {x(0), x(1)};
  }
  return out;
}

inline Signal simulate_true(const PlantParams& params, const Signal& u, PlantState x0 = {}, RadauOptions options = {}) {
  const auto states = simulate_true_states(params, u, x0, options);
  std::vector<double> y(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) y[i] = std::sin(states[i].x);
  return Signal(u.t0(), u.dt(), std::move(y));
}

}  // namespace greybox

#endif  // GREYBOX_PLANT_HPP
