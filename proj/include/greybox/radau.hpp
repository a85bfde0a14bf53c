#ifndef GREYBOX_RADAU_HPP
#define GREYBOX_RADAU_HPP

// Three-stage Radau IIA (order 5, A- and L-stable) with simplified Newton
// iterations and step-doubling error control.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "greybox/error.hpp"

namespace greybox {

struct RadauOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  // When positive, disables error control and takes ceil(interval / fixed_step) equal steps.
  double fixed_step = 0.0;
  double min_step = 1e-12;
  int max_newton_iterations = 12;
};

template <int N>
class RadauIIA5 {
 public:
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  explicit RadauIIA5(RadauOptions options = {}) : opt_(options) {}

  // Advances x from t0 to t1. rhs(t, x) -> Vec, jac(t, x) -> Mat.
  template <typename Rhs, typename Jac>
  void advance(const Rhs& rhs, const Jac& jac, double t0, double t1, Vec& x) {
    if (opt_.fixed_step > 0.0) {
      const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opt_.fixed_step - 1e-9)));
      const double h = (t1 - t0) / steps;
      for (int i = 0; i < steps; ++i) {
        Vec out;
        if (!step(rhs, jac, t0 + i * h, h, x, out)) throw IntegrationError("radau: Newton iteration failed", t0 + i * h);
        x = out;
      }
      return;
    }

    double t = t0;
    if (!(h_ > 0.0)) h_ = t1 - t0;
    while (t < t1) {
      double h = std::min(h_, t1 - t);
      const bool last = h >= t1 - t;
      if (h < opt_.min_step) throw IntegrationError("radau: step size underflow", t);

      Vec full, half, two_halves;
      const bool ok = step(rhs, jac, t, h, x, full) && step(rhs, jac, t, 0.5 * h, x, half) &&
                      step(rhs, jac, t + 0.5 * h, 0.5 * h, half, two_halves);
      if (!ok || !two_halves.allFinite()) {
        h_ = 0.25 * h;
        continue;
      }
      // Local error of the two-half-step solution, order 5 => factor 2^5 - 1.
      const Vec diff = (two_halves - full) / 31.0;
      double err = 0.0;
      for (int i = 0; i < N; ++i) {
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(x(i)), std::abs(two_halves(i)));
        err += (diff(i) / sc) * (diff(i) / sc);
      }
      err = std::sqrt(err / N);
      const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.2, 4.0);
      if (err <= 1.0) {
        x = two_halves;
        t = last ? t1 : t + h;
        ++accepted_;
        // Do not let a step shortened only to hit t1 shrink the next one.
        h_ = last ? std::max(h_, h * factor) : h * factor;
      } else {
        ++rejected_;
        h_ = h * factor;
      }
    }
  }

  long accepted_steps() const { return accepted_; }
  long rejected_steps() const { return rejected_; }

 private:
  template <typename Rhs, typename Jac>
  bool step(const Rhs& rhs, const Jac& jac, double t, double h, const Vec& x, Vec& out) const {
    constexpr double s6 = 2.449489742783178098197284;
    static const double c[3] = {(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0};
    static const double a[3][3] = {
        {(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0},
        {(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0},
        {(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0}};

    using Big = Eigen::Matrix<double, 3 * N, 3 * N>;
    using BigVec = Eigen::Matrix<double, 3 * N, 1>;
    const Mat j = jac(t, x);
    Big m = Big::Identity();
    for (int r = 0; r < 3; ++r) {
      for (int q = 0; q < 3; ++q) m.template block<N, N>(r * N, q * N) -= h * a[r][q] * j;
    }
    const Eigen::PartialPivLU<Big> lu(m);

    BigVec z = BigVec::Zero();
    Vec scale;
    for (int i = 0; i < N; ++i) scale(i) = opt_.atol + opt_.rtol * std::abs(x(i));
    for (int it = 0; it < opt_.max_newton_iterations; ++it) {
      Vec f[3];
      for (int r = 0; r < 3; ++r) f[r] = rhs(t + c[r] * h, Vec(x + z.template segment<N>(r * N)));
      BigVec g;
      for (int r = 0; r < 3; ++r) {
        Vec acc = z.template segment<N>(r * N);
        for (int q = 0; q < 3; ++q) acc -= h * a[r][q] * f[q];
        g.template segment<N>(r * N) = acc;
      }
      const BigVec dz = lu.solve(-g);
      z += dz;
      if (!z.allFinite()) return false;
      double norm = 0.0;
      for (int r = 0; r < 3; ++r) {
        norm = std::max(norm, (dz.template segment<N>(r * N).array() / scale.array()).abs().maxCoeff());
      }
      if (norm < 1e-4) {
        out = x + z.template segment<N>(2 * N);  // stiffly accurate: last stage is the step result
        return true;
      }
    }
    return false;
  }

  RadauOptions opt_;
  double h_ = 0.0;
  long accepted_ = 0;
  long rejected_ = 0;
};

}  // namespace greybox

#endif  // GREYBOX_RADAU_HPP
