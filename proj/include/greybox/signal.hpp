#ifndef GREYBOX_SIGNAL_HPP
#define GREYBOX_SIGNAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "greybox/error.hpp"

namespace greybox {

// Uniform time grid t_i = t0 + i*dt, i = 0..count-1.
struct Grid {
  double t0 = 0.0;
  double dt = 0.01;
  std::size_t count = 0;

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double duration() const { return static_cast<double>(count - 1) * dt; }

  // Grid covering [t0, t0 + horizon] with the last sample within one dt of the end.
  static Grid covering(double horizon, double dt, double t0 = 0.0) {
    if (!(dt > 0.0)) throw ArgumentError("grid: dt must be positive");
    if (!(horizon >= dt)) throw ArgumentError("grid: horizon must span at least one dt");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    return Grid{t0, dt, steps + 1};
  }

  bool operator==(const Grid& other) const {
    return count == other.count && t0 == other.t0 && dt == other.dt;
  }
};

// Uniformly sampled single-channel signal.
class Signal {
 public:
  Signal() = default;

  Signal(double t0, double dt, std::vector<double> samples)
      : t0_(t0), dt_(dt), samples_(std::move(samples)) {
    if (!(dt_ > 0.0)) throw ArgumentError("signal: dt must be positive");
    if (samples_.size() < 2) throw ArgumentError("signal: need at least two samples");
  }

  Signal(const Grid& grid, std::vector<double> samples)
      : Signal(grid.t0, grid.dt, std::move(samples)) {
    if (samples_.size() != grid.count) throw GridMismatchError("signal: sample count does not match grid");
  }

  static Signal zeros(const Grid& grid) { return Signal(grid, std::vector<double>(grid.count, 0.0)); }

  template <typename F>
  static Signal generate(const Grid& grid, F&& f) {
    std::vector<double> s(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) s[i] = f(grid.time(i));
    return Signal(grid, std::move(s));
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  double duration() const { return static_cast<double>(samples_.size() - 1) * dt_; }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }
  Grid grid() const { return Grid{t0_, dt_, samples_.size()}; }

  std::span<const double> samples() const { return samples_; }
  std::vector<double>& mutable_samples() { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  // Prefix of the signal covering [t0, t0 + horizon].
  Signal truncated(double horizon) const {
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt_));
    if (steps < 1 || steps + 1 > samples_.size()) throw ArgumentError("signal: truncation horizon outside signal");
    return Signal(t0_, dt_, std::vector<double>(samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(steps + 1)));
  }

  Signal& operator+=(const Signal& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
    return *this;
  }
  Signal& operator-=(const Signal& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
    return *this;
  }
  Signal& operator*=(double k) {
    for (auto& s : samples_) s *= k;
    return *this;
  }

  friend Signal operator+(Signal a, const Signal& b) { return a += b; }
  friend Signal operator-(Signal a, const Signal& b) { return a -= b; }
  friend Signal operator*(double k, Signal a) { return a *= k; }
  friend Signal operator-(Signal a) { return a *= -1.0; }

  static void require_same_grid(const Signal& a, const Signal& b) {
    if (a.size() != b.size() || a.t0_ != b.t0_ || a.dt_ != b.dt_) {
      throw GridMismatchError("signals do not share a sampling grid");
    }
  }

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<double> samples_;
};

namespace detail {

// Index of the first sample inside [t0 + burn_in, end].
inline std::size_t window_start(const Signal& a, double burn_in) {
  if (!(burn_in >= 0.0)) throw ArgumentError("burn-in must be nonnegative");
  if (!(burn_in < a.duration())) throw ArgumentError("burn-in must be shorter than the signal duration");
  const auto start = static_cast<std::size_t>(std::ceil(burn_in / a.dt() - 1e-9));
  if (start + 1 >= a.size()) throw ArgumentError("integration window has fewer than two samples");
  return start;
}

}  // namespace detail

// Time-averaged inner product (1/T') * integral of a*b over [t0 + burn_in, t_end],
// trapezoidal rule on the sample grid. T' is the window length.
inline double inner_product(const Signal& a, const Signal& b, double burn_in = 0.0) {
  Signal::require_same_grid(a, b);
  const std::size_t start = detail::window_start(a, burn_in);
  const auto x = a.samples();
  const auto y = b.samples();
  const std::size_t last = a.size() - 1;
  double sum = 0.5 * (x[start] * y[start] + x[last] * y[last]);
  for (std::size_t i = start + 1; i < last; ++i) sum += x[i] * y[i];
  return sum / static_cast<double>(last - start);
}

inline double l2_norm(const Signal& a, double burn_in = 0.0) {
  return std::sqrt(std::max(0.0, inner_product(a, a, burn_in)));
}

// ||reference - candidate|| / ||reference||, as a fraction.
inline double mismatch_norm(const Signal& reference, const Signal& candidate, double burn_in = 0.0) {
  const double ref = l2_norm(reference, burn_in);
  if (ref == 0.0) throw DegenerateReferenceError("mismatch norm: reference signal has zero norm");
  return l2_norm(reference - candidate, burn_in) / ref;
}

struct HarmonicEntry {
  int k = 0;
  double magnitude = 0.0;
  double phase = 0.0;  // in [0, 2pi)
};

// a(t) ~ sum_k M_k sin(k w t + phi_k)
struct HarmonicSpectrum {
  double base_frequency = 0.0;
  std::vector<HarmonicEntry> entries;

  const HarmonicEntry& at(int k) const {
    for (const auto& e : entries) {
      if (e.k == k) return e;
    }
    throw ArgumentError("harmonic spectrum has no entry for k = " + std::to_string(k));
  }

  // Mean-square power captured by harmonics 0..max_k.
  double energy(int max_k) const {
    double e = 0.0;
    for (const auto& h : entries) {
      if (h.k > max_k) continue;
      e += h.k == 0 ? h.magnitude * h.magnitude : 0.5 * h.magnitude * h.magnitude;
    }
    return e;
  }
};

// Projects a onto cos(k w t) and sin(k w t) for k = 0..max_k.
inline HarmonicSpectrum harmonic_content(const Signal& a, double base_frequency, int max_k, double burn_in = 0.0) {
  if (!(base_frequency > 0.0)) throw ArgumentError("harmonic content: base frequency must be positive");
  if (max_k < 0) throw ArgumentError("harmonic content: max_k must be nonnegative");
  const std::size_t start = detail::window_start(a, burn_in);
  const double window = static_cast<double>(a.size() - 1 - start) * a.dt();
  const double period = 2.0 * std::numbers::pi / base_frequency;
  if (window < 5.0 * period * (1.0 - 1e-9)) {
    throw ArgumentError("harmonic content: window must contain at least five base periods");
  }

  HarmonicSpectrum spectrum{base_frequency, {}};
  const Grid grid = a.grid();
  for (int k = 0; k <= max_k; ++k) {
    const double w = k * base_frequency;
    const Signal c = Signal::generate(grid, [w](double t) { return std::cos(w * t); });
    const Signal s = Signal::generate(grid, [w](double t) { return std::sin(w * t); });
    double cos_coeff = inner_product(a, c, burn_in);
    double sin_coeff = inner_product(a, s, burn_in);
    if (k > 0) {
      cos_coeff *= 2.0;
      sin_coeff *= 2.0;
    }
    // M sin(x + phi) = M sin(phi) cos(x) + M cos(phi) sin(x)
    double phase = std::atan2(cos_coeff, sin_coeff);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    if (phase >= 2.0 * std::numbers::pi) phase = 0.0;
    spectrum.entries.push_back({k, std::hypot(cos_coeff, sin_coeff), phase});
  }
  return spectrum;
}

}  // namespace greybox

#endif  // GREYBOX_SIGNAL_HPP
