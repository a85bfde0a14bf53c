#ifndef GREYBOX_EXCITATION_HPP
#define GREYBOX_EXCITATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "greybox/error.hpp"
#include "greybox/signal.hpp"

namespace greybox {

enum class ExcitationKind { sinusoid, pseudorandom };

struct ExcitationSpec {
  ExcitationKind kind = ExcitationKind::sinusoid;
  double amplitude = 1.0;
  // sinusoid: amplitude * cos(frequency * t + phase)
  double frequency = 1.0;
  double phase = 0.0;
  // pseudorandom: Uniform(-amplitude, amplitude) nodes every node_period, linearly interpolated
  double node_period = 0.8;
  std::uint64_t seed = 0;

  static ExcitationSpec make_sinusoid(double amplitude, double frequency, double phase = 0.0) {
    ExcitationSpec s;
    s.kind = ExcitationKind::sinusoid;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    s.validate();
    return s;
  }

  static ExcitationSpec make_pseudorandom(double amplitude, std::uint64_t seed, double node_period = 0.8) {
    ExcitationSpec s;
    s.kind = ExcitationKind::pseudorandom;
    s.amplitude = amplitude;
    s.seed = seed;
    s.node_period = node_period;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(amplitude > 0.0)) throw ArgumentError("excitation: amplitude must be positive");
    if (kind == ExcitationKind::sinusoid) {
      if (!(frequency > 0.0)) throw ArgumentError("excitation: sinusoid frequency must be positive");
      if (!(phase >= 0.0 && phase < 2.0 * std::numbers::pi)) {
        throw ArgumentError("excitation: sinusoid phase must lie in [0, 2pi)");
      }
    } else if (!(node_period > 0.0)) {
      throw ArgumentError("excitation: node period must be positive");
    }
  }
};

// Uniform(-1, 1) draws from mt19937_64, using the top 53 bits of each output.
// Both the engine and the conversion are fully specified, so sequences are
// identical on every platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * unit() - 1.0; }
  double between(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

inline Signal sinusoid(const ExcitationSpec& spec, const Grid& grid) {
  if (spec.kind != ExcitationKind::sinusoid) throw ArgumentError("sinusoid: spec is not a sinusoid");
  spec.validate();
  return Signal::generate(grid, [&](double t) { return spec.amplitude * std::cos(spec.frequency * t + spec.phase); });
}

// Node values at t = 0, P, 2P, ... covering the grid.
inline std::vector<double> pseudorandom_nodes(const ExcitationSpec& spec, double t_end) {
  const auto count = static_cast<std::size_t>(std::floor(t_end / spec.node_period + 1e-9)) + 2;
  UniformStream stream(spec.seed);
  std::vector<double> nodes(count);
  for (auto& v : nodes) v = spec.amplitude * stream.symmetric();
  return nodes;
}

inline Signal pseudorandom(const ExcitationSpec& spec, const Grid& grid) {
  if (spec.kind != ExcitationKind::pseudorandom) throw ArgumentError("pseudorandom: spec is not pseudorandom");
  spec.validate();
  if (grid.t0 < 0.0) throw ArgumentError("pseudorandom: grid must start at t >= 0");
  const double t_end = grid.time(grid.count - 1);
  const std::vector<double> nodes = pseudorandom_nodes(spec, t_end);
  return Signal::generate(grid, [&](double t) {
    const double pos = t / spec.node_period;
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j + 1 >= nodes.size()) j = nodes.size() - 2;
    const double frac = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
    return (1.0 - frac) * nodes[j] + frac * nodes[j + 1];
  });
}

inline Signal generate(const ExcitationSpec& spec, const Grid& grid) {
  return spec.kind == ExcitationKind::sinusoid ? sinusoid(spec, grid) : pseudorandom(spec, grid);
}

}  // namespace greybox

#endif  // GREYBOX_EXCITATION_HPP
