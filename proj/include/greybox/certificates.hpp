#ifndef GREYBOX_CERTIFICATES_HPP
#define GREYBOX_CERTIFICATES_HPP

// Finite-horizon evidence that a sinusoidal witness makes every sampled
// residual orthogonal to the physical model output (zeroth order) or to its
// damping-ratio sensitivity (first order), for every sampled (zeta, gamma).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "greybox/chebyshev.hpp"
#include "greybox/error.hpp"
#include "greybox/excitation.hpp"
#include "greybox/physical.hpp"
#include "greybox/residual.hpp"
#include "greybox/signal.hpp"

namespace greybox {

enum class CertificateOrder { zeroth, first };

// odd_chebyshev is the residual class itself. linear_feature swaps the first
// feature T_3 for T_1, which puts energy at the witness frequency; a sound
// checker must reject it.
enum class FeatureSet { odd_chebyshev, linear_feature };

// Decay is judged on the envelope E(T) = max |c(T')| over the last witness
// period T' in (T - 2pi/w, T]. The pointwise c(T) oscillates with T, so a
// ratio of pointwise values is not a measure of O(1/T) decay; the envelope is.
struct CertificateOptions {
  std::vector<double> zeta_grid{0.2, 0.35, 0.5, 0.75, 1.0};
  std::vector<double> horizons{80.0, 160.0, 320.0};
  double omega0 = 2.0;
  double dt = 0.01;
  double burn_in = 20.0;
  double tolerance = 0.02;  // on max |c| at the largest horizon
  double decay_factor = 0.6;  // E(T_next) <= decay_factor E(T) + decay_slack
  double decay_slack = 1e-9;
  FeatureSet features = FeatureSet::odd_chebyshev;
};

struct CertificateCell {
  double zeta = 0.0;
  std::size_t gamma_index = 0;
  std::vector<double> normalized;  // c(T) = <r, v> / (||r|| ||v||) per horizon
  std::vector<double> raw;         // <r, v> per horizon
  std::vector<double> envelope;    // E(T) per horizon
  std::vector<double> decay_ratios;  // E(T_{i+1}) / E(T_i)
  std::vector<double> pointwise_ratios;  // |c(T_{i+1})| / |c(T_i)|, informational
  bool decay_ok = true;
};

struct CertificateReport {
  CertificateOrder order = CertificateOrder::zeroth;
  FeatureSet features = FeatureSet::odd_chebyshev;
  ExcitationSpec witness;
  CertificateOptions options;
  std::vector<CertificateCell> cells;
  std::vector<std::string> notes;
  double max_abs_final = 0.0;  // max |c| at the largest horizon
  double max_decay_ratio = 0.0;
  std::size_t pointwise_decay_violations = 0;  // cells whose pointwise ratio exceeds decay_factor
  bool decay_ok = true;
  bool pass = false;
};

inline std::string to_string(CertificateOrder o) { return o == CertificateOrder::zeroth ? "zeroth" : "first"; }
inline std::string to_string(FeatureSet f) {
  return f == FeatureSet::odd_chebyshev ? "odd_chebyshev" : "linear_feature";
}

// Stable residual samples with unit-scale coefficients.
inline std::vector<ResidualParams> sample_residuals(double alpha, int m, int n, std::size_t count, std::uint64_t seed) {
  UniformStream stream(seed);
  std::vector<ResidualParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_residual(alpha, m, n, stream));
  return out;
}

namespace detail {

// Normalized cross products c(T') for every grid end time T' after the burn-in,
// from running trapezoid sums. Entry e corresponds to sample index start + e.
inline std::vector<double> running_normalized_cross(const Signal& r, const Signal& v, double burn_in) {
  const std::size_t start = window_start(r, burn_in);
  const auto x = r.samples();
  const auto y = v.samples();
  std::vector<double> out(x.size() - start, 0.0);
  double sxy = 0.5 * x[start] * y[start];
  double sxx = 0.5 * x[start] * x[start];
  double syy = 0.5 * y[start] * y[start];
  for (std::size_t i = start + 1; i < x.size(); ++i) {
    // Sums run with weight 1 for interior points; the last point gets 1/2.
    const double ixy = sxy + 0.5 * x[i] * y[i];
    const double ixx = sxx + 0.5 * x[i] * x[i];
    const double iyy = syy + 0.5 * y[i] * y[i];
    const double scale = std::sqrt(std::max(0.0, ixx) * std::max(0.0, iyy));
    out[i - start] = scale > 0.0 ? ixy / scale : 0.0;
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  return out;
}

}  // namespace detail

inline std::vector<int> certificate_feature_degrees(FeatureSet features, int n) {
  std::vector<int> degrees = odd_feature_degrees(n);
  if (features == FeatureSet::linear_feature) degrees.front() = 1;
  return degrees;
}

inline CertificateReport check_certificate(CertificateOrder order, const ExcitationSpec& witness,
                                           const std::vector<ResidualParams>& gammas, CertificateOptions options = {}) {
  if (witness.kind != ExcitationKind::sinusoid) throw ArgumentError("certificate: witness must be a sinusoid");
  witness.validate();
  if (options.horizons.empty() || options.zeta_grid.empty()) throw ArgumentError("certificate: empty grid");
  if (!std::is_sorted(options.horizons.begin(), options.horizons.end())) {
    throw ArgumentError("certificate: horizons must be increasing");
  }
  for (const auto& g : gammas) {
    if (g.alpha != witness.amplitude) {
      throw ArgumentError("certificate: witness amplitude must equal the residual class alpha");
    }
  }

  CertificateReport report;
  report.order = order;
  report.features = options.features;
  report.witness = witness;
  report.options = options;

  // Every system is causal, so one simulation to the largest horizon serves all horizons.
  const Grid grid = Grid::covering(options.horizons.back(), options.dt);
  const Signal u = sinusoid(witness, grid);

  std::vector<Signal> residuals;
  std::vector<std::size_t> residual_ids;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    try {
      gammas[j].validate();
    } catch (const ParameterError& e) {
      report.notes.push_back("gamma " + std::to_string(j) + " skipped: " + e.what());
      continue;
    }
    const auto z = feature_matrix(u, gammas[j].alpha, certificate_feature_degrees(options.features, gammas[j].n));
    residuals.push_back(simulate_hammerstein(gammas[j], z, u));
    residual_ids.push_back(j);
  }

  const std::size_t start = detail::window_start(u, options.burn_in);
  const auto period_samples =
      static_cast<std::size_t>(std::llround(2.0 * std::numbers::pi / witness.frequency / options.dt));
  std::vector<std::size_t> horizon_index;
  for (double T : options.horizons) {
    const auto idx = static_cast<std::size_t>(std::llround(T / options.dt));
    if (idx <= start + period_samples) {
      throw ArgumentError("certificate: every horizon must exceed the burn-in by at least one witness period");
    }
    horizon_index.push_back(idx);
  }

  bool all_below = true;
  for (double zeta : options.zeta_grid) {
    const auto phys = simulate_physical_with_sensitivity({zeta, options.omega0}, u);
    const Signal& v_full = order == CertificateOrder::zeroth ? phys.output : phys.sensitivity;
    std::vector<Signal> v_by_horizon;
    for (double T : options.horizons) v_by_horizon.push_back(v_full.truncated(T));

    for (std::size_t j = 0; j < residuals.size(); ++j) {
      CertificateCell cell;
      cell.zeta = zeta;
      cell.gamma_index = residual_ids[j];
      for (std::size_t h = 0; h < options.horizons.size(); ++h) {
        const Signal r = residuals[j].truncated(options.horizons[h]);
        const Signal& v = v_by_horizon[h];
        const double raw = inner_product(r, v, options.burn_in);
        const double scale = l2_norm(r, options.burn_in) * l2_norm(v, options.burn_in);
        cell.raw.push_back(raw);
        cell.normalized.push_back(scale > 0.0 ? raw / scale : 0.0);
      }
      const auto running = detail::running_normalized_cross(residuals[j], v_full, options.burn_in);
      for (std::size_t idx : horizon_index) {
        double env = 0.0;
        for (std::size_t i = idx + 1 - period_samples; i <= idx; ++i) env = std::max(env, std::abs(running[i - start]));
        cell.envelope.push_back(env);
      }
      bool pointwise_ok = true;
      for (std::size_t h = 0; h + 1 < cell.normalized.size(); ++h) {
        const double prev = cell.envelope[h];
        const double next = cell.envelope[h + 1];
        cell.decay_ratios.push_back(prev > 0.0 ? next / prev : 0.0);
        if (next > options.decay_factor * prev + options.decay_slack) cell.decay_ok = false;
        report.max_decay_ratio = std::max(report.max_decay_ratio, cell.decay_ratios.back());

        const double p_prev = std::abs(cell.normalized[h]);
        const double p_next = std::abs(cell.normalized[h + 1]);
        cell.pointwise_ratios.push_back(p_prev > 0.0 ? p_next / p_prev : 0.0);
        if (p_next > options.decay_factor * p_prev + options.decay_slack) pointwise_ok = false;
      }
      if (!pointwise_ok) ++report.pointwise_decay_violations;
      const double final_c = std::abs(cell.normalized.back());
      report.max_abs_final = std::max(report.max_abs_final, final_c);
      if (!(final_c < options.tolerance)) all_below = false;
      report.decay_ok = report.decay_ok && cell.decay_ok;
      report.cells.push_back(std::move(cell));
    }
  }
  report.pass = all_below && report.decay_ok;
  return report;
}

inline CertificateReport check_zeroth_order(const ExcitationSpec& witness, const std::vector<ResidualParams>& gammas,
                                            CertificateOptions options = {}) {
  return check_certificate(CertificateOrder::zeroth, witness, gammas, std::move(options));
}

inline CertificateReport check_first_order(const ExcitationSpec& witness, const std::vector<ResidualParams>& gammas,
                                           CertificateOptions options = {}) {
  return check_certificate(CertificateOrder::first, witness, gammas, std::move(options));
}

struct OneStepConvergence {
  double zeta_hat = 0.0;
  double zeta_iterated = 0.0;
  double relative_change = 0.0;  // (zeta_iterated - zeta_hat) / zeta_hat
  ZetaFit refit;
};

// Re-estimates zeta on the residual-compensated output y - r.
inline OneStepConvergence one_step_convergence_check(const Signal& u, const Signal& y, double zeta_hat,
                                                     const ResidualParams& residual, double omega0,
                                                     ZetaSearch search = {}) {
  const Signal r = simulate_residual(residual, u);
  OneStepConvergence out;
  out.zeta_hat = zeta_hat;
  out.refit = estimate_zeta(u, y - r, omega0, search);
  out.zeta_iterated = out.refit.zeta_hat;
  out.relative_change = (out.zeta_iterated - zeta_hat) / zeta_hat;
  return out;
}

}  // namespace greybox

#endif  // GREYBOX_CERTIFICATES_HPP
