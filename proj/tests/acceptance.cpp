// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance <config dir>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "greybox/certificates.hpp"
#include "greybox/workbench.hpp"

using namespace greybox;
namespace wb = greybox::workbench;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;

  void note(const std::string& s) { details.push_back(s); }
  bool require(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    return ok;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string pct(double v) { return fmt("%.2f%%", 100.0 * v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path g_configs;

wb::ExperimentConfig preset(const std::string& name) { return wb::load_config(g_configs / (name + ".cfg")); }

Outcome identification(const std::string& name, double expected, double band, double time_limit) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto id = wb::identify(preset(name));
  const double elapsed = seconds_since(t0);
  for (const auto& n : id.notes) o.note(n);
  o.note("zeta_hat = " + fmt("%.6f", id.fit.zeta_hat) + ", " + fmt("%.2f s", elapsed));
  const double m = id.fit.mismatch;
  bool ok = o.require(std::abs(m - expected) <= band, "mismatch " + pct(m) + " within " + pct(expected) + " +/- " +
                                                         fmt("%.0f pp", 100.0 * band));
  if (time_limit > 0.0) ok = o.require(elapsed < time_limit, "runtime below " + fmt("%.0f s", time_limit)) && ok;
  o.pass = ok;
  return o;
}

Outcome medium_hybrid() {
  Outcome o;
  int passing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = wb::apply_overrides(preset("medium"), {seed, std::nullopt, std::nullopt});
    const auto r = wb::run_pipeline(c, std::nullopt, wb::Stage::validate);
    const double tp = r.training_physical->whole;
    const double th = r.training_hybrid->whole;
    const double vp = r.validation_physical->whole;
    const double vh = r.validation_hybrid->whole;
    std::vector<std::string> misses;
    if (tp < 0.09 || tp > 0.16) misses.push_back("train physical");
    if (th < 0.03 || th > 0.09) misses.push_back("train hybrid");
    if (tp / th < 1.5) misses.push_back("train factor");
    if (vp < 0.09 || vp > 0.17) misses.push_back("validation physical");
    if (vh < 0.04 || vh > 0.10) misses.push_back("validation hybrid");
    if (vp / vh < 1.4) misses.push_back("validation factor");
    std::ostringstream line;
    line << "seed " << seed << " (validation seed " << c.validation.seed << "): train " << pct(tp) << " -> " << pct(th)
         << " (x" << fmt("%.2f", tp / th) << "), validation " << pct(vp) << " -> " << pct(vh) << " (x"
         << fmt("%.2f", vp / vh) << ")";
    if (misses.empty()) {
      ++passing;
    } else {
      line << "  outside band:";
      for (const auto& m : misses) line << " " << m;
    }
    o.note(line.str());
  }
  o.pass = o.require(passing >= 4, std::to_string(passing) + " of 5 seeds inside every band (need 4)");
  return o;
}

Outcome large_hybrid() {
  Outcome o;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = wb::apply_overrides(preset("large"), {seed, std::nullopt, std::nullopt});
    const auto r = wb::run_pipeline(c, std::nullopt, wb::Stage::validate);
    const double th = r.training_hybrid->whole;
    const double vh = r.validation_hybrid->whole;
    ok = o.require(th > 0.5 && vh > 0.5, "seed " + std::to_string(seed) + ": train physical " +
                                             pct(r.training_physical->whole) + ", hybrid " + pct(th) +
                                             "; validation physical " + pct(r.validation_physical->whole) +
                                             ", hybrid " + pct(vh)) &&
         ok;
  }
  o.pass = ok;
  return o;
}

Outcome certificate(CertificateOrder order) {
  Outcome o;
  const auto c = preset("medium");
  const auto t0 = std::chrono::steady_clock::now();
  const auto gammas = sample_residuals(c.residual_alpha, c.m, c.n, c.gamma_samples, c.gamma_seed);
  CertificateOptions opt = c.certificate;
  const auto report = check_certificate(order, c.witness, gammas, opt);
  opt.features = FeatureSet::linear_feature;
  const auto mutation = check_certificate(order, c.witness, gammas, opt);
  const double elapsed = seconds_since(t0);
  std::istringstream table(io::certificate_table(report));
  for (std::string line; std::getline(table, line);) o.note(line);
  o.note("pointwise |c(2T)| <= 0.6 |c(T)| violated in " + std::to_string(report.pointwise_decay_violations) + " of " +
         std::to_string(report.cells.size()) + " cells (informational; the verdict uses the envelope)");
  bool ok = o.require(report.pass, "class certificate passes: max|c| = " + fmt("%.3e", report.max_abs_final) +
                                       ", max envelope decay ratio " + fmt("%.3f", report.max_decay_ratio));
  ok = o.require(!mutation.pass, "linear-feature mutation rejected: max|c| = " + fmt("%.3f", mutation.max_abs_final)) &&
       ok;
  ok = o.require(elapsed < 300.0, "runtime " + fmt("%.1f s", elapsed) + " below 300 s") && ok;
  o.pass = ok;
  return o;
}

Outcome one_step() {
  Outcome o;
  std::vector<double> changes;
  for (double T : {80.0, 160.0}) {
    const auto c = wb::apply_overrides(preset("medium"), {std::nullopt, T, std::nullopt});
    const auto r = wb::run_pipeline(c, std::nullopt, wb::Stage::validate);
    changes.push_back(r.one_step->relative_change);
    o.note("T = " + fmt("%.0f", T) + ": zeta " + fmt("%.6f", r.one_step->zeta_hat) + " -> " +
           fmt("%.6f", r.one_step->zeta_iterated) + " (" + fmt("%+.4f%%", 100.0 * r.one_step->relative_change) + ")");
  }
  bool ok = o.require(std::abs(changes[0]) < 0.005, "|relative change| at T = 80 below 0.5%");
  ok = o.require(std::abs(changes[1]) < std::abs(changes[0]), "|relative change| shrinks when T doubles") && ok;
  o.pass = ok;
  return o;
}

Outcome properties() {
  Outcome o;
  bool ok = true;
  const PlantParams plant{0.5, 2.0};

  {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> deg(0, 13);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const int l = deg(rng);
      const double th = ang(rng);
      worst = std::max(worst, std::abs(chebyshev_t(l, std::cos(th)) - std::cos(l * th)));
    }
    ok = o.require(worst < 1e-10, "Chebyshev identity on 1000 pairs, worst " + fmt("%.2e", worst)) && ok;
  }
  {
    // worst |<cos(t + 0.4), cos(k t + 1.1)>| over the last period before T
    bool decays = true;
    std::ostringstream s;
    for (int k : {2, 3, 5}) {
      std::vector<double> bound;
      for (double T : {80.0, 160.0, 320.0}) {
        const Grid g = Grid::covering(T, 0.01);
        const Signal a = Signal::generate(g, [](double t) { return std::cos(t + 0.4); });
        const Signal b = Signal::generate(g, [k](double t) { return std::cos(k * t + 1.1); });
        double worst = 0.0;
        for (double e = T - 2.0 * std::numbers::pi; e <= T; e += 0.05) {
          worst = std::max(worst, std::abs(inner_product(a.truncated(e), b.truncated(e))));
        }
        bound.push_back(worst);
      }
      decays = decays && bound[1] <= 0.5 * bound[0] * 1.05 && bound[2] <= 0.5 * bound[1] * 1.05;
      s << " k=" << k << ": " << fmt("%.2e", bound[0]) << " " << fmt("%.2e", bound[1]) << " " << fmt("%.2e", bound[2]);
    }
    ok = o.require(decays, "cosine cross products halve per horizon doubling;" + s.str()) && ok;
  }
  {
    double worst = 0.0;
    for (double zeta : {0.2, 0.5, 1.0}) {
      for (double w : {0.5, 1.0, 3.0}) {
        const Grid g = Grid::covering(100.0, 0.001);
        const Signal y = simulate_physical({zeta, 2.0}, sinusoid(ExcitationSpec::make_sinusoid(1.0, w), g));
        const std::complex<double> G = 1.0 / std::complex<double>(4.0 - w * w, 4.0 * zeta * w);
        // residual of the steady state against Re(G e^{iwt}) on the tail
        double err = 0.0;
        for (std::size_t i = 70000; i < y.size(); ++i) {
          const double t = y.time(i);
          err = std::max(err, std::abs(y[i] - (G.real() * std::cos(w * t) - G.imag() * std::sin(w * t))));
        }
        worst = std::max(worst, err / std::abs(G));
      }
    }
    ok = o.require(worst < 1e-6, "frequency response vs closed form (dt = 1e-3), worst relative " + fmt("%.2e", worst)) &&
         ok;
  }
  {
    const Grid g = Grid::covering(80.0, 0.01);
    const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 9), g);
    const double h = 1e-4;
    double worst = 0.0;
    for (double zeta : {0.2, 0.5, 1.5}) {
      const Signal s = sensitivity_zeta({zeta, 2.0}, u);
      const Signal fd = 0.5 / h * (simulate_physical({zeta + h, 2.0}, u) - simulate_physical({zeta - h, 2.0}, u));
      worst = std::max(worst, mismatch_norm(s, fd));
    }
    ok = o.require(worst < 1e-4, "sensitivity vs central differences, worst relative " + fmt("%.2e", worst)) && ok;
  }
  {
    const Grid g = Grid::covering(40.0, 0.01);
    const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 7), g);
    UniformStream stream(3);
    const ResidualParams p = sample_residual(4.0, 5, 6, stream);
    const Signal target = simulate_residual(sample_residual(4.0, 5, 6, stream), u) + 0.3 * u;
    const auto grad = residual_loss_gradient(p, u, target, 5.0);
    auto loss = [&](const ResidualParams& q) { return residual_loss_gradient(q, u, target, 5.0).loss; };
    double worst = 0.0;
    auto compare = [&](double analytic, const std::function<void(ResidualParams&, double)>& bump, double scale) {
      const double h = 1e-6 * std::max(1.0, std::abs(scale));
      ResidualParams up = p;
      ResidualParams down = p;
      bump(up, h);
      bump(down, -h);
      const double fd = (loss(up) - loss(down)) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-12));
    };
    for (int d = 0; d < p.m; ++d) {
      const auto i = static_cast<std::size_t>(d);
      compare(grad.grad_a[i], [i](ResidualParams& q, double h) { q.a[i] += h; }, p.a[i]);
      for (int k = 0; k < p.n; ++k) {
        compare(grad.grad_b(d, k), [d, k](ResidualParams& q, double h) { q.b(d, k) += h; }, p.b(d, k));
      }
    }
    ok = o.require(worst < 1e-4, "residual gradient vs central differences (35 coordinates), worst relative " +
                                     fmt("%.2e", worst)) &&
         ok;
  }
  {
    const Grid g = Grid::covering(40.0, 0.01);
    const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(10.0, 3), g);
    const Signal y = simulate_true(plant, u);
    const Signal y_neg = simulate_true(plant, -u);
    const double plant_odd = mismatch_norm(y, -y_neg);
    UniformStream stream(8);
    const ResidualParams p = sample_residual(10.0, 5, 6, stream);
    const double residual_odd = mismatch_norm(simulate_residual(p, u), -simulate_residual(p, -u));
    ok = o.require(plant_odd < 1e-8 && residual_odd < 1e-12,
                   "oddness: plant " + fmt("%.2e", plant_odd) + ", residual " + fmt("%.2e", residual_odd)) &&
         ok;
  }
  {
    const auto states = simulate_true_states(plant, Signal::zeros(Grid::covering(30.0, 0.01)), {2.5, 1.0});
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < states.size(); ++i) {
      worst_rise = std::max(worst_rise, pendulum_energy(plant, states[i]) - pendulum_energy(plant, states[i - 1]));
    }
    ok = o.require(worst_rise <= 1e-9, "unforced energy non-increasing, largest step rise " + fmt("%.2e", worst_rise)) &&
         ok;
  }
  o.pass = ok;
  return o;
}

Outcome self_consistency() {
  Outcome o;
  bool ok = true;
  const Grid g = Grid::covering(80.0, 0.01);
  const Signal u = sinusoid(ExcitationSpec::make_sinusoid(4.0, 1.0, 1.5 * std::numbers::pi), g);
  for (double zeta : {0.1, 0.5, 1.0, 2.0}) {
    ZetaSearch search;
    search.hi = 4.0;
    const auto fit = estimate_zeta(u, simulate_physical({zeta, 2.0}, u), 2.0, search);
    ok = o.require(std::abs(fit.zeta_hat - zeta) < 1e-5,
                   "zeta " + fmt("%.1f", zeta) + " recovered as " + fmt("%.9f", fit.zeta_hat)) &&
         ok;
  }
  const Signal v = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 11), g);
  UniformStream stream(40);
  const Signal target = simulate_residual(sample_residual(4.0, 5, 6, stream), v);
  const auto fit = fit_residual(v, target, 4.0, 5, 6);
  ok = o.require(fit.relative_error < 1e-3, "synthetic residual target reproduced, relative error " +
                                                fmt("%.2e", fit.relative_error) + " (" + fit.termination + ")") &&
       ok;
  o.pass = ok;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path("configs");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"medium-signal physical identification", [] { return identification("medium", 0.1201, 0.02, 30.0); }},
      {"large-signal physical identification", [] { return identification("large", 0.9071, 0.05, 0.0); }},
      {"medium-signal hybrid improvement", medium_hybrid},
      {"large-signal failure to fit", large_hybrid},
      {"zeroth-order certificate", [] { return certificate(CertificateOrder::zeroth); }},
      {"first-order certificate", [] { return certificate(CertificateOrder::first); }},
      {"one-step convergence", one_step},
      {"property suites", properties},
      {"estimator self-consistency", self_consistency},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << "\n";
    for (const auto& d : o.details) std::cout << "    " << d << "\n";
    std::cout.flush();
    if (!o.pass) ++failures;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << " of " << criteria.size() << " criteria pass\n";
  return failures == 0 ? 0 : 1;
}
