#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "testing.hpp"

#include <cmath>
#include <numbers>

#include "greybox/excitation.hpp"
#include "greybox/io.hpp"
#include "greybox/residual.hpp"

using namespace greybox;

namespace {

ResidualParams sampled(std::uint64_t seed, double alpha = 4.0, int m = 5, int n = 6) {
  UniformStream stream(seed);
  return sample_residual(alpha, m, n, stream);
}

}  // namespace

TEST_CASE("zero numerators give the zero model") {
  const Grid g = Grid::covering(20.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 1), g);
  const Signal r = simulate_residual(ResidualParams::zero(4.0, 5, 6, 4.0), u);
  for (double v : r.samples()) CHECK(v == 0.0);
}

TEST_CASE("s / (1 + s) applied to cos t") {
  ResidualParams p;
  p.alpha = 1.0;
  p.m = 2;
  p.n = 1;
  p.a = {1.0, 1.0};
  p.b = Eigen::MatrixXd::Zero(2, 1);
  p.b(1, 0) = 1.0;
  const double dt = 0.001;
  const Grid g = Grid::covering(60.0, dt);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(g.count), 1);
  for (std::size_t i = 0; i < g.count; ++i) z(static_cast<Eigen::Index>(i), 0) = std::cos(g.time(i));
  const Signal r = simulate_hammerstein(p, z, Signal::zeros(g));
  // i / (1 + i) = e^{i pi/4} / sqrt(2)
  for (std::size_t i = g.count - 2000; i < g.count; ++i) {
    const double t = g.time(i);
    CHECK(r[i] == doctest::Approx(std::cos(t + std::numbers::pi / 4) / std::sqrt(2.0)).scale(1.0).epsilon(1e-7));
  }
}

TEST_CASE("the residual is odd") {
  const Grid g = Grid::covering(40.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 2), g);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ResidualParams p = sampled(seed);
    const Signal r = simulate_residual(p, u);
    const Signal r_neg = simulate_residual(p, -u);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r_neg[i] == -r[i]);
  }
}

TEST_CASE("an amplitude-alpha sinusoid produces only odd harmonics 3..2n+1") {
  const double dt = 2.0 * std::numbers::pi / 1000.0;
  const Grid g = Grid::covering(80.0 * std::numbers::pi, dt);
  const Signal u = sinusoid(ExcitationSpec::make_sinusoid(4.0, 1.0, 0.7), g);
  for (std::uint64_t seed : {4ULL, 5ULL, 6ULL}) {
    const auto h = harmonic_content(simulate_residual(sampled(seed), u), 1.0, 16, 40.0 * std::numbers::pi);
    const double total = h.energy(16);
    REQUIRE(total > 0.0);
    for (const auto& e : h.entries) {
      const double power = 0.5 * e.magnitude * e.magnitude;
      const bool allowed = e.k >= 3 && e.k <= 13 && e.k % 2 == 1;
      if (!allowed) CHECK(power < 1e-6 * total);
    }
    CHECK(0.5 * h.at(1).magnitude * h.at(1).magnitude < 1e-6 * total);
  }
}

TEST_CASE("stable parameterization") {
  for (int deg = 0; deg <= 6; ++deg) {
    const HurwitzParameterization hp(deg);
    UniformStream stream(static_cast<std::uint64_t>(deg) + 10);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd eta(deg);
      for (int j = 0; j < deg; ++j) eta(j) = stream.between(-3.0, 3.0);
      const auto c = hp.coefficients(eta);
      REQUIRE(c.size() == static_cast<std::size_t>(deg) + 1);
      CHECK(c[0] == 1.0);
      CHECK(lti::is_hurwitz(c));

      const Eigen::MatrixXd jac = hp.jacobian(eta);
      for (int j = 0; j < deg; ++j) {
        const double h = 1e-6;
        Eigen::VectorXd up = eta;
        Eigen::VectorXd down = eta;
        up(j) += h;
        down(j) -= h;
        const auto cu = hp.coefficients(up);
        const auto cd = hp.coefficients(down);
        for (int i = 0; i < deg; ++i) {
          const double fd = (cu[static_cast<std::size_t>(i) + 1] - cd[static_cast<std::size_t>(i) + 1]) / (2.0 * h);
          CHECK(jac(i, j) == doctest::Approx(fd).epsilon(1e-6).scale(std::abs(c[static_cast<std::size_t>(i) + 1])));
        }
      }
    }
  }
  // (1 + s/4)^4 = 1 + s + 3/8 s^2 + 1/16 s^3 + 1/256 s^4
  const HurwitzParameterization hp(4);
  const auto c = hp.coefficients(hp.repeated_root(4.0));
  const std::vector<double> expected{1.0, 1.0, 0.375, 0.0625, 1.0 / 256.0};
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(expected[i]).epsilon(1e-12));

  // spread roots 4 * 2^{-1.5, -0.5, 0.5, 1.5}: D(s) = prod (1 + s / r_i)
  const auto spread = hp.coefficients(hp.spread_roots(4.0, 2.0));
  std::vector<double> product{1.0};
  for (double e : {-1.5, -0.5, 0.5, 1.5}) {
    const std::vector<double> factor{1.0, 1.0 / (4.0 * std::pow(2.0, e))};
    product = lti::poly_multiply(product, factor);
  }
  for (std::size_t i = 0; i < spread.size(); ++i) CHECK(spread[i] == doctest::Approx(product[i]).epsilon(1e-12));
}

TEST_CASE("loss gradient matches central differences") {
  const Grid g = Grid::covering(40.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 7), g);
  const Signal target = simulate_residual(sampled(20), u) + 0.3 * u;
  for (std::uint64_t seed : {21ULL, 22ULL}) {
    const ResidualParams p = sampled(seed);
    const auto grad = residual_loss_gradient(p, u, target, 5.0);
    auto loss = [&](const ResidualParams& q) { return residual_loss_gradient(q, u, target, 5.0).loss; };
    for (int d = 0; d < p.m; ++d) {
      const double h = 1e-6 * std::max(1.0, std::abs(p.a[static_cast<std::size_t>(d)]));
      ResidualParams up = p;
      ResidualParams down = p;
      up.a[static_cast<std::size_t>(d)] += h;
      down.a[static_cast<std::size_t>(d)] -= h;
      const double fd = (loss(up) - loss(down)) / (2.0 * h);
      CHECK(grad.grad_a[static_cast<std::size_t>(d)] == doctest::Approx(fd).epsilon(1e-4));
    }
    for (int d = 0; d < p.m; ++d) {
      for (int k = 0; k < p.n; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(p.b(d, k)));
        ResidualParams up = p;
        ResidualParams down = p;
        up.b(d, k) += h;
        down.b(d, k) -= h;
        const double fd = (loss(up) - loss(down)) / (2.0 * h);
        CHECK(grad.grad_b(d, k) == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("validation rejects unstable or malformed parameters") {
  ResidualParams p = sampled(30);
  p.validate();
  ResidualParams unstable = p;
  unstable.a = {1.0, -1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(unstable.validate(), ParameterError);
  ResidualParams wrong = p;
  wrong.b = Eigen::MatrixXd::Zero(5, 5);
  CHECK_THROWS_AS(wrong.validate(), ParameterError);
  ResidualParams zero_lead = p;
  zero_lead.a.back() = 0.0;
  CHECK_THROWS_AS(zero_lead.validate(), ParameterError);

  auto j = io::to_json(p);
  const ResidualParams back = io::residual_from_json(j);
  CHECK(back.a == p.a);
  CHECK((back.b - p.b).cwiseAbs().maxCoeff() == 0.0);
  j["A"] = unstable.a;
  CHECK_THROWS_AS(io::residual_from_json(j), ParameterError);
}

TEST_CASE("fitting a zero target returns the zero model") {
  const Grid g = Grid::covering(80.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 1), g);
  const ResidualFit fit = fit_residual(u, Signal::zeros(g), 4.0, 5, 6);
  CHECK(fit.params.b.cwiseAbs().maxCoeff() < 1e-12);
  const Signal r = simulate_residual(fit.params, u);
  for (double v : r.samples()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("fitting reproduces a target from the class") {
  const Grid g = Grid::covering(80.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 11), g);
  for (std::uint64_t seed : {40ULL, 41ULL, 42ULL}) {
    const Signal target = simulate_residual(sampled(seed), u);
    const ResidualFit fit = fit_residual(u, target, 4.0, 5, 6);
    MESSAGE("seed " << seed << ": relative error " << fit.relative_error << " after " << fit.iterations
                    << " iterations (" << fit.termination << ")");
    CHECK(fit.relative_error < 1e-3);
    CHECK(mismatch_norm(target, simulate_residual(fit.params, u)) < 1e-3);
    CHECK(lti::is_hurwitz(fit.params.a));
  }
}

TEST_CASE("fitting never increases the loss over the zero residual") {
  const Grid g = Grid::covering(80.0, 0.01);
  const Signal u = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 12), g);
  // a target outside the class: the linear part of u
  const Signal target = 0.1 * u;
  const ResidualFit fit = fit_residual(u, target, 4.0, 5, 6);
  CHECK(fit.loss <= fit.initial_loss + 1e-9);
  CHECK(fit.relative_error <= 1.0 + 1e-9);
  REQUIRE_FALSE(fit.loss_trace.empty());
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i) CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1] + 1e-15);
}
