#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "greybox/excitation.hpp"

using namespace greybox;

namespace {

// Asymptotic Kolmogorov tail P(sqrt(n) D > x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_tail(double x) {
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) sum += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

TEST_CASE("sinusoid samples") {
  const Grid g = Grid::covering(20.0, 0.01);
  CHECK(sinusoid(ExcitationSpec::make_sinusoid(1.0, 1.0, 0.0), g)[0] == 1.0);
  CHECK(std::abs(sinusoid(ExcitationSpec::make_sinusoid(4.0, 1.0, std::numbers::pi / 2), g)[0]) < 1e-15);
  const Signal u = sinusoid(ExcitationSpec::make_sinusoid(10.0, 1.0), g);
  double peak = 0.0;
  for (double v : u.samples()) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 10.0);
  CHECK(peak == doctest::Approx(10.0));
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(ExcitationSpec::make_sinusoid(0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(ExcitationSpec::make_sinusoid(1.0, -1.0), ArgumentError);
  CHECK_THROWS_AS(ExcitationSpec::make_sinusoid(1.0, 1.0, 2.0 * std::numbers::pi), ArgumentError);
  CHECK_THROWS_AS(ExcitationSpec::make_pseudorandom(1.0, 1, 0.0), ArgumentError);
  CHECK_THROWS_AS(sinusoid(ExcitationSpec::make_pseudorandom(1.0, 1), Grid::covering(1.0, 0.1)), ArgumentError);
}

TEST_CASE("pseudorandom input is bounded, deterministic, and interpolates its nodes") {
  const auto spec = ExcitationSpec::make_pseudorandom(4.0, 42);
  const Grid g = Grid::covering(80.0, 0.01);
  const Signal a = pseudorandom(spec, g);
  const Signal b = pseudorandom(spec, g);
  CHECK(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
  for (double v : a.samples()) CHECK(std::abs(v) <= 4.0);

  const auto nodes = pseudorandom_nodes(spec, 80.0);
  for (std::size_t j = 0; j * 80 < a.size(); ++j) CHECK(a[j * 80] == doctest::Approx(nodes[j]).epsilon(1e-12));
  // midway between two nodes
  CHECK(a[40] == doctest::Approx(0.5 * (nodes[0] + nodes[1])).epsilon(1e-12));

  const Signal c = pseudorandom(ExcitationSpec::make_pseudorandom(4.0, 43), g);
  CHECK_FALSE(std::equal(a.samples().begin(), a.samples().end(), c.samples().begin()));
}

TEST_CASE("node mean obeys the central limit bound") {
  const double alpha = 4.0;
  const auto spec = ExcitationSpec::make_pseudorandom(alpha, 2024);
  const auto nodes = pseudorandom_nodes(spec, 0.8 * (100000 - 2));
  REQUIRE(nodes.size() == 100000);
  double mean = 0.0;
  for (double v : nodes) mean += v;
  mean /= static_cast<double>(nodes.size());
  CHECK(std::abs(mean) <= 3.0 * alpha / std::sqrt(12.0 * 1e5));
}

TEST_CASE("nodes pass a Kolmogorov-Smirnov test against the uniform law") {
  const double alpha = 10.0;
  for (std::uint64_t seed : {1ULL, 2ULL, 1001ULL}) {
    auto nodes = pseudorandom_nodes(ExcitationSpec::make_pseudorandom(alpha, seed), 0.8 * (10000 - 2));
    REQUIRE(nodes.size() == 10000);
    std::sort(nodes.begin(), nodes.end());
    const double n = static_cast<double>(nodes.size());
    double d = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double cdf = (nodes[i] + alpha) / (2.0 * alpha);
      d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    const double p_value = kolmogorov_tail(std::sqrt(n) * d);
    CHECK(p_value > 1e-3);
  }
}

TEST_CASE("uniform stream draws lie in the unit interval") {
  UniformStream s(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
