#ifndef GREYBOX_GOLDEN_SECTION_HPP
#define GREYBOX_GOLDEN_SECTION_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "greybox/error.hpp"

namespace greybox {

struct GoldenSectionStep {
  double lo = 0.0;
  double hi = 0.0;
  double best_x = 0.0;
  double best_f = 0.0;
};

struct GoldenSectionResult {
  double x = 0.0;
  double f = 0.0;
  std::vector<GoldenSectionStep> trace;
};

// Golden-section search on [lo, hi] until the bracket is narrower than tol.
template <typename F>
GoldenSectionResult golden_section_minimize(F&& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ArgumentError("golden section: empty bracket");
  if (!(tol > 0.0)) throw ArgumentError("golden section: tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  GoldenSectionResult result;
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
    const bool left = f1 < f2;
    result.trace.push_back({lo, hi, left ? x1 : x2, left ? f1 : f2});
  }
  if (f1 < f2) {
    result.x = x1;
    result.f = f1;
  } else {
    result.x = x2;
    result.f = f2;
  }
  return result;
}

}  // namespace greybox

#endif  // GREYBOX_GOLDEN_SECTION_HPP
