#pragma once

#include <functional>
#include <vector>

namespace sem {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1]; cached per node count.
const QuadRule& gauss_legendre(int n);

// Gauss-Hermite rule for the weight e^{-x^2} on the whole line; cached.
const QuadRule& gauss_hermite(int n);

// integral of f over [a, b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int n);

// integral of f over [lo, hi] split at the interior breakpoints, n points
// per segment.  Breakpoints outside (lo, hi) are ignored; duplicates merged.
double integrate_segmented(const std::function<double(double)>& f, double lo,
                           double hi, std::vector<double> breakpoints, int n);

}  // namespace sem
