#include "sem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <mutex>
#include <utility>

#include "sem/errors.hpp"

namespace sem {

namespace {

// Newton iteration on the Legendre recurrence, one root per node.
QuadRule build_gauss_legendre(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
// shifts); d holds the diagonal on entry and the eigenvalues on exit.
void tridiagonal_eigenvalues(std::vector<double>& d, std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <=
            std::numeric_limits<double>::epsilon() * dd + 1e-300)
          break;
      }
      if (m != l) {
        if (iter++ == 64)
          throw NumericalError(
              "quadrature: tridiagonal eigenvalue iteration stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
}

// Orthonormal Hermite functions scaled by e^{-x^2/2} so intermediates stay
// O(1); returns {h_n(x), h_{n-1}(x)}.
std::pair<double, double> scaled_hermite(int n, double x) {
  double p1 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  double p2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 -
         std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
  }
  return {p1, p2};
}

// Golub-Welsch nodes (Jacobi matrix eigenvalues) polished by Newton steps,
// weights from the closed form 2 e^{-x^2} / (2n h_{n-1}(x)^2).
QuadRule build_gauss_hermite(int n) {
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(n) - 1);
  for (int j = 1; j < n; ++j) off.push_back(std::sqrt(0.5 * j));
  tridiagonal_eigenvalues(diag, off);

  QuadRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = diag[static_cast<std::size_t>(n - 1 - i)];  // largest first
    double pp = 0.0;
    for (int iter = 0; iter < 8; ++iter) {
      const auto [h_n, h_prev] = scaled_hermite(n, x);
      pp = std::sqrt(2.0 * n) * h_prev;
      const double dx = h_n / pp;
      x -= dx;
      if (std::fabs(dx) <= 1e-15 * (1.0 + std::fabs(x))) break;
    }
    {
      const auto [h_n, h_prev] = scaled_hermite(n, x);
      pp = std::sqrt(2.0 * n) * h_prev;
      if (!(std::fabs(h_n / pp) <= 1e-10 * (1.0 + std::fabs(x))))
        throw NumericalError(
            "quadrature::gauss_hermite: node polishing stalled");
    }
    if (n % 2 == 1 && i == half - 1) x = 0.0;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    const double w = 2.0 * std::exp(-x * x) / (pp * pp);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    rule.weights[static_cast<std::size_t>(i)] = w;
  }
  return rule;
}

std::mutex g_cache_mutex;
std::map<int, QuadRule> g_gl_cache;
std::map<int, QuadRule> g_gh_cache;

}  // namespace

const QuadRule& gauss_legendre(int n) {
  if (n < 1) throw ConfigError("quadrature::gauss_legendre: need n >= 1");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_gl_cache.find(n);
  if (it == g_gl_cache.end())
    it = g_gl_cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

const QuadRule& gauss_hermite(int n) {
  if (n < 1) throw ConfigError("quadrature::gauss_hermite: need n >= 1");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_gh_cache.find(n);
  if (it == g_gh_cache.end())
    it = g_gh_cache.emplace(n, build_gauss_hermite(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int n) {
  const QuadRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double len = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mid + len * rule.nodes[i]);
  return sum * len;
}

double integrate_segmented(const std::function<double(double)>& f, double lo,
                           double hi, std::vector<double> breakpoints, int n) {
  if (!(hi > lo))
    throw ConfigError("quadrature::integrate_segmented: empty interval");
  breakpoints.erase(
      std::remove_if(breakpoints.begin(), breakpoints.end(),
                     [&](double b) { return !(b > lo) || !(b < hi); }),
      breakpoints.end());
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());
  double sum = 0.0;
  double left = lo;
  for (double b : breakpoints) {
    sum += integrate_gl(f, left, b, n);
    left = b;
  }
  sum += integrate_gl(f, left, hi, n);
  return sum;
}

}  // namespace sem
