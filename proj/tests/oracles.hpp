#pragma once

// Test-only oracles, independent of the library's evaluation paths:
// central finite differences over plain-double functions, and a
// series/recurrence digamma used to cross-check the special functions.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

inline double fd1(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

inline double fd2(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > floor ? std::abs(a - b) / scale : 0.0;
}

// Central differences of a multivariate scalar function.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double save = x[i];
    x[i] = save + step;
    const double fp = f(x);
    x[i] = save - step;
    const double fm = f(x);
    x[i] = save;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// digamma by the classic recurrence + log-series, kept deliberately
// different from the implementation under test.
inline double digamma_reference(double x) {
  double result = 0.0;
  while (x < 20.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double ix = 1.0 / x;
  const double ix2 = ix * ix;
  return result + std::log(x) - 0.5 * ix -
         ix2 * (1.0 / 12 - ix2 * (1.0 / 120 - ix2 * (1.0 / 252 - ix2 / 240)));
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace oracles
