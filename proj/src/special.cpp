#include "pinnfl/special.hpp"

#include <cmath>

namespace pinnfl {
namespace {

// Bernoulli numbers B_2, B_4, ..., B_14 for the Stirling tails.
constexpr double kB[7] = {1.0 / 6,  -1.0 / 30, 1.0 / 42,  -1.0 / 30,
                          5.0 / 66, -691.0 / 2730, 7.0 / 6};

constexpr double kAsymptotic = 12.0;

}  // namespace

double digamma(double x) {
  double acc = 0.0;
  while (x < kAsymptotic) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_2k / (2k x^{2k})
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv2;
  for (int k = 0; k < 7; ++k) {
    series += kB[k] / (2.0 * (k + 1)) * p;
    p *= inv2;
  }
  return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  double acc = 0.0;
  while (x < kAsymptotic) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  // psi'(x) ~ 1/x + 1/(2x^2) + sum B_2k / x^{2k+1}
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv * inv2;
  for (int k = 0; k < 7; ++k) {
    series += kB[k] * p;
    p *= inv2;
  }
  return acc + inv + 0.5 * inv2 + series;
}

double polygamma2(double x) {
  double acc = 0.0;
  while (x < kAsymptotic) {
    acc -= 2.0 / (x * x * x);
    x += 1.0;
  }
  // psi''(x) ~ -1/x^2 - 1/x^3 - sum (2k+1) B_2k / x^{2k+2}
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv2 * inv2;
  for (int k = 0; k < 7; ++k) {
    series += (2.0 * k + 3.0) * kB[k] * p;
    p *= inv2;
  }
  return acc - inv2 - inv * inv2 - series;
}

}  // namespace pinnfl
