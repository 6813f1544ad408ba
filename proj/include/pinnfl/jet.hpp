#pragma once

#include <array>
#include <cmath>

namespace pinnfl {

// Degree-2 truncated Taylor value in up to 3 seed directions.
// grad[i] holds the first derivative along seed i, hess the second
// derivatives in upper-triangular storage. Slot order is chosen so the
// active slots for d seeds form a contiguous prefix:
//   (0,0), (0,1), (1,1), (0,2), (1,2), (2,2)
struct Jet2 {
  double v = 0.0;
  std::array<double, 3> g{};
  std::array<double, 6> h{};
};

constexpr int kMaxSeeds = 3;

// Upper-triangular slot for (i, j) with i <= j.
constexpr int hess_slot(int i, int j) { return j * (j + 1) / 2 + i; }

// Slot for an unordered pair.
constexpr int hess_slot_sym(int i, int j) {
  return i <= j ? hess_slot(i, j) : hess_slot(j, i);
}

constexpr int hess_count(int d) { return d * (d + 1) / 2; }

inline bool jet_finite(const Jet2& a, int d) {
  if (!std::isfinite(a.v)) return false;
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(a.g[i])) return false;
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s)
    if (!std::isfinite(a.h[s])) return false;
  return true;
}

}  // namespace pinnfl
