#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "gcreg/field.hpp"

namespace gcreg::test {

template <typename Fn>
ScalarField field_xy(int n, Fn&& fn, double h = 1.0) {
  return ScalarField::from_function(n, n, h, [&](int i, int j) { return fn(i * h, j * h); });
}

inline ScalarField random_field(int w, int h, unsigned seed, double amp = 1.0, double spacing = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  ScalarField f(w, h, spacing);
  for (double& v : f.values()) v = dist(gen);
  return f;
}

inline ScalarField smooth_random(int n, unsigned seed, double amp, double sigma = 2.0) {
  return gaussian_smooth(random_field(n, n, seed, amp), sigma);
}

/// Random values on nodes at least `ring` away from the border, 0 elsewhere.
inline ScalarField interior_random(int n, unsigned seed, int ring = 2) {
  ScalarField f = random_field(n, n, seed);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i < ring || j < ring || i >= n - ring || j >= n - ring) f(i, j) = 0.0;
  return f;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

/// max |f| over nodes at least `ring` away from the border.
inline double max_abs_inner(const ScalarField& f, int ring) {
  double m = 0.0;
  for (int j = ring; j < f.height() - ring; ++j)
    for (int i = ring; i < f.width() - ring; ++i) m = std::max(m, std::abs(f(i, j)));
  return m;
}

}  // namespace gcreg::test
