#pragma once

#include "gcreg/field.hpp"

namespace gcreg {

/// 1/2 h^2 sum (T(x+u) - R)^2.
inline double ssd(const ScalarField& t, const ScalarField& r, const VectorField2& u) {
  t.require_same_shape(r);
  const ScalarField tw = sample_warped(t, u);
  double s = 0.0;
  for (std::size_t k = 0; k < tw.size(); ++k) {
    const double d = tw[k] - r[k];
    s += d * d;
  }
  return 0.5 * t.spacing() * t.spacing() * s;
}

inline double ssd(const ScalarField& t, const ScalarField& r) {
  return ssd(t, r, VectorField2::zeros_like(t));
}

/// (T(x+u) - R) grad T(x+u), the L2 gradient density of ssd.
inline VectorField2 force(const ScalarField& t, const ScalarField& r, const VectorField2& u) {
  t.require_same_shape(r);
  const ScalarField residual = sample_warped(t, u) - r;
  VectorField2 g = warped_gradient(t, u);
  for (std::size_t k = 0; k < residual.size(); ++k) {
    g.x[k] *= residual[k];
    g.y[k] *= residual[k];
  }
  return g;
}

/// Gauss-Newton blocks sigma_lm = (d_l T)(d_m T) at x + u. Each nodal block is
/// the outer product of the warped gradient, hence symmetric PSD of rank <= 1.
struct ForceLinearization {
  ScalarField sigma11;
  ScalarField sigma12;
  ScalarField sigma21;
  ScalarField sigma22;
};

inline ForceLinearization linearize_force(const ScalarField& t, const VectorField2& u) {
  const VectorField2 g = warped_gradient(t, u);
  auto mul = [](double a, double b) { return a * b; };
  ScalarField s12 = map_nodes(g.x, g.y, mul);
  ScalarField s21 = s12;
  return {map_nodes(g.x, g.x, mul), std::move(s12), std::move(s21), map_nodes(g.y, g.y, mul)};
}

}  // namespace gcreg
