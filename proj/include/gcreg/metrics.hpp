#pragma once

#include <cstdint>

#include "gcreg/field.hpp"
#include "gcreg/similarity.hpp"

namespace gcreg {

/// Below this SSD the pair counts as already aligned and epsilon is 0.
inline constexpr double kIdenticalSsd = 1e-12;

struct QualityReport {
  double epsilon = 0.0;
  double min_jac = 1.0;
  std::int64_t negative_jac_count = 0;
  double ssd_before = 0.0;
  double ssd_after = 0.0;
};

/// det of [[1 + u1_x, u1_y], [u2_x, 1 + u2_y]] with the solvers' difference stencils.
inline ScalarField jacobian_det_field(const VectorField2& u) {
  const VectorField2 g1 = grad(u.x);
  const VectorField2 g2 = grad(u.y);
  ScalarField det = u.x.zeros_like();
  for (std::size_t k = 0; k < det.size(); ++k)
    det[k] = (1.0 + g1.x[k]) * (1.0 + g2.y[k]) - g1.y[k] * g2.x[k];
  return det;
}

inline QualityReport quality(const ScalarField& t, const ScalarField& r, const VectorField2& u) {
  QualityReport q;
  q.ssd_before = ssd(t, r);
  q.ssd_after = ssd(t, r, u);
  q.epsilon = q.ssd_before > kIdenticalSsd ? q.ssd_after / q.ssd_before : 0.0;
  const ScalarField det = jacobian_det_field(u);
  q.min_jac = min_value(det);
  for (double v : det.values())
    if (v <= 0.0) ++q.negative_jac_count;
  return q;
}

}  // namespace gcreg
