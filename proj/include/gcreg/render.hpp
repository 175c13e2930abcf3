#pragma once

#include <algorithm>
#include <cmath>

#include "gcreg/field.hpp"

namespace gcreg {

namespace detail {

inline void plot_segment(ScalarField& img, double x0, double y0, double x1, double y1) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int samples = std::max(1, static_cast<int>(std::ceil(4.0 * len)));
  for (int s = 0; s <= samples; ++s) {
    const double t = static_cast<double>(s) / samples;
    const long i = std::lround(x0 + t * (x1 - x0));
    const long j = std::lround(y0 + t * (y1 - y0));
    if (i >= 0 && j >= 0 && i < img.width() && j < img.height()) img(static_cast<int>(i), static_cast<int>(j)) = 0.0;
  }
}

}  // namespace detail

/// White canvas with black polylines through x + u(x) along every stride-th
/// grid row and column. Segments are drawn by dense point sampling.
inline ScalarField render_deformed_grid(const VectorField2& u, int stride) {
  if (stride < 2) throw Error(ErrorKind::InvalidArgument, "grid stride must be >= 2");
  const ScalarField& ux = u.x;
  const double inv_h = 1.0 / ux.spacing();
  ScalarField img(ux.width(), ux.height(), ux.spacing(), 255.0);
  auto px = [&](int i, int j) { return i + u.x(i, j) * inv_h; };
  auto py = [&](int i, int j) { return j + u.y(i, j) * inv_h; };

  for (int j = 0; j < ux.height(); j += stride)
    for (int i = 0; i + 1 < ux.width(); ++i) detail::plot_segment(img, px(i, j), py(i, j), px(i + 1, j), py(i + 1, j));
  for (int i = 0; i < ux.width(); i += stride)
    for (int j = 0; j + 1 < ux.height(); ++j) detail::plot_segment(img, px(i, j), py(i, j), px(i, j + 1), py(i, j + 1));
  return img;
}

/// 128 + (a - b) / 2, so mid-gray means no difference.
inline ScalarField difference_image(const ScalarField& a, const ScalarField& b) {
  return map_nodes(a, b, [](double x, double y) { return 128.0 + 0.5 * (x - y); });
}

}  // namespace gcreg
