#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gcreg/error.hpp"

namespace gcreg {

/// Real-valued function on a uniform 2D vertex grid, stored row-major
/// (index = j * width + i, i along x, j along y). Grid step is `spacing`.
class ScalarField {
 public:
  ScalarField(int width, int height, double spacing = 1.0, double fill = 0.0)
      : width_(width), height_(height), spacing_(spacing) {
    if (width < 1 || height < 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "field must be non-empty, got " + std::to_string(width) + "x" + std::to_string(height));
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
      throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  template <typename Fn>
  static ScalarField from_function(int width, int height, double spacing, Fn&& fn) {
    ScalarField f(width, height, spacing);
    for (int j = 0; j < height; ++j)
      for (int i = 0; i < width; ++i) f(i, j) = fn(i, j);
    return f;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j) noexcept { return data_[index(i, j)]; }
  double operator()(int i, int j) const noexcept { return data_[index(i, j)]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(i);
  }

  bool same_shape(const ScalarField& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && spacing_ == other.spacing_;
  }

  ScalarField zeros_like() const { return ScalarField(width_, height_, spacing_); }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ScalarField& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

  bool operator==(const ScalarField&) const = default;

  void require_same_shape(const ScalarField& o) const {
    if (!same_shape(o)) {
      throw Error(ErrorKind::DimensionMismatch,
                  std::to_string(width_) + "x" + std::to_string(height_) + " vs " +
                      std::to_string(o.width_) + "x" + std::to_string(o.height_));
    }
  }

 private:
  int width_;
  int height_;
  double spacing_;
  std::vector<double> data_;
};

/// Pair of scalar fields on one grid: displacements, dual variables,
/// multipliers and forces all use this.
struct VectorField2 {
  ScalarField x;
  ScalarField y;

  VectorField2(ScalarField x_comp, ScalarField y_comp) : x(std::move(x_comp)), y(std::move(y_comp)) {
    x.require_same_shape(y);
  }

  static VectorField2 zeros(int width, int height, double spacing = 1.0) {
    return {ScalarField(width, height, spacing), ScalarField(width, height, spacing)};
  }
  static VectorField2 zeros_like(const ScalarField& f) { return {f.zeros_like(), f.zeros_like()}; }

  int width() const noexcept { return x.width(); }
  int height() const noexcept { return x.height(); }
  double spacing() const noexcept { return x.spacing(); }

  bool same_shape(const ScalarField& f) const noexcept { return x.same_shape(f); }

  VectorField2& operator+=(const VectorField2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  VectorField2& operator-=(const VectorField2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  VectorField2& operator*=(double s) noexcept {
    x *= s;
    y *= s;
    return *this;
  }
  friend VectorField2 operator+(VectorField2 a, const VectorField2& b) { return a += b; }
  friend VectorField2 operator-(VectorField2 a, const VectorField2& b) { return a -= b; }
  friend VectorField2 operator*(double s, VectorField2 a) { return a *= s; }
  friend VectorField2 operator-(VectorField2 a) { return a *= -1.0; }

  bool operator==(const VectorField2&) const = default;
};

// ---------------------------------------------------------------------------
// Reductions

/// Plain Euclidean inner product of node values (no h^2 weight).
inline double inner(const ScalarField& a, const ScalarField& b) {
  a.require_same_shape(b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}
inline double inner(const VectorField2& a, const VectorField2& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}
inline double norm2(const ScalarField& a) { return std::sqrt(inner(a, a)); }
inline double norm2(const VectorField2& a) { return std::sqrt(inner(a, a)); }

inline double sum(const ScalarField& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}
inline double mean(const ScalarField& a) { return sum(a) / static_cast<double>(a.size()); }
inline double min_value(const ScalarField& a) {
  return *std::min_element(a.values().begin(), a.values().end());
}
inline double max_value(const ScalarField& a) {
  return *std::max_element(a.values().begin(), a.values().end());
}
inline double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}
inline bool all_finite(const ScalarField& a) {
  return std::all_of(a.values().begin(), a.values().end(), [](double v) { return std::isfinite(v); });
}
inline bool all_finite(const VectorField2& a) { return all_finite(a.x) && all_finite(a.y); }

/// Node-wise map over one or more fields of identical shape.
template <typename Fn>
ScalarField map_nodes(const ScalarField& a, Fn&& fn) {
  ScalarField out = a.zeros_like();
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k]);
  return out;
}
template <typename Fn>
ScalarField map_nodes(const ScalarField& a, const ScalarField& b, Fn&& fn) {
  a.require_same_shape(b);
  ScalarField out = a.zeros_like();
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k], b[k]);
  return out;
}
template <typename Fn>
ScalarField map_nodes(const ScalarField& a, const ScalarField& b, const ScalarField& c, Fn&& fn) {
  a.require_same_shape(b);
  a.require_same_shape(c);
  ScalarField out = a.zeros_like();
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k], b[k], c[k]);
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional difference operators

namespace detail {

/// One row of the first-difference matrix: d[k] = c_lo * f[lo] + c_hi * f[hi].
struct DiffRow {
  int lo;
  int hi;
  double c_lo;
  double c_hi;
};

// Central differences inside, first-order one-sided rows at both ends
// (exact on linear data everywhere).
inline std::vector<DiffRow> first_difference_rows(int n, double h) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "difference operators need at least 2 nodes per axis");
  std::vector<DiffRow> rows(static_cast<std::size_t>(n));
  rows[0] = {0, 1, -1.0 / h, 1.0 / h};
  for (int k = 1; k < n - 1; ++k) rows[static_cast<std::size_t>(k)] = {k - 1, k + 1, -0.5 / h, 0.5 / h};
  rows[static_cast<std::size_t>(n - 1)] = {n - 2, n - 1, -1.0 / h, 1.0 / h};
  return rows;
}

/// Band of -G^T G for the rows above: coefficient of f[m + off], off in [-2, 2].
inline std::vector<std::array<double, 5>> laplacian_band(int n, double h) {
  const auto rows = first_difference_rows(n, h);
  std::vector<std::array<double, 5>> band(static_cast<std::size_t>(n), std::array<double, 5>{});
  for (const DiffRow& r : rows) {
    const std::array<std::pair<int, double>, 2> e{{{r.lo, r.c_lo}, {r.hi, r.c_hi}}};
    for (const auto& [m, cm] : e)
      for (const auto& [m2, cm2] : e) band[static_cast<std::size_t>(m)][static_cast<std::size_t>(m2 - m + 2)] -= cm * cm2;
  }
  return band;
}

}  // namespace detail

/// Precomputed stencils for one grid shape; reused by the iterative solvers.
class GridStencils {
 public:
  GridStencils(int width, int height, double spacing)
      : width_(width),
        height_(height),
        dx_rows_(detail::first_difference_rows(width, spacing)),
        dy_rows_(detail::first_difference_rows(height, spacing)),
        lap_x_(detail::laplacian_band(width, spacing)),
        lap_y_(detail::laplacian_band(height, spacing)) {}

  explicit GridStencils(const ScalarField& f) : GridStencils(f.width(), f.height(), f.spacing()) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<detail::DiffRow>& dx_rows() const noexcept { return dx_rows_; }
  const std::vector<detail::DiffRow>& dy_rows() const noexcept { return dy_rows_; }
  const std::array<double, 5>& lap_x(int i) const noexcept { return lap_x_[static_cast<std::size_t>(i)]; }
  const std::array<double, 5>& lap_y(int j) const noexcept { return lap_y_[static_cast<std::size_t>(j)]; }

  /// Diagonal entry of the discrete Laplacian at node (i, j).
  double laplacian_diagonal(int i, int j) const noexcept { return lap_x(i)[2] + lap_y(j)[2]; }

  /// Laplacian at (i, j) with the diagonal term left out.
  double laplacian_offdiagonal(const ScalarField& f, int i, int j) const noexcept {
    double s = 0.0;
    const auto& bx = lap_x(i);
    const auto& by = lap_y(j);
    for (int off = -2; off <= 2; ++off) {
      if (off == 0) continue;
      const double cx = bx[static_cast<std::size_t>(off + 2)];
      if (cx != 0.0) s += cx * f(i + off, j);
      const double cy = by[static_cast<std::size_t>(off + 2)];
      if (cy != 0.0) s += cy * f(i, j + off);
    }
    return s;
  }

 private:
  int width_;
  int height_;
  std::vector<detail::DiffRow> dx_rows_;
  std::vector<detail::DiffRow> dy_rows_;
  std::vector<std::array<double, 5>> lap_x_;
  std::vector<std::array<double, 5>> lap_y_;
};

// ---------------------------------------------------------------------------
// Differential operators

inline ScalarField dx(const ScalarField& f) {
  const auto rows = detail::first_difference_rows(f.width(), f.spacing());
  ScalarField out = f.zeros_like();
  for (int j = 0; j < f.height(); ++j)
    for (int i = 0; i < f.width(); ++i) {
      const auto& r = rows[static_cast<std::size_t>(i)];
      out(i, j) = r.c_lo * f(r.lo, j) + r.c_hi * f(r.hi, j);
    }
  return out;
}

inline ScalarField dy(const ScalarField& f) {
  const auto rows = detail::first_difference_rows(f.height(), f.spacing());
  ScalarField out = f.zeros_like();
  for (int j = 0; j < f.height(); ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    for (int i = 0; i < f.width(); ++i) out(i, j) = r.c_lo * f(i, r.lo) + r.c_hi * f(i, r.hi);
  }
  return out;
}

/// Negative transpose of dx: the x part of the discrete divergence.
inline ScalarField divergence_x(const ScalarField& v) {
  const auto rows = detail::first_difference_rows(v.width(), v.spacing());
  ScalarField out = v.zeros_like();
  for (int j = 0; j < v.height(); ++j)
    for (int k = 0; k < v.width(); ++k) {
      const auto& r = rows[static_cast<std::size_t>(k)];
      out(r.lo, j) -= r.c_lo * v(k, j);
      out(r.hi, j) -= r.c_hi * v(k, j);
    }
  return out;
}

/// Negative transpose of dy.
inline ScalarField divergence_y(const ScalarField& v) {
  const auto rows = detail::first_difference_rows(v.height(), v.spacing());
  ScalarField out = v.zeros_like();
  for (int k = 0; k < v.height(); ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    for (int i = 0; i < v.width(); ++i) {
      out(i, r.lo) -= r.c_lo * v(i, k);
      out(i, r.hi) -= r.c_hi * v(i, k);
    }
  }
  return out;
}

inline VectorField2 grad(const ScalarField& f) { return {dx(f), dy(f)}; }

/// Discrete divergence, defined as -grad^T so that <grad f, v> = -<f, div v>.
inline ScalarField div(const VectorField2& v) { return divergence_x(v.x) + divergence_y(v.y); }

/// div(grad f) evaluated from the precomputed 5-point band of each axis.
inline ScalarField laplacian(const ScalarField& f, const GridStencils& st) {
  ScalarField out = f.zeros_like();
  for (int j = 0; j < f.height(); ++j)
    for (int i = 0; i < f.width(); ++i)
      out(i, j) = st.laplacian_diagonal(i, j) * f(i, j) + st.laplacian_offdiagonal(f, i, j);
  return out;
}
inline ScalarField laplacian(const ScalarField& f) { return laplacian(f, GridStencils(f)); }

struct Hessian {
  ScalarField xx;
  ScalarField yy;
  ScalarField xy;
};

inline ScalarField second_x(const ScalarField& f) {
  const int w = f.width();
  const double inv_h2 = 1.0 / (f.spacing() * f.spacing());
  ScalarField out = f.zeros_like();
  for (int j = 0; j < f.height(); ++j)
    for (int i = 0; i < w; ++i) {
      const double l = f(std::max(i - 1, 0), j);
      const double r = f(std::min(i + 1, w - 1), j);
      out(i, j) = (r - 2.0 * f(i, j) + l) * inv_h2;
    }
  return out;
}

inline ScalarField second_y(const ScalarField& f) {
  const int h = f.height();
  const double inv_h2 = 1.0 / (f.spacing() * f.spacing());
  ScalarField out = f.zeros_like();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < f.width(); ++i) {
      const double d = f(i, std::max(j - 1, 0));
      const double u = f(i, std::min(j + 1, h - 1));
      out(i, j) = (u - 2.0 * f(i, j) + d) * inv_h2;
    }
  return out;
}

/// Second derivatives; xx/yy replicate-padded, xy = dy(dx f).
inline Hessian hessian(const ScalarField& f) { return {second_x(f), second_y(f), dy(dx(f))}; }

// ---------------------------------------------------------------------------
// Interpolation and warping

/// Bilinear sample at fractional index coordinates, clamped to the domain.
inline double sample_bilinear(const ScalarField& f, double xi, double yj) noexcept {
  const int w = f.width();
  const int h = f.height();
  xi = std::clamp(xi, 0.0, static_cast<double>(w - 1));
  yj = std::clamp(yj, 0.0, static_cast<double>(h - 1));
  const int i0 = static_cast<int>(std::floor(xi));
  const int j0 = static_cast<int>(std::floor(yj));
  const int i1 = std::min(i0 + 1, w - 1);
  const int j1 = std::min(j0 + 1, h - 1);
  const double tx = xi - i0;
  const double ty = yj - j0;
  const double top = f(i0, j0) + tx * (f(i1, j0) - f(i0, j0));
  const double bot = f(i0, j1) + tx * (f(i1, j1) - f(i0, j1));
  return top + ty * (bot - top);
}

/// T(x + u(x)) at every node. u is in the same physical units as the spacing.
inline ScalarField sample_warped(const ScalarField& t, const VectorField2& u) {
  t.require_same_shape(u.x);
  const double inv_h = 1.0 / t.spacing();
  ScalarField out = t.zeros_like();
  for (int j = 0; j < t.height(); ++j)
    for (int i = 0; i < t.width(); ++i)
      out(i, j) = sample_bilinear(t, i + u.x(i, j) * inv_h, j + u.y(i, j) * inv_h);
  return out;
}

/// grad(T) evaluated at x + u(x) (differentiate, then warp).
inline VectorField2 warped_gradient(const ScalarField& t, const VectorField2& u) {
  VectorField2 g = grad(t);
  return {sample_warped(g.x, u), sample_warped(g.y, u)};
}

// ---------------------------------------------------------------------------
// Smoothing

/// Separable Gaussian blur, kernel truncated at 3 sigma, replicate boundary.
inline ScalarField gaussian_smooth(const ScalarField& f, double sigma_px) {
  if (!(sigma_px > 0.0)) return f;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma_px * sigma_px));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const int w = f.width();
  const int h = f.height();
  ScalarField tmp = f.zeros_like();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k)
        s += kernel[static_cast<std::size_t>(k + radius)] * f(std::clamp(i + k, 0, w - 1), j);
      tmp(i, j) = s;
    }
  ScalarField out = f.zeros_like();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k)
        s += kernel[static_cast<std::size_t>(k + radius)] * tmp(i, std::clamp(j + k, 0, h - 1));
      out(i, j) = s;
    }
  return out;
}

inline VectorField2 gaussian_smooth(const VectorField2& v, double sigma_px) {
  return {gaussian_smooth(v.x, sigma_px), gaussian_smooth(v.y, sigma_px)};
}

}  // namespace gcreg
