#pragma once

// Comparison models: linear curvature (biharmonic), mean curvature, demons.
// All drivers evaluate the data term on intensities divided by
// intensity_scale, like register_gc.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "gcreg/curvature.hpp"
#include "gcreg/field.hpp"
#include "gcreg/registration.hpp"
#include "gcreg/similarity.hpp"

namespace gcreg {

struct TimeMarchConfig {
  double gamma = 0.1;
  double dt = 100.0;
  int max_iter = 500;
  double tol = 1e-5;
  int inner_iters = 30;  // damped Jacobi sweeps per LC step
  double intensity_scale = 255.0;

  void validate() const {
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    if (inner_iters < 1) throw Error(ErrorKind::InvalidArgument, "inner_iters must be >= 1");
    if (!(intensity_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "intensity_scale must be positive");
  }
};

/// Tuned settings for the shipped fixtures. Explicit MC marching is stable
/// for roughly dt * gamma < 0.1.
inline TimeMarchConfig lc_defaults() { return {0.1, 100.0, 300, 1e-5}; }
inline TimeMarchConfig mc_defaults() { return {0.01, 10.0, 1000, 1e-5}; }

struct DemonConfig {
  double noise_ratio = 1e-3;
  double smooth_sigma = 1.5;
  bool diffeomorphic = true;
  int squaring_steps = 6;
  int max_iter = 100;
  double tol = 1e-5;
  double intensity_scale = 255.0;

  void validate() const {
    if (!(noise_ratio > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_ratio must be positive");
    if (!(smooth_sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "smooth_sigma must be positive");
    if (squaring_steps < 0) throw Error(ErrorKind::InvalidArgument, "squaring_steps must be >= 0");
    if (diffeomorphic && squaring_steps < 4)
      throw Error(ErrorKind::InvalidArgument, "diffeomorphic mode needs squaring_steps >= 4");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    if (!(intensity_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "intensity_scale must be positive");
  }
};

namespace detail {

inline double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline double relative_change(const VectorField2& next, const VectorField2& prev) {
  const double d = norm2(next - prev);
  const double n = norm2(next);
  return n > 1e-12 ? d / n : d;
}

// Applies |L| (entrywise absolute Laplacian) to f.
inline ScalarField abs_laplacian(const ScalarField& f, const GridStencils& st) {
  ScalarField out = f.zeros_like();
  for (int j = 0; j < f.height(); ++j)
    for (int i = 0; i < f.width(); ++i) {
      const auto& bx = st.lap_x(i);
      const auto& by = st.lap_y(j);
      double s = std::abs(bx[2] + by[2]) * f(i, j);
      for (int off = -2; off <= 2; ++off) {
        if (off == 0) continue;
        const std::size_t o = static_cast<std::size_t>(off + 2);
        if (bx[o] != 0.0) s += std::abs(bx[o]) * f(i + off, j);
        if (by[o] != 0.0) s += std::abs(by[o]) * f(i, j + off);
      }
      out(i, j) = s;
    }
  return out;
}

// Diagonal of B = L P L, using the symmetry of L: B_pp = sum_q P_q L_pq^2.
inline ScalarField biharmonic_diagonal(const ScalarField& like, const GridStencils& st) {
  const ScalarField p = interior_mask(like, 2);
  ScalarField out = like.zeros_like();
  for (int j = 0; j < like.height(); ++j)
    for (int i = 0; i < like.width(); ++i) {
      const auto& bx = st.lap_x(i);
      const auto& by = st.lap_y(j);
      const double c = bx[2] + by[2];
      double s = p(i, j) * c * c;
      for (int off = -2; off <= 2; ++off) {
        if (off == 0) continue;
        const std::size_t o = static_cast<std::size_t>(off + 2);
        if (bx[o] != 0.0) s += p(i + off, j) * bx[o] * bx[o];
        if (by[o] != 0.0) s += p(i, j + off) * by[o] * by[o];
      }
      out(i, j) = s;
    }
  return out;
}

}  // namespace detail

/// Solves (I + c B) v = rhs, B = L P L, by damped Jacobi started from v.
/// The damping is 1 / (Gershgorin bound of D^-1 A), which keeps the iteration
/// contractive for this SPD system.
class BiharmonicJacobi {
 public:
  BiharmonicJacobi(const ScalarField& like, double c)
      : st_(like), c_(c), diag_(detail::biharmonic_diagonal(like, st_)) {
    // Row sums of |B| are bounded by |L| P |L| 1.
    ScalarField rows = detail::abs_laplacian(ScalarField(like.width(), like.height(), like.spacing(), 1.0), st_);
    const ScalarField p = interior_mask(like, 2);
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] *= p[k];
    rows = detail::abs_laplacian(rows, st_);
    double bound = 1.0;
    for (std::size_t k = 0; k < diag_.size(); ++k) {
      diag_[k] = 1.0 + c_ * diag_[k];
      bound = std::max(bound, (1.0 + c_ * rows[k]) / diag_[k]);
    }
    omega_ = 1.0 / bound;
  }

  double omega() const noexcept { return omega_; }
  const GridStencils& stencils() const noexcept { return st_; }

  ScalarField apply(const ScalarField& v) const { return v + c_ * biharmonic(v, st_); }

  void solve(const ScalarField& rhs, ScalarField& v, int iters) const {
    for (int it = 0; it < iters; ++it) {
      const ScalarField r = rhs - apply(v);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += omega_ * r[k] / diag_[k];
    }
  }

 private:
  GridStencils st_;
  double c_;
  ScalarField diag_;
  double omega_ = 1.0;
};

// ---------------------------------------------------------------------------
// Linear curvature

inline RegistrationResult register_lc(const ScalarField& template_image, const ScalarField& reference,
                                      const TimeMarchConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  detail::require_registrable(template_image, reference);
  const auto start = std::chrono::steady_clock::now();
  const ScalarField t = (1.0 / cfg.intensity_scale) * template_image;
  const ScalarField ref = (1.0 / cfg.intensity_scale) * reference;

  VectorField2 u = VectorField2::zeros_like(t);
  std::vector<double> changes, ssds;
  if (ssd(template_image, reference) >= kIdenticalSsd) {
    const BiharmonicJacobi solver(t, cfg.dt * cfg.gamma);
    for (int k = 1; k <= cfg.max_iter; ++k) {
      const VectorField2 f = force(t, ref, u);
      VectorField2 next = u;
      solver.solve(u.x - cfg.dt * f.x, next.x, cfg.inner_iters);
      solver.solve(u.y - cfg.dt * f.y, next.y, cfg.inner_iters);
      detail::require_finite(next, "displacement", k);
      const double change = detail::relative_change(next, u);
      u = std::move(next);
      const double cur = ssd(template_image, reference, u);
      changes.push_back(change);
      ssds.push_back(cur);
      if (observer) observer(k, change, cur);
      if (change < cfg.tol) break;
    }
  }

  RegistrationResult out = detail::finish_result(template_image, reference, std::move(u));
  out.identical_inputs = changes.empty();
  out.iterations = static_cast<int>(changes.size());
  out.residual_history = std::move(changes);
  out.ssd_history = std::move(ssds);
  out.wall_time_s = detail::elapsed_s(start);
  return out;
}

// ---------------------------------------------------------------------------
// Mean curvature

/// L2 gradient density of the mean-curvature energy 1/2 sum iota^2:
///   div( grad iota / N - (grad u . grad iota) grad u / N^3 ),  N = sqrt(1 + |grad u|^2).
inline ScalarField mc_operator(const ScalarField& u) {
  const ScalarField iota = mean_curvature(u).value;
  const VectorField2 gi = grad(iota);
  const VectorField2 gu = grad(u);
  VectorField2 flux = VectorField2::zeros_like(u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double n2 = 1.0 + gu.x[k] * gu.x[k] + gu.y[k] * gu.y[k];
    const double n = std::sqrt(n2);
    const double proj = (gu.x[k] * gi.x[k] + gu.y[k] * gi.y[k]) / (n2 * n);
    flux.x[k] = gi.x[k] / n - proj * gu.x[k];
    flux.y[k] = gi.y[k] / n - proj * gu.y[k];
  }
  return div(flux);
}

/// gamma * mc_operator(u_l) + f_l(u), per component.
inline VectorField2 mc_residual(const ScalarField& t, const ScalarField& r, const VectorField2& u, double gamma) {
  VectorField2 res = force(t, r, u);
  res.x += gamma * mc_operator(u.x);
  res.y += gamma * mc_operator(u.y);
  return res;
}

inline RegistrationResult register_mc(const ScalarField& template_image, const ScalarField& reference,
                                      const TimeMarchConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  detail::require_registrable(template_image, reference);
  const auto start = std::chrono::steady_clock::now();
  const ScalarField t = (1.0 / cfg.intensity_scale) * template_image;
  const ScalarField ref = (1.0 / cfg.intensity_scale) * reference;

  VectorField2 u = VectorField2::zeros_like(t);
  std::vector<double> changes, ssds;
  if (ssd(template_image, reference) >= kIdenticalSsd) {
    for (int k = 1; k <= cfg.max_iter; ++k) {
      VectorField2 next = u - cfg.dt * mc_residual(t, ref, u, cfg.gamma);
      detail::require_finite(next, "displacement", k);
      const double change = detail::relative_change(next, u);
      u = std::move(next);
      const double cur = ssd(template_image, reference, u);
      changes.push_back(change);
      ssds.push_back(cur);
      if (observer) observer(k, change, cur);
      if (change < cfg.tol) break;
    }
  }

  RegistrationResult out = detail::finish_result(template_image, reference, std::move(u));
  out.identical_inputs = changes.empty();
  out.iterations = static_cast<int>(changes.size());
  out.residual_history = std::move(changes);
  out.ssd_history = std::move(ssds);
  out.wall_time_s = detail::elapsed_s(start);
  return out;
}

// ---------------------------------------------------------------------------
// Demons

/// Raw per-node demon update at the current estimate u_tilde:
///   J = -(grad R + grad T(x + u)) / 2,  u = -(R - T(x + u)) J / (|J|^2 + c).
/// Images are used as given; c is in their squared intensity units.
inline VectorField2 demon_update(const ScalarField& t, const ScalarField& r, const VectorField2& u_tilde,
                                 double noise_ratio) {
  t.require_same_shape(r);
  const ScalarField tw = sample_warped(t, u_tilde);
  const VectorField2 gt = warped_gradient(t, u_tilde);
  const VectorField2 gr = grad(r);
  VectorField2 out = VectorField2::zeros_like(t);
  for (std::size_t k = 0; k < tw.size(); ++k) {
    const double jx = -0.5 * (gr.x[k] + gt.x[k]);
    const double jy = -0.5 * (gr.y[k] + gt.y[k]);
    const double s = -(r[k] - tw[k]) / (jx * jx + jy * jy + noise_ratio);
    out.x[k] = s * jx;
    out.y[k] = s * jy;
  }
  return out;
}

/// u(x) + v(x + u(x)): displacement of (id + v) o (id + u).
inline VectorField2 compose(const VectorField2& u, const VectorField2& v) {
  VectorField2 out{sample_warped(v.x, u), sample_warped(v.y, u)};
  out += u;
  return out;
}

/// Displacement of exp(v) by scaling and squaring.
inline VectorField2 exp_field(const VectorField2& v, int squaring_steps) {
  VectorField2 e = std::ldexp(1.0, -squaring_steps) * v;
  for (int s = 0; s < squaring_steps; ++s) e = compose(e, e);
  return e;
}

/// One demon iteration: smoothed update added to u_tilde. Intensities are
/// divided by cfg.intensity_scale first.
inline VectorField2 demon_step(const ScalarField& t, const ScalarField& r, const VectorField2& u_tilde,
                               const DemonConfig& cfg) {
  cfg.validate();
  const double inv = 1.0 / cfg.intensity_scale;
  const VectorField2 upd = gaussian_smooth(demon_update(inv * t, inv * r, u_tilde, cfg.noise_ratio), cfg.smooth_sigma);
  return u_tilde + upd;
}

inline RegistrationResult register_demon(const ScalarField& template_image, const ScalarField& reference,
                                         const DemonConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  detail::require_registrable(template_image, reference);
  const auto start = std::chrono::steady_clock::now();
  const ScalarField t = (1.0 / cfg.intensity_scale) * template_image;
  const ScalarField ref = (1.0 / cfg.intensity_scale) * reference;

  VectorField2 u = VectorField2::zeros_like(t);
  VectorField2 v = u;  // stationary velocity, diffeomorphic mode only
  std::vector<double> changes, ssds;
  double prev = ssd(template_image, reference);
  if (prev >= kIdenticalSsd) {
    for (int k = 1; k <= cfg.max_iter; ++k) {
      const VectorField2 upd = gaussian_smooth(demon_update(t, ref, u, cfg.noise_ratio), cfg.smooth_sigma);
      if (cfg.diffeomorphic) {
        v += upd;
        u = exp_field(v, cfg.squaring_steps);
      } else {
        u += upd;
      }
      detail::require_finite(u, "displacement", k);
      const double cur = ssd(template_image, reference, u);
      const double change = std::abs(prev - cur) / std::max(prev, kIdenticalSsd);
      prev = cur;
      changes.push_back(change);
      ssds.push_back(cur);
      if (observer) observer(k, change, cur);
      if (change < cfg.tol) break;
    }
  }

  RegistrationResult out = detail::finish_result(template_image, reference, std::move(u));
  out.identical_inputs = changes.empty();
  out.iterations = static_cast<int>(changes.size());
  out.residual_history = std::move(changes);
  out.ssd_history = std::move(ssds);
  out.wall_time_s = detail::elapsed_s(start);
  return out;
}

}  // namespace gcreg
