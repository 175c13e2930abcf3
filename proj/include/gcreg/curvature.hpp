#pragma once

#include <cmath>

#include "gcreg/field.hpp"

namespace gcreg {

enum class CurvatureKind { gaussian, mean };

struct CurvatureField {
  ScalarField value;
  CurvatureKind kind;
};

/// 1 on nodes at least `ring` steps away from every edge, 0 elsewhere.
inline ScalarField interior_mask(const ScalarField& like, int ring) {
  ScalarField m = like.zeros_like();
  for (int j = ring; j < like.height() - ring; ++j)
    for (int i = ring; i < like.width() - ring; ++i) m(i, j) = 1.0;
  return m;
}

namespace detail {
inline double sign0(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

/// Signed Gaussian curvature of the graph z = u(x, y):
///   (u_xx u_yy - u_xy^2) / (1 + u_x^2 + u_y^2)^2.
/// Second differences on the outermost ring would read replicate padding,
/// so the ring carries 0.
inline CurvatureField gaussian_curvature(const ScalarField& u) {
  const Hessian h = hessian(u);
  const VectorField2 g = grad(u);
  ScalarField k = u.zeros_like();
  for (int j = 1; j < u.height() - 1; ++j)
    for (int i = 1; i < u.width() - 1; ++i) {
      const double n = 1.0 + g.x(i, j) * g.x(i, j) + g.y(i, j) * g.y(i, j);
      k(i, j) = (h.xx(i, j) * h.yy(i, j) - h.xy(i, j) * h.xy(i, j)) / (n * n);
    }
  return {std::move(k), CurvatureKind::gaussian};
}

/// div(grad u / sqrt(1 + |grad u|^2)) in non-divergence form:
///   ((1 + u_y^2) u_xx - 2 u_x u_y u_xy + (1 + u_x^2) u_yy) / (1 + |grad u|^2)^(3/2).
/// Zero on the outermost ring, as for gaussian_curvature.
inline CurvatureField mean_curvature(const ScalarField& u) {
  const Hessian h = hessian(u);
  const VectorField2 g = grad(u);
  ScalarField k = u.zeros_like();
  for (int j = 1; j < u.height() - 1; ++j)
    for (int i = 1; i < u.width() - 1; ++i) {
      const double ux = g.x(i, j);
      const double uy = g.y(i, j);
      const double n = 1.0 + ux * ux + uy * uy;
      k(i, j) = ((1.0 + uy * uy) * h.xx(i, j) - 2.0 * ux * uy * h.xy(i, j) + (1.0 + ux * ux) * h.yy(i, j)) /
                (n * std::sqrt(n));
    }
  return {std::move(k), CurvatureKind::mean};
}

// ---------------------------------------------------------------------------
// Regularization energies. All carry the h^2 cell weight.

inline double gc_energy(const ScalarField& u) {
  const ScalarField k = gaussian_curvature(u).value;
  double s = 0.0;
  for (double v : k.values()) s += std::abs(v);
  return u.spacing() * u.spacing() * s;
}
inline double gc_energy(const VectorField2& u) { return gc_energy(u.x) + gc_energy(u.y); }

/// Laplacian with its two outer rings zeroed. Those rings are where the
/// Neumann stencil sees boundary flux, so affine fields map to exactly 0.
inline ScalarField masked_laplacian(const ScalarField& u, const GridStencils& st) {
  ScalarField l = laplacian(u, st);
  const ScalarField m = interior_mask(u, 2);
  for (std::size_t k = 0; k < l.size(); ++k) l[k] *= m[k];
  return l;
}

inline double lc_energy(const ScalarField& u) {
  const ScalarField l = masked_laplacian(u, GridStencils(u));
  return u.spacing() * u.spacing() * inner(l, l);
}
inline double lc_energy(const VectorField2& u) { return lc_energy(u.x) + lc_energy(u.y); }

/// L P L u with P the interior mask: half the gradient density of lc_energy.
/// Imposes Laplacian = 0 on the boundary rings and zero flux of it.
inline ScalarField biharmonic(const ScalarField& u, const GridStencils& st) {
  return laplacian(masked_laplacian(u, st), st);
}
inline ScalarField biharmonic(const ScalarField& u) { return biharmonic(u, GridStencils(u)); }

inline double mc_energy(const ScalarField& u) {
  const ScalarField k = mean_curvature(u).value;
  return u.spacing() * u.spacing() * 0.5 * inner(k, k);
}
inline double mc_energy(const VectorField2& u) { return mc_energy(u.x) + mc_energy(u.y); }

// ---------------------------------------------------------------------------
// Euler-Lagrange operator of the Gaussian-curvature energy

/// Pieces of the first variation of sum |K| / N^2, per unit cell area.
/// `anisotropic` is div(4 |K| grad u / N^3); `b1`, `b2` are the divergences of
/// the x- and y-oriented second-order flux terms. total = anisotropic + b1 + b2.
struct GcOperator {
  ScalarField anisotropic;
  ScalarField b1;
  ScalarField b2;
  ScalarField total;
};

/// gamma times the exact discrete gradient of gc_energy(u) divided by h^2.
inline GcOperator gc_regularizer_operator(const ScalarField& u, double gamma) {
  const Hessian h = hessian(u);
  const VectorField2 g = grad(u);
  ScalarField w = u.zeros_like();   // s / N^2 on interior nodes
  ScalarField fx = u.zeros_like();  // 4 s K u_x / N^3
  ScalarField fy = u.zeros_like();
  ScalarField wxy = u.zeros_like();
  ScalarField wyy = u.zeros_like();
  ScalarField wxx = u.zeros_like();
  for (int j = 1; j < u.height() - 1; ++j)
    for (int i = 1; i < u.width() - 1; ++i) {
      const double n = 1.0 + g.x(i, j) * g.x(i, j) + g.y(i, j) * g.y(i, j);
      const double k = h.xx(i, j) * h.yy(i, j) - h.xy(i, j) * h.xy(i, j);
      const double s = detail::sign0(k);
      w(i, j) = s / (n * n);
      fx(i, j) = 4.0 * s * k * g.x(i, j) / (n * n * n);
      fy(i, j) = 4.0 * s * k * g.y(i, j) / (n * n * n);
      wxx(i, j) = w(i, j) * h.xx(i, j);
      wyy(i, j) = w(i, j) * h.yy(i, j);
      wxy(i, j) = w(i, j) * h.xy(i, j);
    }
  // second_x / second_y are symmetric matrices; (dy dx)^T = divergence_x o divergence_y.
  const ScalarField cross = divergence_x(divergence_y(wxy));
  GcOperator op{divergence_x(fx) + divergence_y(fy), second_x(wyy) - cross, second_y(wxx) - cross,
                u.zeros_like()};
  op.anisotropic *= gamma;
  op.b1 *= gamma;
  op.b2 *= gamma;
  op.total = op.anisotropic + op.b1 + op.b2;
  return op;
}

// ---------------------------------------------------------------------------
// Diffusion flows

struct FlowStepResult {
  ScalarField field;
  bool non_finite = false;  // step blew up; `field` holds the unchanged input
};

/// One explicit Euler step of u_t = div(|GC(u)| grad u) in flux form.
inline FlowStepResult gc_flow_step(const ScalarField& u, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const ScalarField kappa = map_nodes(gaussian_curvature(u).value, [](double v) { return std::abs(v); });
  const VectorField2 g = grad(u);
  const VectorField2 flux{map_nodes(kappa, g.x, [](double k, double d) { return k * d; }),
                          map_nodes(kappa, g.y, [](double k, double d) { return k * d; })};
  ScalarField next = u + dt * div(flux);
  if (!all_finite(next)) return {u, true};
  return {std::move(next), false};
}

/// Regularized total variation h^2 sum sqrt(|grad u|^2 + eps^2); tv_flow_step
/// is a gradient-descent step on it.
inline double tv_energy(const ScalarField& u, double eps) {
  const VectorField2 g = grad(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::sqrt(g.x[k] * g.x[k] + g.y[k] * g.y[k] + eps * eps);
  return u.spacing() * u.spacing() * s;
}

/// One explicit Euler step of u_t = div(grad u / sqrt(|grad u|^2 + eps^2)).
inline FlowStepResult tv_flow_step(const ScalarField& u, double dt, double eps = 1e-3) {
  if (!(dt > 0.0) || !(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt and eps must be positive");
  const VectorField2 g = grad(u);
  ScalarField inv = map_nodes(g.x, g.y, [eps](double a, double b) { return 1.0 / std::sqrt(a * a + b * b + eps * eps); });
  const VectorField2 flux{map_nodes(inv, g.x, [](double c, double d) { return c * d; }),
                          map_nodes(inv, g.y, [](double c, double d) { return c * d; })};
  ScalarField next = u + dt * div(flux);
  if (!all_finite(next)) return {u, true};
  return {std::move(next), false};
}

}  // namespace gcreg
