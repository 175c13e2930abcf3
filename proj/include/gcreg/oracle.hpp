#pragma once

// Finite-difference checks of the analytic gradients used by the solvers.
// Every check perturbs one node at a time and re-evaluates the full energy,
// so they are meant for grids of at most 32x32.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "gcreg/curvature.hpp"
#include "gcreg/field.hpp"
#include "gcreg/solver_gc.hpp"

namespace gcreg {

inline constexpr int kOracleMaxSide = 32;

struct GradCheckReport {
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  std::int64_t nodes_checked = 0;
  std::int64_t nodes_skipped = 0;  // excluded because |D| is near the kink of |.|
  double step = 0.0;
};

using ScalarEnergy = std::function<double(const ScalarField&)>;

/// Central differences (E(u + s e_k) - E(u - s e_k)) / 2s at every node.
inline ScalarField numeric_gradient(const ScalarEnergy& energy, const ScalarField& u, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  if (u.width() > kOracleMaxSide || u.height() > kOracleMaxSide)
    throw Error(ErrorKind::InvalidArgument, "numeric_gradient is limited to 32x32 grids");
  ScalarField g = u.zeros_like();
  ScalarField w = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double orig = w[k];
    w[k] = orig + step;
    const double ep = energy(w);
    w[k] = orig - step;
    const double em = energy(w);
    w[k] = orig;
    g[k] = (ep - em) / (2.0 * step);
  }
  return g;
}

namespace detail {

// true where every node of the 3x3 neighbourhood has |d| >= threshold
inline std::vector<bool> smooth_nodes(const ScalarField& d, double threshold) {
  std::vector<bool> ok(d.size(), true);
  for (int j = 0; j < d.height(); ++j)
    for (int i = 0; i < d.width(); ++i)
      for (int b = std::max(0, j - 1); b <= std::min(d.height() - 1, j + 1); ++b)
        for (int a = std::max(0, i - 1); a <= std::min(d.width() - 1, i + 1); ++a)
          if (std::abs(d(a, b)) < threshold) ok[d.index(i, j)] = false;
  return ok;
}

// Relative error |num - ana| / max|num| over the admitted nodes, accumulated
// in node order.
inline void accumulate(GradCheckReport& rep, double& total, const ScalarField& num, const ScalarField& ana,
                       const std::vector<bool>& admit) {
  double scale = 0.0;
  for (std::size_t k = 0; k < num.size(); ++k)
    if (admit[k]) scale = std::max(scale, std::abs(num[k]));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t k = 0; k < num.size(); ++k) {
    if (!admit[k]) {
      ++rep.nodes_skipped;
      continue;
    }
    const double e = std::abs(num[k] - ana[k]) / scale;
    rep.max_rel_err = std::max(rep.max_rel_err, e);
    total += e;
    ++rep.nodes_checked;
  }
}

inline void finish(GradCheckReport& rep, double total) {
  rep.mean_rel_err = rep.nodes_checked > 0 ? total / static_cast<double>(rep.nodes_checked) : 0.0;
}

}  // namespace detail

/// Compares step1_residual (times h^2) with the numeric gradient of
/// step1_objective with respect to both dual components.
inline GradCheckReport verify_step1_el(const ScalarField& u_l, const VectorField2& q, const VectorField2& mu,
                                       double gamma, double r, double step = 1e-6) {
  const double h2 = u_l.spacing() * u_l.spacing();
  const VectorField2 ana = h2 * step1_residual(u_l, q, mu, gamma, r);
  const ScalarEnergy ex = [&](const ScalarField& a) { return step1_objective(u_l, {a, q.y}, mu, gamma, r); };
  const ScalarEnergy ey = [&](const ScalarField& b) { return step1_objective(u_l, {q.x, b}, mu, gamma, r); };
  const ScalarField nx = numeric_gradient(ex, q.x, step);
  const ScalarField ny = numeric_gradient(ey, q.y, step);

  std::vector<bool> admit(u_l.size(), true);
  if (gamma != 0.0) admit = detail::smooth_nodes(detail::det_grad(q.x, q.y), 10.0 * step);

  GradCheckReport rep;
  rep.step = step;
  double total = 0.0;
  detail::accumulate(rep, total, nx, ana.x, admit);
  detail::accumulate(rep, total, ny, ana.y, admit);
  detail::finish(rep, total);
  return rep;
}

/// Compares gc_regularizer_operator (times h^2) with the numeric gradient of
/// gamma * gc_energy.
inline GradCheckReport verify_el17(const ScalarField& u, double gamma, double step = 1e-5) {
  const double h2 = u.spacing() * u.spacing();
  const ScalarField ana = h2 * gc_regularizer_operator(u, gamma).total;
  const ScalarEnergy e = [gamma](const ScalarField& v) { return gamma * gc_energy(v); };
  const ScalarField num = numeric_gradient(e, u, step);

  const Hessian h = hessian(u);
  const ScalarField det = map_nodes(h.xx, h.yy, h.xy, [](double a, double b, double c) { return a * b - c * c; });
  const std::vector<bool> admit = detail::smooth_nodes(det, 10.0 * step);

  GradCheckReport rep;
  rep.step = step;
  double total = 0.0;
  detail::accumulate(rep, total, num, ana, admit);
  detail::finish(rep, total);
  return rep;
}

}  // namespace gcreg
