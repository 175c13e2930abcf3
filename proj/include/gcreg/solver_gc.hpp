#pragma once

// Gaussian-curvature registration by augmented Lagrangian splitting.
//
// Splitting q_l = grad u_l gives, per outer iteration,
//   Step 1  closed-form updates of the duals q_1, q_2 (one alternating pass),
//   Step 2  a Gauss-Newton linearized Poisson-type system for u, relaxed by
//           weighted pointwise Gauss-Seidel with 2x2 nodal blocks,
//   Step 3  multiplier ascent mu_l += r (q_l - grad u_l).
//
// Discrete conventions: div = -grad^T and laplacian = div o grad, so Step 1
// and Step 2 are exact stationarity conditions of the discrete Lagrangian.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <utility>

#include "gcreg/curvature.hpp"
#include "gcreg/field.hpp"
#include "gcreg/registration.hpp"
#include "gcreg/similarity.hpp"

namespace gcreg {

struct RegistrationConfig {
  double gamma = 1e-4;
  double r = 0.1;
  double omega = 0.9725;
  double tol = 1e-3;
  int max_iter = 30;
  double denom_guard = 1e-9;
  int gs_sweeps = 3;
  /// Intensities are divided by this before the data term is evaluated, so
  /// gamma and r refer to unit-range images.
  double intensity_scale = 255.0;

  void validate() const {
    if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be non-negative");
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "r must be positive");
    if (!(omega > 0.0 && omega < 2.0)) throw Error(ErrorKind::InvalidArgument, "omega must lie in (0, 2)");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
    if (!(denom_guard > 0.0)) throw Error(ErrorKind::InvalidArgument, "denom_guard must be positive");
    if (gs_sweeps < 1) throw Error(ErrorKind::InvalidArgument, "gs_sweeps must be >= 1");
    if (!(intensity_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "intensity_scale must be positive");
  }
};

/// q1, q2 stand in for grad u1, grad u2; mu1, mu2 are their multipliers.
struct ALMState {
  VectorField2 u;
  VectorField2 q1;
  VectorField2 q2;
  VectorField2 mu1;
  VectorField2 mu2;
  int iteration = 0;

  static ALMState zeros_like(const ScalarField& f) {
    const VectorField2 z = VectorField2::zeros_like(f);
    return {z, z, z, z, z, 0};
  }
};

// ---------------------------------------------------------------------------
// Step 1

struct DualUpdate {
  VectorField2 q;
  std::int64_t clamped = 0;
};

namespace detail {

inline double guarded(double den, double guard, std::int64_t& clamped) {
  if (std::abs(den) >= guard) return den;
  ++clamped;
  return den > 0.0 ? guard : -guard;
}

inline ScalarField det_grad(const ScalarField& a, const ScalarField& b) {
  const ScalarField ax = dx(a), ay = dy(a), bx = dx(b), by = dy(b);
  ScalarField d = a.zeros_like();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = ax[k] * by[k] - ay[k] * bx[k];
  return d;
}

// Curvature flux term acting on the first dual component:
//   -div_x(s b_y / G^2) + div_y(s b_x / G^2)
// and, with the roles swapped, on the second one. `gamma2` holds G^2.
inline ScalarField dual_flux_term_x(const ScalarField& sgn, const ScalarField& b, const ScalarField& gamma2) {
  const ScalarField by = dy(b), bx = dx(b);
  ScalarField wy = b.zeros_like(), wx = b.zeros_like();
  for (std::size_t k = 0; k < b.size(); ++k) {
    wy[k] = sgn[k] * by[k] / gamma2[k];
    wx[k] = sgn[k] * bx[k] / gamma2[k];
  }
  return divergence_y(wx) - divergence_x(wy);
}
inline ScalarField dual_flux_term_y(const ScalarField& sgn, const ScalarField& a, const ScalarField& gamma2) {
  const ScalarField ax = dx(a), ay = dy(a);
  ScalarField wx = a.zeros_like(), wy = a.zeros_like();
  for (std::size_t k = 0; k < a.size(); ++k) {
    wx[k] = sgn[k] * ax[k] / gamma2[k];
    wy[k] = sgn[k] * ay[k] / gamma2[k];
  }
  return divergence_x(wy) - divergence_y(wx);
}

}  // namespace detail

/// One alternating closed-form pass over (q_{l,1}, q_{l,2}) for displacement
/// component u_l. Curvature quantities are lagged: D and its sign come from the
/// freshest duals, Gamma = 1 + |grad u_l|^2 from the displacement.
inline DualUpdate update_dual(const ScalarField& u_l, VectorField2 q, const VectorField2& mu, double gamma, double r,
                              double denom_guard = 1e-9) {
  const VectorField2 gu = grad(u_l);
  ScalarField g1 = u_l.zeros_like(), g2 = u_l.zeros_like(), g3 = u_l.zeros_like();
  for (std::size_t k = 0; k < g1.size(); ++k) {
    g1[k] = 1.0 + gu.x[k] * gu.x[k] + gu.y[k] * gu.y[k];
    g2[k] = g1[k] * g1[k];
    g3[k] = g2[k] * g1[k];
  }
  DualUpdate out{std::move(q)};

  auto solve_component = [&](ScalarField& target, const ScalarField& flux, const ScalarField& d,
                             const ScalarField& mu_c, const ScalarField& grad_c) {
    for (std::size_t k = 0; k < target.size(); ++k) {
      const double s = detail::sign0(d[k]);
      const double num = g3[k] * (gamma * flux[k] + mu_c[k] - r * grad_c[k]);
      const double den = detail::guarded(-r * g3[k] + 4.0 * gamma * s * d[k], denom_guard, out.clamped);
      target[k] = num / den;
    }
  };

  {
    const ScalarField d = detail::det_grad(out.q.x, out.q.y);
    const ScalarField s = map_nodes(d, detail::sign0);
    const ScalarField flux = detail::dual_flux_term_x(s, out.q.y, g2);
    solve_component(out.q.x, flux, d, mu.x, gu.x);
  }
  {
    const ScalarField d = detail::det_grad(out.q.x, out.q.y);
    const ScalarField s = map_nodes(d, detail::sign0);
    const ScalarField flux = detail::dual_flux_term_y(s, out.q.x, g2);
    solve_component(out.q.y, flux, d, mu.y, gu.y);
  }
  return out;
}

struct QUpdate {
  VectorField2 q1;
  VectorField2 q2;
  std::int64_t clamped = 0;
};

inline QUpdate q_update(const ALMState& state, double gamma, double r, double denom_guard = 1e-9) {
  DualUpdate a = update_dual(state.u.x, state.q1, state.mu1, gamma, r, denom_guard);
  DualUpdate b = update_dual(state.u.y, state.q2, state.mu2, gamma, r, denom_guard);
  return {std::move(a.q), std::move(b.q), a.clamped + b.clamped};
}

/// Stationarity residual of the Step-1 objective for one component,
///   gamma * S(q) + <mu, q> + r/2 |q - grad u_l|^2,  S(q) = sum |det grad q| / (1 + |q|^2)^2,
/// per unit cell area (the objective's gradient divided by h^2).
inline VectorField2 step1_residual(const ScalarField& u_l, const VectorField2& q, const VectorField2& mu, double gamma,
                                   double r) {
  const VectorField2 gu = grad(u_l);
  const ScalarField d = detail::det_grad(q.x, q.y);
  const ScalarField s = map_nodes(d, detail::sign0);
  ScalarField g2 = q.x.zeros_like(), g3 = q.x.zeros_like();
  for (std::size_t k = 0; k < g2.size(); ++k) {
    const double g = 1.0 + q.x[k] * q.x[k] + q.y[k] * q.y[k];
    g2[k] = g * g;
    g3[k] = g2[k] * g;
  }
  const ScalarField fa = detail::dual_flux_term_x(s, q.y, g2);
  const ScalarField fb = detail::dual_flux_term_y(s, q.x, g2);
  VectorField2 res = VectorField2::zeros_like(u_l);
  for (std::size_t k = 0; k < g2.size(); ++k) {
    const double curv = 4.0 * s[k] * d[k] / g3[k];
    res.x[k] = gamma * (fa[k] - curv * q.x[k]) + mu.x[k] + r * (q.x[k] - gu.x[k]);
    res.y[k] = gamma * (fb[k] - curv * q.y[k]) + mu.y[k] + r * (q.y[k] - gu.y[k]);
  }
  return res;
}

/// The Step-1 objective itself (with the h^2 cell weight).
inline double step1_objective(const ScalarField& u_l, const VectorField2& q, const VectorField2& mu, double gamma,
                              double r) {
  const VectorField2 gu = grad(u_l);
  const ScalarField d = detail::det_grad(q.x, q.y);
  double s = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double g = 1.0 + q.x[k] * q.x[k] + q.y[k] * q.y[k];
    const double ea = q.x[k] - gu.x[k];
    const double eb = q.y[k] - gu.y[k];
    s += gamma * std::abs(d[k]) / (g * g) + mu.x[k] * q.x[k] + mu.y[k] * q.y[k] + 0.5 * r * (ea * ea + eb * eb);
  }
  return u_l.spacing() * u_l.spacing() * s;
}

// ---------------------------------------------------------------------------
// Step 2

/// Relaxed pointwise Gauss-Seidel on
///   [-rL + s11, s12; s21, -rL + s22] u = -G - f(u_k) + sigma u_k,  G_l = div mu_l + r div q_l,
/// the Gauss-Newton linearization of -r lap u_l + f_l + G_l = 0 around u_k.
/// When sigma vanishes identically the system is a pure Neumann problem whose
/// solution is fixed only up to a constant; the input mean is kept then.
inline VectorField2 u_update(const ScalarField& t, const ScalarField& ref, const ALMState& state, double r,
                             double omega, int sweeps = 3, double denom_guard = 1e-9) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "r must be positive");
  if (!(omega > 0.0 && omega < 2.0)) throw Error(ErrorKind::InvalidArgument, "omega must lie in (0, 2)");
  const VectorField2& uk = state.u;
  const GridStencils st(t);
  const ForceLinearization sig = linearize_force(t, uk);
  const VectorField2 f = force(t, ref, uk);
  const ScalarField g1 = div(state.mu1) + r * div(state.q1);
  const ScalarField g2 = div(state.mu2) + r * div(state.q2);

  ScalarField rhs1 = t.zeros_like(), rhs2 = t.zeros_like();
  bool sigma_zero = true;
  for (std::size_t k = 0; k < rhs1.size(); ++k) {
    rhs1[k] = -g1[k] - f.x[k] + sig.sigma11[k] * uk.x[k] + sig.sigma12[k] * uk.y[k];
    rhs2[k] = -g2[k] - f.y[k] + sig.sigma21[k] * uk.x[k] + sig.sigma22[k] * uk.y[k];
    if (sig.sigma11[k] != 0.0 || sig.sigma22[k] != 0.0 || sig.sigma12[k] != 0.0) sigma_zero = false;
  }

  VectorField2 u = uk;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int j = 0; j < t.height(); ++j)
      for (int i = 0; i < t.width(); ++i) {
        const std::size_t k = t.index(i, j);
        const double diag = -r * st.laplacian_diagonal(i, j);
        const double b1 = rhs1[k] + r * st.laplacian_offdiagonal(u.x, i, j);
        const double b2 = rhs2[k] + r * st.laplacian_offdiagonal(u.y, i, j);
        const double a11 = diag + sig.sigma11[k];
        const double a22 = diag + sig.sigma22[k];
        const double a12 = sig.sigma12[k];
        const double a21 = sig.sigma21[k];
        const double det = a11 * a22 - a12 * a21;
        if (!std::isfinite(det) || !std::isfinite(b1) || !std::isfinite(b2))
          throw Error(ErrorKind::NonFinite, "non-finite system at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        if (!(std::abs(det) >= denom_guard)) {
          throw Error(ErrorKind::SingularBlock,
                      "nodal block at (" + std::to_string(i) + ", " + std::to_string(j) + ") has det " +
                          std::to_string(det));
        }
        const double x1 = (a22 * b1 - a12 * b2) / det;
        const double x2 = (a11 * b2 - a21 * b1) / det;
        u.x[k] = (1.0 - omega) * u.x[k] + omega * x1;
        u.y[k] = (1.0 - omega) * u.y[k] + omega * x2;
      }
  }

  if (sigma_zero) {
    const double s1 = mean(uk.x) - mean(u.x);
    const double s2 = mean(uk.y) - mean(u.y);
    for (std::size_t k = 0; k < u.x.size(); ++k) {
      u.x[k] += s1;
      u.y[k] += s2;
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Step 3

inline std::pair<VectorField2, VectorField2> multiplier_update(const ALMState& state, double r) {
  VectorField2 mu1 = state.mu1 + r * (state.q1 - grad(state.u.x));
  VectorField2 mu2 = state.mu2 + r * (state.q2 - grad(state.u.y));
  return {std::move(mu1), std::move(mu2)};
}

// ---------------------------------------------------------------------------
// Stopping residual

struct ElResidual {
  double value = 0.0;          // residual_norm / (1 + data_norm)
  double residual_norm = 0.0;  // l2 norm of the stacked Step-1 and Step-2 residuals
  double data_norm = 0.0;      // l2 norm of mu, r grad u, f and G
};

/// l2 norm of a stack of residual fields.
inline double stacked_norm(std::initializer_list<const ScalarField*> fields) {
  double s = 0.0;
  for (const ScalarField* f : fields) s += inner(*f, *f);
  return std::sqrt(s);
}

inline ElResidual el_residual(const ScalarField& t, const ScalarField& ref, const ALMState& state, double gamma,
                              double r) {
  const VectorField2 s1 = step1_residual(state.u.x, state.q1, state.mu1, gamma, r);
  const VectorField2 s2 = step1_residual(state.u.y, state.q2, state.mu2, gamma, r);
  const VectorField2 f = force(t, ref, state.u);
  const GridStencils st(t);
  const ScalarField g1 = div(state.mu1) + r * div(state.q1);
  const ScalarField g2 = div(state.mu2) + r * div(state.q2);
  const ScalarField e1 = -r * laplacian(state.u.x, st) + f.x + g1;
  const ScalarField e2 = -r * laplacian(state.u.y, st) + f.y + g2;
  const VectorField2 rgu1 = r * grad(state.u.x);
  const VectorField2 rgu2 = r * grad(state.u.y);

  ElResidual out;
  out.residual_norm = stacked_norm({&s1.x, &s1.y, &s2.x, &s2.y, &e1, &e2});
  out.data_norm = stacked_norm({&state.mu1.x, &state.mu1.y, &state.mu2.x, &state.mu2.y, &rgu1.x, &rgu1.y, &rgu2.x,
                                &rgu2.y, &f.x, &f.y, &g1, &g2});
  out.value = out.residual_norm / (1.0 + out.data_norm);
  return out;
}

/// l2 norm of the splitting constraint (q1 - grad u1, q2 - grad u2).
inline double constraint_norm(const ALMState& state) {
  const VectorField2 c1 = state.q1 - grad(state.u.x);
  const VectorField2 c2 = state.q2 - grad(state.u.y);
  return std::sqrt(inner(c1, c1) + inner(c2, c2));
}

// ---------------------------------------------------------------------------
// Driver

/// Runs Steps 1-3 from u = q = mu = 0 until the EL residual drops below
/// config.tol or config.max_iter outer iterations are spent.
inline RegistrationResult register_gc(const ScalarField& template_image, const ScalarField& reference,
                                      const RegistrationConfig& config, const IterationObserver& observer = {}) {
  config.validate();
  detail::require_registrable(template_image, reference);
  const auto start = std::chrono::steady_clock::now();
  const ScalarField t = (1.0 / config.intensity_scale) * template_image;
  const ScalarField ref = (1.0 / config.intensity_scale) * reference;

  ALMState state = ALMState::zeros_like(t);
  if (ssd(template_image, reference) < kIdenticalSsd) {
    RegistrationResult res = detail::finish_result(template_image, reference, state.u);
    res.identical_inputs = true;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

  std::int64_t clamped = 0;
  std::vector<double> residuals, ssds, constraints;
  for (int k = 1; k <= config.max_iter; ++k) {
    QUpdate qs = q_update(state, config.gamma, config.r, config.denom_guard);
    state.q1 = std::move(qs.q1);
    state.q2 = std::move(qs.q2);
    clamped += qs.clamped;
    detail::require_finite(state.q1, "dual q1", k);
    detail::require_finite(state.q2, "dual q2", k);

    try {
      state.u = u_update(t, ref, state, config.r, config.omega, config.gs_sweeps, config.denom_guard);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFinite) throw;
      throw SolverAbort(ErrorKind::NonFinite, e.what(), k);
    }
    detail::require_finite(state.u, "displacement", k);

    auto [mu1, mu2] = multiplier_update(state, config.r);
    state.mu1 = std::move(mu1);
    state.mu2 = std::move(mu2);
    detail::require_finite(state.mu1, "multiplier mu1", k);
    detail::require_finite(state.mu2, "multiplier mu2", k);
    state.iteration = k;

    const double res = el_residual(t, ref, state, config.gamma, config.r).value;
    const double cur_ssd = ssd(template_image, reference, state.u);
    residuals.push_back(res);
    ssds.push_back(cur_ssd);
    constraints.push_back(constraint_norm(state));
    if (observer) observer(k, res, cur_ssd);
    if (res < config.tol) break;
  }

  RegistrationResult out = detail::finish_result(template_image, reference, std::move(state.u));
  out.iterations = static_cast<int>(residuals.size());
  out.residual_history = std::move(residuals);
  out.ssd_history = std::move(ssds);
  out.constraint_history = std::move(constraints);
  out.degenerate_denominators = clamped;
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace gcreg
