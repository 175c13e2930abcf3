#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcreg/field.hpp"
#include "gcreg/metrics.hpp"

namespace gcreg {

struct RegistrationResult {
  VectorField2 u;
  double epsilon = 0.0;
  double min_jac = 1.0;
  std::int64_t negative_jac_count = 0;
  double ssd_before = 0.0;
  double ssd_after = 0.0;
  int iterations = 0;
  /// Per outer iteration: the stopping quantity of the driver (EL residual
  /// for the ALM solver, relative update or SSD change for the baselines).
  std::vector<double> residual_history{};
  std::vector<double> ssd_history{};
  double wall_time_s = 0.0;
  bool identical_inputs = false;
  /// ALM only: l2 norm of (q1 - grad u1, q2 - grad u2) after each iteration.
  std::vector<double> constraint_history{};
  /// ALM only: how often the Step-1 denominator guard fired.
  std::int64_t degenerate_denominators = 0;
};

/// Progress callback; receives the 1-based iteration, the stopping quantity and the SSD.
using IterationObserver = std::function<void(int iteration, double residual, double ssd)>;

namespace detail {

inline RegistrationResult finish_result(const ScalarField& t, const ScalarField& r, VectorField2 u) {
  const QualityReport q = quality(t, r, u);
  RegistrationResult res{.u = std::move(u)};
  res.epsilon = q.epsilon;
  res.min_jac = q.min_jac;
  res.negative_jac_count = q.negative_jac_count;
  res.ssd_before = q.ssd_before;
  res.ssd_after = q.ssd_after;
  return res;
}

inline void require_registrable(const ScalarField& t, const ScalarField& r) {
  t.require_same_shape(r);
  if (t.width() < 3 || t.height() < 3) throw Error(ErrorKind::InvalidArgument, "images must be at least 3x3");
}

inline void require_finite(const VectorField2& u, const char* what, int iteration) {
  if (!all_finite(u)) throw SolverAbort(ErrorKind::NonFinite, std::string(what) + " became non-finite", iteration);
}

}  // namespace detail
}  // namespace gcreg
