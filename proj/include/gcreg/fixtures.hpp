#pragma once

// Synthetic template/reference pairs with known ground truth. R is always
// T evaluated analytically at x + u_true(x), so u_true is the exact answer
// up to boundary clamping.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "gcreg/field.hpp"

namespace gcreg {

enum class FixtureKind { gaussian_shift, square_rotate, smooth_warp };

inline const char* to_string(FixtureKind k) {
  switch (k) {
    case FixtureKind::gaussian_shift: return "gaussian_shift";
    case FixtureKind::square_rotate: return "square_rotate";
    case FixtureKind::smooth_warp: return "smooth_warp";
  }
  return "unknown";
}

inline std::optional<FixtureKind> parse_fixture_kind(std::string_view s) {
  if (s == "gaussian_shift") return FixtureKind::gaussian_shift;
  if (s == "square_rotate") return FixtureKind::square_rotate;
  if (s == "smooth_warp") return FixtureKind::smooth_warp;
  return std::nullopt;
}

struct FixtureParams {
  double shift_x = 4.0;  // gaussian_shift
  double shift_y = 0.0;
  double sigma = 6.0;  // blob width, pixels
  double amplitude = 200.0;
  double angle_deg = 8.0;       // square_rotate
  double warp_amplitude = 2.0;  // smooth_warp, pixels
};

struct Fixture {
  ScalarField template_image;
  ScalarField reference;
  VectorField2 u_true;
};

namespace detail {

template <typename Image, typename Warp>
Fixture build_fixture(int size, Image&& image, Warp&& warp) {
  ScalarField t(size, size), r(size, size);
  VectorField2 u = VectorField2::zeros(size, size);
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) {
      const auto [ux, uy] = warp(static_cast<double>(i), static_cast<double>(j));
      u.x(i, j) = ux;
      u.y(i, j) = uy;
      t(i, j) = image(static_cast<double>(i), static_cast<double>(j));
      r(i, j) = image(i + ux, j + uy);
    }
  return {std::move(t), std::move(r), std::move(u)};
}

}  // namespace detail

inline Fixture make_fixture(FixtureKind kind, int size, const FixtureParams& p = {}) {
  if (size < 32) throw Error(ErrorKind::InvalidArgument, "fixture size must be >= 32");
  const double c = 0.5 * (size - 1);
  const double inv2s2 = 1.0 / (2.0 * p.sigma * p.sigma);
  auto blob = [&](double x, double y) {
    return p.amplitude * std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) * inv2s2);
  };

  switch (kind) {
    case FixtureKind::gaussian_shift:
      return detail::build_fixture(size, blob, [&](double, double) { return std::pair{p.shift_x, p.shift_y}; });

    case FixtureKind::square_rotate: {
      const double half = size / 5.0;
      const double soft = 1.5;
      auto square = [&](double x, double y) {
        auto edge = [&](double d) { return 0.5 * (1.0 + std::tanh(d / soft)); };
        return p.amplitude * edge(half - std::abs(x - c)) * edge(half - std::abs(y - c));
      };
      const double th = p.angle_deg * std::numbers::pi / 180.0;
      const double cs = std::cos(th), sn = std::sin(th);
      return detail::build_fixture(size, square, [&](double x, double y) {
        const double dx0 = x - c, dy0 = y - c;
        return std::pair{cs * dx0 - sn * dy0 - dx0, sn * dx0 + cs * dy0 - dy0};
      });
    }

    case FixtureKind::smooth_warp: {
      const double a = p.warp_amplitude;
      const double l = size - 1.0;
      return detail::build_fixture(size, blob, [&](double x, double y) {
        const double sx = std::sin(std::numbers::pi * x / l), sy = std::sin(std::numbers::pi * y / l);
        return std::pair{a * sx * sy, 0.5 * a * std::sin(2.0 * std::numbers::pi * x / l) * sy};
      });
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown fixture kind");
}

}  // namespace gcreg
