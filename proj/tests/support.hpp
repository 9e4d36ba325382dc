#pragma once

#include <cmath>
#include <random>

#include "fcurve/space.hpp"

namespace fcurve::testing {

// Smooth curve: constant plus a few damped oscillations.
inline Curve smooth_curve(const Space& s, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> rate(0.6, 2.0), freq(0.0, 6.0), phase(0.0, 6.283185307179586);
  const double a0 = nd(rng);
  double a[3], b[3], c[3], p[3];
  for (int j = 0; j < 3; ++j) {
    a[j] = nd(rng);
    b[j] = rate(rng);
    c[j] = freq(rng);
    p[j] = phase(rng);
  }
  return Curve::from_function(s, [&](double x) {
    double v = a0;
    for (int j = 0; j < 3; ++j) v += a[j] * std::exp(-b[j] * x) * std::cos(c[j] * x + p[j]);
    return v;
  });
}

// White-noise curve: independent standard normal orthonormal coordinates.
inline Curve rough_curve(const Space& s, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Curve f(s);
  f.set_f0(nd(rng));
  const auto sc = s.coord_scale();
  for (std::size_t i = 0; i < s.cells(); ++i) f.deriv()[i] = nd(rng) / sc[i] / std::sqrt(s.x_max());
  return f;
}

inline Curve random_curve(const Space& s, std::mt19937_64& rng) {
  return (rng() & 1u) ? smooth_curve(s, rng) : rough_curve(s, rng);
}

}  // namespace fcurve::testing
