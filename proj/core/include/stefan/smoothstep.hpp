#pragma once

namespace stefan {

// Quintic smoothstep S(u) = 6u^5 - 15u^4 + 10u^3 clamped to [0,1], with C2
// joins at both ends, plus the closed-form running integrals used by the
// constitutive functions.
namespace smoothstep {

inline double value(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return ((6.0 * u - 15.0) * u + 10.0) * u * u * u;
}

inline double deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double v = u * (1.0 - u);
  return 30.0 * v * v;
}

// int_0^v S(u) du
inline double integral(double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return v - 0.5;
  return ((v - 3.0) * v + 2.5) * v * v * v * v;
}

// int_0^v S(u)^2 du; the mean of S^2 over the rise is 181/462.
inline double square_integral(double v) {
  if (v <= 0.0) return 0.0;
  const double full = 181.0 / 462.0;
  if (v >= 1.0) return full + (v - 1.0);
  const double v7 = v * v * v * v * v * v * v;
  return (((((36.0 / 11.0) * v - 18.0) * v + 115.0 / 3.0) * v - 37.5) * v + 100.0 / 7.0) * v7;
}

}  // namespace smoothstep
}  // namespace stefan
