#pragma once

#include <cstddef>
#include <span>

namespace stefan {

// Fixed-order pairwise summation. Every quadrature, transform and norm in this
// project reduces through these two functions so that results are identical
// across thread counts and platforms with IEEE-754 doubles.
inline double sum_pairwise(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t half = n / 2;
  return sum_pairwise(a, half) + sum_pairwise(a + half, n - half);
}

inline double sum_pairwise(std::span<const double> a) { return sum_pairwise(a.data(), a.size()); }

inline double dot_pairwise(const double* a, const double* b, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = n / 2;
  return dot_pairwise(a, b, half) + dot_pairwise(a + half, b + half, n - half);
}

}  // namespace stefan
