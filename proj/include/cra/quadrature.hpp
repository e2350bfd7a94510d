#pragma once

#include <cmath>
#include <cstddef>

namespace cra {

namespace detail {

// 15-point Gauss-Legendre rule on [-1, 1], positive half plus center.
inline constexpr double kGl15Node[8] = {
    0.0000000000000000, 0.2011940939974345, 0.3941513470775634,
    0.5709721726085388, 0.7244177313601701, 0.8482065834104272,
    0.9372733924007060, 0.9879925180204854};
inline constexpr double kGl15Weight[8] = {
    0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
    0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
    0.0703660474881081, 0.0307532419961173};

template <class F>
double gl15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = kGl15Weight[0] * f(c);
  for (int k = 1; k < 8; ++k) {
    const double d = h * kGl15Node[k];
    s += kGl15Weight[k] * (f(c - d) + f(c + d));
  }
  return s * h;
}

template <class F>
double adaptive(const F& f, double a, double b, double tol, double whole,
                int depth) {
  const double c = 0.5 * (a + b);
  const double left = gl15(f, a, c);
  const double right = gl15(f, c, b);
  const double split = left + right;
  if (depth <= 0 || std::abs(split - whole) <= tol) return split;
  return adaptive(f, a, c, 0.5 * tol, left, depth - 1) +
         adaptive(f, c, b, 0.5 * tol, right, depth - 1);
}

}  // namespace detail

// Adaptive composite Gauss-Legendre integration of f over [a, b] to an
// absolute tolerance.  f must be finite on (a, b); endpoint values are
// never evaluated exactly at a or b unless they are quadrature nodes.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-9) {
  if (!(b > a)) return 0.0;
  return detail::adaptive(f, a, b, tol, detail::gl15(f, a, b), 48);
}

}  // namespace cra
