#pragma once

#include <cmath>

#include "skma/error.hpp"

namespace skma {

// Strictly increasing affine abscissa transformation h(x) = a*x + b, a > 0.
// The class forms a group under composition; see compose/invert below.
struct AffineWarp {
  double a = 1.0;
  double b = 0.0;

  AffineWarp() = default;
  AffineWarp(double a_, double b_) : a(a_), b(b_) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a > 0.0))
      throw InvalidArgument("AffineWarp requires finite a > 0");
  }

  double operator()(double x) const { return a * x + b; }

  static AffineWarp identity() { return AffineWarp(1.0, 0.0); }
  bool is_identity() const { return a == 1.0 && b == 0.0; }
};

// h = h1 o h2, i.e. h(x) = h1(h2(x)).
inline AffineWarp compose(const AffineWarp& h1, const AffineWarp& h2) {
  return AffineWarp(h1.a * h2.a, h1.a * h2.b + h1.b);
}

inline AffineWarp invert(const AffineWarp& h) {
  return AffineWarp(1.0 / h.a, -h.b / h.a);
}

}  // namespace skma
