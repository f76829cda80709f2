#pragma once

// Error-function family on the complex plane.
//
// Everything is built on the Faddeeva function w(z) = e^{-z^2} erfc(-iz):
//   |z| < 6  : trapezoidal discretisation of w(z) = (i/pi) int e^{-t^2}/(z-t) dt
//              with step h = 0.5 plus the exact pole correction, using the node
//              lattice (nh or (n+1/2)h) farthest from Re z;
//   |z| >= 6 : Laplace continued fraction, fixed depth.
// Both branches are accurate to ~1e-15 relative in the upper half plane; the
// lower half plane follows from w(-z) = 2e^{-z^2} - w(z).

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "lgq/errors.hpp"

namespace lgq::specfun {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kTwoOverSqrtPi = 1.12837916709551257390;

namespace detail {

inline constexpr double kStep = 0.5;
inline constexpr int kHalfNodes = 14;  // e^{-(14.5 h)^2} ~ 1e-23
inline constexpr double kSumRadius = 6.0;
inline constexpr int kFractionDepth = 60;
// e^{709.78} is the largest finite double
inline constexpr double kMaxExpArg = 709.0;

// Im z >= 0, Re z >= 0, |z| < kSumRadius
inline cplx faddeeva_trapezoid(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double frac = x / kStep - std::floor(x / kStep);
  // A node close to Re z makes the sum and the pole term nearly cancel.
  const bool shifted = frac < 0.25 || frac > 0.75;
  const double offset = shifted ? 0.5 * kStep : 0.0;

  cplx sum{0.0, 0.0};
  for (int n = -kHalfNodes; n <= kHalfNodes; ++n) {
    const double t = n * kStep + offset;
    sum += std::exp(-t * t) / (z - t);
  }
  cplx value = cplx{0.0, kStep / kPi} * sum;

  // Residue of the integrand's pole at t = z; exponentially small once
  // Im z exceeds 2 pi / h, where it is dropped.
  if (y < 2.0 * kPi / kStep) {
    const cplx e = std::exp(cplx{0.0, -2.0 * kPi / kStep} * z);
    const cplx denom = shifted ? (1.0 + e) : (1.0 - e);
    value += 2.0 * std::exp(-z * z) / denom;
  }
  return value;
}

// Im z >= 0, |z| >= kSumRadius
inline cplx faddeeva_fraction(cplx z) {
  cplx tail{0.0, 0.0};
  for (int k = kFractionDepth; k >= 1; --k) {
    tail = (0.5 * k) / (z - tail);
  }
  return cplx{0.0, 1.0 / kSqrtPi} / (z - tail);
}

inline cplx erf_maclaurin(cplx z) {
  const cplx z2 = z * z;
  cplx power = z;  // (-1)^n z^{2n+1} / n!
  cplx sum = z;
  for (int n = 1; n < 60; ++n) {
    power *= -z2 / static_cast<double>(n);
    const cplx term = power / static_cast<double>(2 * n + 1);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return kTwoOverSqrtPi * sum;
}

inline cplx checked_exp_neg_square(cplx z) {
  const cplx arg = -z * z;
  if (arg.real() > kMaxExpArg) {
    throw OverflowDomain("exp(-z^2) overflows for z = (" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + "); use the Faddeeva form");
  }
  return std::exp(arg);
}

}  // namespace detail

/// Faddeeva function w(z) = e^{-z^2} erfc(-iz). Total on finite inputs; deep in
/// the lower half plane the result overflows to infinity like e^{-z^2}.
inline cplx faddeeva(cplx z) {
  if (z.imag() < 0.0) {
    return 2.0 * std::exp(-z * z) - faddeeva(-z);
  }
  // w(-conj z) = conj w(z): evaluate on Re z >= 0 only so the symmetry is exact.
  if (z.real() < 0.0) {
    return std::conj(faddeeva(-std::conj(z)));
  }
  const cplx w = std::abs(z) < detail::kSumRadius ? detail::faddeeva_trapezoid(z)
                                                  : detail::faddeeva_fraction(z);
  // w(iy) = erfcx(y) is real
  return z.real() == 0.0 ? cplx{w.real(), 0.0} : w;
}

/// Scaled complement e^{z^2} erfc(z).
inline cplx erfcx(cplx z) { return faddeeva(cplx{-z.imag(), z.real()}); }

/// Complementary error function. For Re z >= 0 it is formed as e^{-z^2} w(iz),
/// never as 1 - erf(z).
inline cplx erfc(cplx z) {
  if (z.real() < 0.0) {
    return 2.0 - erfc(-z);
  }
  return detail::checked_exp_neg_square(z) * erfcx(z);
}

/// Error function; precondition |z| < 30. Throws OverflowDomain where e^{-z^2}
/// is not representable.
inline cplx erf(cplx z) {
  if (z.real() < 0.0) {
    return -erf(-z);
  }
  if (std::abs(z) <= 1.0) {
    return detail::erf_maclaurin(z);
  }
  return 1.0 - erfc(z);
}

/// Imaginary error function erfi(x) = -i erf(ix), summed directly from its
/// all-positive Maclaurin series. Intended for |x| <= 6.
inline double erfi(double x) {
  const double x2 = x * x;
  double power = x;  // x^{2n+1} / n!
  double sum = x;
  for (int n = 1; n < 400; ++n) {
    power *= x2 / n;
    const double term = power / (2 * n + 1);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return kTwoOverSqrtPi * sum;
}

}  // namespace lgq::specfun
