#pragma once

// Gaussian correlation kernels of the coarse-grained field.
//
// With a Gaussian window of width L, every kernel reduces to the one-sided
// transform
//     G(x) = int_0^inf k e^{-L^2 k^2/2} e^{-ikx} dk
//          = 1/L^2 - i x sqrt(2 pi)/(2 L^3) w(-x/(sqrt(2) L)),
// times a model prefactor: 1/(4 pi^2) for the 3+1D scalar (radial measure
// k^2/(2k)) and 1/(4 pi) for the derivative of the 1+1D chiral field
// (measure k^2/(2k) on the half line).

#include <cmath>
#include <complex>
#include <string>

#include "lgq/errors.hpp"
#include "lgq/quadrature.hpp"
#include "lgq/specfun.hpp"

namespace lgq {

using cplx = std::complex<double>;

enum class FieldKind { Scalar3D, Chiral1D };

inline std::string to_string(FieldKind kind) {
  return kind == FieldKind::Scalar3D ? "scalar3d" : "chiral1d";
}

struct FieldModel {
  FieldKind kind = FieldKind::Scalar3D;
  double L = 1.0;  // coarse-graining length

  static FieldModel make(FieldKind kind, double L) {
    FieldModel m{kind, L};
    m.validate();
    return m;
  }
  void validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) {
      throw ConfigError("model.L must be a finite positive length, got " + std::to_string(L));
    }
  }
};

/// Coherent displacement of one mode (xi, ell, alpha) on top of a uniform
/// two-mode squeeze (r, theta). Squeezing is k-independent by construction.
struct StateSpec {
  double xi = 0.0;     // |xi_ell|
  double ell = 1.0;    // wavenumber of the coherent mode, omega_ell = ell
  double alpha = 0.0;  // coherent phase
  double r = 0.0;      // squeeze magnitude
  double theta = 0.0;  // squeeze angle

  void validate() const {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw ConfigError("state.xi must be >= 0");
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("state.ell must be > 0");
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("state.r must be >= 0");
    if (!std::isfinite(alpha)) throw ConfigError("state.alpha must be finite");
    if (!std::isfinite(theta)) throw ConfigError("state.theta must be finite");
  }
  bool is_vacuum() const { return xi == 0.0 && r == 0.0; }
  bool is_coherent_only() const { return r == 0.0; }
};

/// Kernels at a pair of times. a1, a2 are the one-time variances, b the
/// two-time Wightman covariance <phi(t2) phi(t1)>, e1, e2 the means.
struct KernelSet {
  cplx a1;
  cplx a2;
  cplx b;
  double e1 = 0.0;
  double e2 = 0.0;
  cplx det;  // a1 a2 - b^2

  static KernelSet from(cplx a1, cplx a2, cplx b, double e1, double e2) {
    return {a1, a2, b, e1, e2, a1 * a2 - b * b};
  }
};

namespace kernels {

namespace detail {

inline constexpr double kPi = specfun::kPi;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

inline double prefactor(const FieldModel& m) {
  return m.kind == FieldKind::Scalar3D ? 1.0 / (4.0 * kPi * kPi) : 1.0 / (4.0 * kPi);
}

/// G(x) above, without the model prefactor.
inline cplx window_transform(double L, double x) {
  const cplx w = specfun::faddeeva(cplx{-x / (kSqrt2 * L), 0.0});
  return 1.0 / (L * L) - cplx{0.0, x * kSqrt2Pi / (2.0 * L * L * L)} * w;
}

// Re(e^{i theta} G(x))
inline double phased_real(double L, double theta, double x) {
  return (std::polar(1.0, theta) * window_transform(L, x)).real();
}

}  // namespace detail

/// Mean of the coarse-grained field in the coherent state.
inline double coherent_mean(const FieldModel& model, const StateSpec& state, double t) {
  if (state.xi == 0.0) {
    return 0.0;
  }
  const double omega = state.ell;
  const double window = std::exp(-model.L * model.L * state.ell * state.ell / 4.0);
  if (model.kind == FieldKind::Scalar3D) {
    return std::pow(2.0 * detail::kPi, -1.5) * std::sqrt(2.0 / omega) * state.xi * window *
           std::cos(omega * t - state.alpha);
  }
  return std::sqrt(omega / detail::kPi) * state.xi * window * std::sin(state.alpha - omega * t);
}

inline double kernel_A(const FieldModel& model) {
  return detail::prefactor(model) / (model.L * model.L);
}

inline cplx kernel_B(const FieldModel& model, double t1, double t2) {
  if (t1 == t2) {
    return kernel_A(model);
  }
  return detail::prefactor(model) * detail::window_transform(model.L, t2 - t1);
}

inline cplx kernel_A_sq(const FieldModel& model, const StateSpec& state, double t) {
  const double L = model.L;
  if (state.r == 0.0) {
    return kernel_A(model);
  }
  const double value = std::cosh(2.0 * state.r) / (L * L) -
                       std::sinh(2.0 * state.r) * detail::phased_real(L, state.theta, 2.0 * t);
  return detail::prefactor(model) * value;
}

inline cplx kernel_B_sq(const FieldModel& model, const StateSpec& state, double t1, double t2) {
  if (state.r == 0.0) {
    return kernel_B(model, t1, t2);
  }
  const double L = model.L;
  const cplx g = t1 == t2 ? cplx{1.0 / (L * L), 0.0} : detail::window_transform(L, t2 - t1);
  // cosh^2 r e^{-ik dt} + sinh^2 r e^{+ik dt} = cosh 2r Re + i Im
  const cplx stationary{std::cosh(2.0 * state.r) * g.real(), g.imag()};
  const double squeeze = std::sinh(2.0 * state.r) * detail::phased_real(L, state.theta, t1 + t2);
  return detail::prefactor(model) * (stationary - squeeze);
}

inline KernelSet kernel_set(const FieldModel& model, const StateSpec& state, double t1, double t2) {
  return KernelSet::from(kernel_A_sq(model, state, t1), kernel_A_sq(model, state, t2),
                         kernel_B_sq(model, state, t1, t2), coherent_mean(model, state, t1),
                         coherent_mean(model, state, t2));
}

/// Mode-space reference: integrates the defining k-integrals directly, with
/// the window truncated where e^{-L^2 k^2/2} < 1e-18. Slow; used to validate
/// the closed forms above.
inline KernelSet oracle_kernels(const FieldModel& model, const StateSpec& state, double t1,
                                double t2) {
  const double L = model.L;
  const double k_cut = std::sqrt(2.0 * std::log(1e18)) / L;
  const double ch2 = std::cosh(2.0 * state.r);
  const double sh2 = std::sinh(2.0 * state.r);
  const double chsq = std::cosh(state.r) * std::cosh(state.r);
  const double shsq = std::sinh(state.r) * std::sinh(state.r);
  const double th = state.theta;
  const double dt = t2 - t1;
  const double sum = t1 + t2;
  const bool scalar = model.kind == FieldKind::Scalar3D;

  // Spectral density per unit k after angular integration, including the
  // (2 pi)^{-3} or (2 pi)^{-1} measure.
  auto density = [&](double k) {
    const double window = std::exp(-L * L * k * k / 2.0);
    if (scalar) {
      return 4.0 * detail::kPi * k * k / std::pow(2.0 * detail::kPi, 3) * window / (2.0 * k);
    }
    return (k * k / (2.0 * k)) * window / (2.0 * detail::kPi);
  };

  quad::Options opt;
  opt.abs_tol = 1e-13 * detail::prefactor(model) / (L * L);
  opt.rel_tol = 1e-12;
  opt.max_intervals = 1 << 14;

  auto check = [](const auto& res, const char* what) {
    if (!res.converged) {
      throw QuadratureFailure(std::string("oracle_kernels: ") + what + " did not converge");
    }
    return res.value;
  };

  auto a_sq = [&](double t) {
    auto f = [&](double k) {
      if (k == 0.0) return 0.0;
      return density(k) * (ch2 - sh2 * std::cos(2.0 * k * t - th));
    };
    return check(quad::integrate(f, 0.0, k_cut, opt), "A_sq");
  };

  auto b_sq = [&] {
    auto f = [&](double k) -> cplx {
      if (k == 0.0) return 0.0;
      if (scalar) {
        // e^{-ik dt} cosh^2 r - sinh 2r cos(k(t1+t2) - theta) + e^{ik dt} sinh^2 r
        return density(k) * (std::polar(chsq, -k * dt) - sh2 * std::cos(k * sum - th) +
                              std::polar(shsq, k * dt));
      }
      // cosh 2r cos(k(t1-t2)) - sinh 2r cos(k(t1+t2) - theta) + i sin(k(t1-t2))
      return density(k) * cplx{ch2 * std::cos(k * (t1 - t2)) - sh2 * std::cos(k * sum - th),
                               std::sin(k * (t1 - t2))};
    };
    return check(quad::integrate(f, 0.0, k_cut, opt), "B_sq");
  };

  // Mean from the displaced mode function: 2 Re(xi u_ell(t)) times the
  // field normalisation; the chiral derivative contributes -ik.
  auto mean = [&](double t) {
    const double ell = state.ell;
    const cplx xi = std::polar(state.xi, state.alpha);
    const cplx phase = std::polar(std::exp(-ell * ell * L * L / 4.0) / std::sqrt(2.0 * ell), -ell * t);
    if (scalar) {
      return std::pow(2.0 * detail::kPi, -1.5) * 2.0 * (xi * phase).real();
    }
    return 2.0 * (xi * cplx{0.0, -ell} * phase).real() / std::sqrt(2.0 * detail::kPi);
  };

  return KernelSet::from(a_sq(t1), a_sq(t2), b_sq(), mean(t1), mean(t2));
}

}  // namespace kernels
}  // namespace lgq
