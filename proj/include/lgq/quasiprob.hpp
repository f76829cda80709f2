#pragma once

// Two-time quasi-probability q_{s1,s2}(t1,t2) = Re Tr[P_{s2}(t2) P_{s1}(t1) rho].
//
// For a Gaussian state the sign projectors reduce q to the quadrant mass of a
// bivariate "normal" density with complex covariance
//     V = [[a1, s1 s2 b], [s1 s2 b, a2]],   mean mu_i = s_i (E(t_i) - phi(t_i)),
//     q = Re (2 pi sqrt(det V))^{-1} int_{y>0} exp(-(y-mu)^T V^{-1} (y-mu)/2) dy.
// Re V is the symmetrised covariance and is positive definite, which makes
// Re V^{-1} positive definite as well: the quadrant integral converges
// absolutely and sqrt(det V) never leaves the right half plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <variant>

#include "lgq/errors.hpp"
#include "lgq/kernels.hpp"
#include "lgq/quadrature.hpp"
#include "lgq/specfun.hpp"

namespace lgq {

enum class Engine { Cartesian, Polar, Auto };
enum class EngineUsed { Cartesian, Polar, Window, DegenerateLimit };

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::Cartesian: return "cartesian";
    case Engine::Polar: return "polar";
    case Engine::Auto: return "auto";
  }
  return "?";
}

inline std::string to_string(EngineUsed e) {
  switch (e) {
    case EngineUsed::Cartesian: return "cartesian";
    case EngineUsed::Polar: return "polar";
    case EngineUsed::Window: return "window";
    case EngineUsed::DegenerateLimit: return "degenerate_limit";
  }
  return "?";
}

struct QuadratureConfig {
  Engine engine = Engine::Auto;
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double trunc_sigmas = 12.0;
  int max_subdiv = 1 << 14;
  double eps_det = 1e-12;         // |det| <= eps_det |a1 a2| counts as coincident
  bool degenerate_shift = true;   // evaluate coincident times at t2 = t1 + shift * L
  double degenerate_shift_L = 1e-4;

  void validate() const {
    if (!(abs_tol > 0.0)) throw ConfigError("quadrature.abs_tol must be > 0");
    if (!(rel_tol > 0.0)) throw ConfigError("quadrature.rel_tol must be > 0");
    if (!(trunc_sigmas >= 6.0)) throw ConfigError("quadrature.trunc_sigmas must be >= 6");
    if (max_subdiv < 1) throw ConfigError("quadrature.max_subdiv must be >= 1");
    if (!(eps_det > 0.0)) throw ConfigError("quadrature.eps_det must be > 0");
    if (!(degenerate_shift_L > 0.0)) throw ConfigError("quadrature.degenerate_shift must be > 0");
  }
};

struct QuasiProbQuery {
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;
  double t2 = 0.0;

  void validate() const {
    if (s1 != 1 && s1 != -1) throw ConfigError("query.s1 must be +1 or -1");
    if (s2 != 1 && s2 != -1) throw ConfigError("query.s2 must be +1 or -1");
    if (!(t1 >= 0.0) || !std::isfinite(t1)) throw ConfigError("query.t1 must be >= 0");
    if (!(t2 >= 0.0) || !std::isfinite(t2)) throw ConfigError("query.t2 must be >= 0");
  }
};

// Threshold references phi(t) for the sign projector.
struct ZeroReference {};
/// phi(t) = -E(t) of a reference coherent mode (xi, ell, alpha).
struct MinusEReference {
  double xi = 0.0;
  double ell = 1.0;
  double alpha = 0.0;
};
/// phi supplied at the two query times.
struct TabulatedReference {
  double phi1 = 0.0;
  double phi2 = 0.0;
};
using ThresholdReference = std::variant<ZeroReference, MinusEReference, TabulatedReference>;

struct SignThreshold {
  ThresholdReference reference = ZeroReference{};
};

/// Q = +1 iff |phi| > w.
struct WindowBand {
  double w = 0.0;
};

using ProjectionScheme = std::variant<SignThreshold, WindowBand>;

inline void validate(const ProjectionScheme& scheme) {
  if (const auto* band = std::get_if<WindowBand>(&scheme)) {
    if (!(band->w >= 0.0) || !std::isfinite(band->w)) {
      throw ConfigError("scheme.w must be >= 0");
    }
  }
  if (const auto* sign = std::get_if<SignThreshold>(&scheme)) {
    if (const auto* me = std::get_if<MinusEReference>(&sign->reference)) {
      if (!(me->xi >= 0.0)) throw ConfigError("scheme.reference.xi must be >= 0");
      if (!(me->ell > 0.0)) throw ConfigError("scheme.reference.ell must be > 0");
    }
  }
}

struct Thresholds {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

struct QuasiProbResult {
  double q = 0.0;
  double est_error = 0.0;
  double residual_imag = 0.0;  // Im of the assembled value before taking Re
  EngineUsed engine_used = EngineUsed::Polar;
  KernelSet kernels;
};

namespace qp {

namespace detail {

inline constexpr double kPi = specfun::kPi;
inline constexpr double kSqrtPi = specfun::kSqrtPi;

/// Quadrant mass of the complex Gaussian with covariance [[a1, c],[c, a2]]
/// (c already carries s1 s2) and real mean (mu1, mu2).
struct Orthant {
  cplx a1;
  cplx a2;
  cplx c;
  double mu1;
  double mu2;

  cplx det() const { return a1 * a2 - c * c; }
};

struct Partial {
  cplx value;
  double error = 0.0;
};

inline cplx sqrt_det(const cplx& det) {
  const cplx root = std::sqrt(det);
  // Positive-definite Re V keeps the root in the open right half plane.
  if (!(root.real() > 0.0)) {
    throw DegenerateKernel("sqrt(det) left the right half plane: det = (" +
                           std::to_string(det.real()) + ", " + std::to_string(det.imag()) + ")");
  }
  return root;
}

inline void require_nondegenerate(const Orthant& o, double eps_det) {
  if (std::abs(o.det()) <= eps_det * std::abs(o.a1 * o.a2)) {
    throw DegenerateKernel("covariance determinant vanishes (coincident times)");
  }
}

inline quad::Options options_from(const QuadratureConfig& cfg, double scale = 1.0) {
  quad::Options opt;
  opt.abs_tol = cfg.abs_tol * scale;
  opt.rel_tol = cfg.rel_tol;
  opt.max_intervals = cfg.max_subdiv;
  return opt;
}

// Radial integral done in closed form, leaving a smooth integrand on
// u in [0, pi/2]:
//   int_0^inf c e^{-k c^2 + 2 h c} dc = 1/(2k) + (sqrt(pi)/2) h k^{-3/2} e^{h^2/k} erfc(-h/sqrt k)
// with k = alpha(u)/(2 det), h = beta(u)/(2 det).
inline Partial polar(const Orthant& o, const QuadratureConfig& cfg, const char* who) {
  const cplx det = o.det();
  const cplx root = sqrt_det(det);
  const cplx two_det = 2.0 * det;
  const cplx gamma = o.a2 * o.mu1 * o.mu1 + o.a1 * o.mu2 * o.mu2 - 2.0 * o.c * o.mu1 * o.mu2;
  const cplx offset = -gamma / two_det;
  const cplx e_offset = std::exp(offset);
  const cplx norm = 1.0 / (2.0 * kPi * root);
  const bool centred = o.mu1 == 0.0 && o.mu2 == 0.0;

  auto integrand = [&](double u) -> cplx {
    const double cu = std::cos(u);
    const double su = std::sin(u);
    const cplx alpha = o.a2 * (cu * cu) + o.a1 * (su * su) - o.c * (2.0 * su * cu);
    const cplx k = alpha / two_det;
    cplx radial = e_offset / (2.0 * k);
    if (!centred) {
      const cplx beta = (o.a2 * o.mu1 - o.c * o.mu2) * cu + (o.a1 * o.mu2 - o.c * o.mu1) * su;
      const cplx h = beta / two_det;
      const cplx sk = std::sqrt(k);
      const cplx x = h / sk;
      // e^{offset} e^{x^2} erfc(-x), kept bounded on both sides of Re x = 0
      cplx tail;
      if (x.real() <= 0.0) {
        tail = e_offset * specfun::faddeeva(cplx{x.imag(), -x.real()});
      } else {
        tail = 2.0 * std::exp(x * x + offset) - e_offset * specfun::faddeeva(cplx{-x.imag(), x.real()});
      }
      radial += 0.5 * kSqrtPi * h / (k * sk) * tail;
    }
    return norm * radial;
  };

  const auto res = quad::integrate(integrand, 0.0, kPi / 2.0, options_from(cfg));
  if (!res.converged) {
    throw QuadratureFailure(std::string(who) + ": polar engine exhausted " +
                            std::to_string(cfg.max_subdiv) + " subdivisions (error " +
                            std::to_string(res.error) + ")");
  }
  return {res.value, res.error};
}

/// P(s (Y - threshold) > 0) for a single time.
inline cplx marginal(cplx a, double mean, int s, double threshold) {
  return 0.5 * specfun::erfc(-static_cast<double>(s) * (mean - threshold) / std::sqrt(2.0 * a));
}

// A mean deep inside the quadrant concentrates the angular integrand into a
// sliver of width ~sigma/|mu|. Reflecting each positive-mean axis,
//   P(Y1>0, Y2>0) = P(Y2>0) - P(-Y1>0, Y2>0),
// leaves only quadrants whose mean lies outside, where f(u) is spread out.
inline Partial polar_reflected(const Orthant& o, const QuadratureConfig& cfg, const char* who) {
  if (o.mu1 > 0.0) {
    const Orthant flipped{o.a1, o.a2, -o.c, -o.mu1, o.mu2};
    const Partial rest = polar_reflected(flipped, cfg, who);
    return {marginal(o.a2, o.mu2, 1, 0.0) - rest.value, rest.error};
  }
  if (o.mu2 > 0.0) {
    const Orthant flipped{o.a1, o.a2, -o.c, o.mu1, -o.mu2};
    const Partial rest = polar_reflected(flipped, cfg, who);
    return {marginal(o.a1, o.mu1, 1, 0.0) - rest.value, rest.error};
  }
  return polar(o, cfg, who);
}

inline Partial cartesian(const Orthant& o, const QuadratureConfig& cfg, const char* who) {
  const cplx det = o.det();
  const cplx root = sqrt_det(det);
  // V^{-1} = [[a2, -c], [-c, a1]] / det
  const cplx p11 = o.a2 / det;
  const cplx p22 = o.a1 / det;
  const cplx p12 = -o.c / det;

  // |integrand| = |norm| exp(-(y-mu)^T R (y-mu)/2) with R = Re V^{-1}.
  const double r11 = p11.real();
  const double r22 = p22.real();
  const double r12 = p12.real();
  const double r_det = r11 * r22 - r12 * r12;
  if (!(r11 > 0.0) || !(r22 > 0.0) || !(r_det > 0.0)) {
    throw DegenerateKernel(std::string(who) + ": Re V^{-1} is not positive definite");
  }
  const double scale1 = std::sqrt(r22 / r_det);  // sqrt((R^{-1})_11)
  const double scale2 = std::sqrt(r11 / r_det);
  const double lambda_min = 0.5 * (r11 + r22) - std::sqrt(0.25 * (r11 - r22) * (r11 - r22) + r12 * r12);
  const double t = cfg.trunc_sigmas;
  const double norm_abs = 1.0 / (2.0 * kPi * std::abs(root));
  // Mass of the majorant outside the box, per axis.
  const double tail_bound =
      norm_abs * (2.0 * kPi / std::sqrt(r_det)) * std::erfc(t / std::sqrt(2.0)) *
      std::max(1.0, std::sqrt(r_det) / lambda_min);

  // Box of +-t sigma around the mean, clipped to the quadrant.
  const double lower1 = std::max(o.mu1 - t * scale1, 0.0);
  const double lower2 = std::max(o.mu2 - t * scale2, 0.0);
  const double upper1 = o.mu1 + t * scale1;
  const double upper2 = o.mu2 + t * scale2;
  if (upper1 <= lower1 || upper2 <= lower2) {
    return {cplx{0.0, 0.0}, 2.0 * tail_bound};
  }
  const double width1 = upper1 - lower1;

  const cplx norm = 1.0 / (2.0 * kPi * root);
  // Inner integrals get a share of the tolerance proportional to 1/width1.
  const double raw_tol = 1.0 / std::max(norm_abs, 1e-300);
  quad::Options inner_opt = options_from(cfg, 0.25 * raw_tol / width1);
  quad::Options outer_opt = options_from(cfg, 0.5 * raw_tol);
  inner_opt.rel_tol = std::min(cfg.rel_tol, 1e-9);

  double inner_error = 0.0;
  bool inner_ok = true;
  auto inner = [&](double y1) -> cplx {
    const double d1 = y1 - o.mu1;
    auto f = [&](double y2) -> cplx {
      const double d2 = y2 - o.mu2;
      return std::exp(-0.5 * (p11 * (d1 * d1) + p22 * (d2 * d2) + 2.0 * p12 * (d1 * d2)));
    };
    const auto res = quad::integrate(f, lower2, upper2, inner_opt);
    inner_ok = inner_ok && res.converged;
    inner_error = std::max(inner_error, res.error);
    return res.value;
  };
  const auto res = quad::integrate(inner, lower1, upper1, outer_opt);
  if (!res.converged || !inner_ok) {
    throw QuadratureFailure(std::string(who) + ": cartesian engine exhausted " +
                            std::to_string(cfg.max_subdiv) + " subdivisions");
  }
  const double error = norm_abs * (res.error + inner_error * width1) + 2.0 * tail_bound;
  return {norm * res.value, error};
}

inline Partial orthant(const Orthant& o, const QuadratureConfig& cfg, bool use_cartesian,
                       const char* who) {
  require_nondegenerate(o, cfg.eps_det);
  return use_cartesian ? cartesian(o, cfg, who) : polar_reflected(o, cfg, who);
}

inline Orthant sign_orthant(const KernelSet& k, int s1, int s2, const Thresholds& th) {
  return {k.a1, k.a2, static_cast<double>(s1 * s2) * k.b, s1 * (k.e1 - th.phi1),
          s2 * (k.e2 - th.phi2)};
}

inline QuasiProbResult finish(const Partial& p, EngineUsed used, const KernelSet& k) {
  return {p.value.real(), p.error, p.value.imag(), used, k};
}

}  // namespace detail

/// Sign-projector q by adaptive 2D quadrature over the positive quadrant.
inline QuasiProbResult qp_sign_cartesian(const KernelSet& kernels, const QuasiProbQuery& query,
                                         const QuadratureConfig& cfg, const Thresholds& th = {}) {
  const auto o = detail::sign_orthant(kernels, query.s1, query.s2, th);
  return detail::finish(detail::orthant(o, cfg, true, "qp_sign_cartesian"), EngineUsed::Cartesian,
                        kernels);
}

/// Sign-projector q through the polar reduction: one smooth integral over
/// the quadrant angle.
inline QuasiProbResult qp_sign_polar(const KernelSet& kernels, const QuasiProbQuery& query,
                                     const QuadratureConfig& cfg, const Thresholds& th = {}) {
  const auto o = detail::sign_orthant(kernels, query.s1, query.s2, th);
  return detail::finish(detail::orthant(o, cfg, false, "qp_sign_polar"), EngineUsed::Polar,
                        kernels);
}

/// P(s (phi - threshold) > 0) for a single time.
inline double single_time_marginal(cplx a, double mean, int s, double threshold) {
  return detail::marginal(a, mean, s, threshold).real();
}

/// Window-band projector P_s = theta(s(phi - w)) + theta(-s(phi + w)) + (s-1)/2.
/// The product of two such projectors expands into four orthant terms, two
/// single-time marginals scaled by (s-1)/2 and a constant.
inline QuasiProbResult qp_window(const KernelSet& kernels, double w, const QuasiProbQuery& query,
                                 const QuadratureConfig& cfg) {
  if (!(w >= 0.0)) {
    throw ConfigError("window half-width w must be >= 0");
  }
  const bool use_cartesian = cfg.engine == Engine::Cartesian;
  const int s1 = query.s1;
  const int s2 = query.s2;
  // theta(sign (phi - threshold)) pieces of each projector
  const std::array<std::pair<int, double>, 2> pieces1{{{s1, w}, {-s1, -w}}};
  const std::array<std::pair<int, double>, 2> pieces2{{{s2, w}, {-s2, -w}}};

  cplx total{0.0, 0.0};
  double error = 0.0;
  for (const auto& [g1, h1] : pieces1) {
    for (const auto& [g2, h2] : pieces2) {
      const detail::Orthant o{kernels.a1, kernels.a2, static_cast<double>(g1 * g2) * kernels.b,
                              g1 * (kernels.e1 - h1), g2 * (kernels.e2 - h2)};
      const auto part = detail::orthant(o, cfg, use_cartesian, "qp_window");
      total += part.value;
      error += part.error;
    }
  }
  if (s2 == -1) {
    total -= detail::marginal(kernels.a1, kernels.e1, s1, w) +
             detail::marginal(kernels.a1, kernels.e1, -s1, -w);
  }
  if (s1 == -1) {
    total -= detail::marginal(kernels.a2, kernels.e2, s2, w) +
             detail::marginal(kernels.a2, kernels.e2, -s2, -w);
  }
  total += 0.25 * (s1 - 1) * (s2 - 1);
  return {total.real(), error, total.imag(), EngineUsed::Window, kernels};
}

inline Thresholds thresholds_for(const FieldModel& model, const ThresholdReference& ref, double t1,
                                 double t2) {
  return std::visit(
      [&](const auto& r) -> Thresholds {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ZeroReference>) {
          return {};
        } else if constexpr (std::is_same_v<R, MinusEReference>) {
          StateSpec mode;
          mode.xi = r.xi;
          mode.ell = r.ell;
          mode.alpha = r.alpha;
          return {-kernels::coherent_mean(model, mode, t1), -kernels::coherent_mean(model, mode, t2)};
        } else {
          return {r.phi1, r.phi2};
        }
      },
      ref);
}

using KernelProvider = std::function<KernelSet(double t1, double t2)>;

/// Scheme dispatch on kernels supplied by `provider`; the provider is called
/// again at shifted times when the covariance is degenerate.
inline QuasiProbResult evaluate(const FieldModel& model, const KernelProvider& provider,
                                const ProjectionScheme& scheme, const QuasiProbQuery& query,
                                const QuadratureConfig& cfg) {
  query.validate();
  double t2 = query.t2;
  KernelSet k = provider(query.t1, t2);
  bool shifted = false;
  if (std::abs(k.det) <= cfg.eps_det * std::abs(k.a1 * k.a2)) {
    if (!cfg.degenerate_shift) {
      throw DegenerateKernel("coincident times t1 = " + std::to_string(query.t1) +
                             ", t2 = " + std::to_string(query.t2) + " and degenerate shift disabled");
    }
    const double eps = cfg.degenerate_shift_L * model.L;
    t2 = query.t2 >= query.t1 ? query.t1 + eps : query.t1 - eps;
    k = provider(query.t1, t2);
    shifted = true;
  }
  QuasiProbQuery q = query;
  q.t2 = t2;

  QuasiProbResult out;
  if (const auto* band = std::get_if<WindowBand>(&scheme)) {
    out = qp_window(k, band->w, q, cfg);
  } else {
    const auto& sign = std::get<SignThreshold>(scheme);
    const Thresholds th = thresholds_for(model, sign.reference, q.t1, q.t2);
    out = cfg.engine == Engine::Cartesian ? qp_sign_cartesian(k, q, cfg, th)
                                          : qp_sign_polar(k, q, cfg, th);
  }
  if (shifted) {
    out.engine_used = EngineUsed::DegenerateLimit;
  }
  return out;
}

inline QuasiProbResult quasi_prob(const FieldModel& model, const StateSpec& state,
                                  const ProjectionScheme& scheme, const QuasiProbQuery& query,
                                  const QuadratureConfig& cfg = {}) {
  auto provider = [&](double t1, double t2) { return kernels::kernel_set(model, state, t1, t2); };
  return evaluate(model, provider, scheme, query, cfg);
}

struct Correlators {
  double mean1 = 0.0;     // <Q(t1)>
  double mean2 = 0.0;     // <Q(t2)>
  double sym_corr = 0.0;  // <{Q(t1), Q(t2)}>/2
  double total = 0.0;     // sum of the four q, 1 by completeness
  double est_error = 0.0;
};

inline Correlators lg_correlators(const FieldModel& model, const StateSpec& state,
                                  const ProjectionScheme& scheme, double t1, double t2,
                                  const QuadratureConfig& cfg = {}) {
  Correlators c;
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const auto r = quasi_prob(model, state, scheme, {s1, s2, t1, t2}, cfg);
      c.mean1 += s1 * r.q;
      c.mean2 += s2 * r.q;
      c.sym_corr += s1 * s2 * r.q;
      c.total += r.q;
      c.est_error += r.est_error;
    }
  }
  return c;
}

}  // namespace qp
}  // namespace lgq
