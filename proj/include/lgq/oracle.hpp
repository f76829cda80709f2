#pragma once

// Slow, independent validators for the closed-form kernels and the engines.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "lgq/errors.hpp"
#include "lgq/kernels.hpp"
#include "lgq/quasiprob.hpp"

namespace lgq::oracle {

/// Zero-mean quadrant mass by analytic continuation of the bivariate-normal
/// orthant formula 1/4 + asin(rho)/(2 pi).
inline double orthant_q(cplx a1, cplx a2, cplx b, int s1, int s2) {
  const cplx ratio = b * b / (a1 * a2);
  if (std::abs(ratio - 1.0) < 1e-12) {
    throw BranchAmbiguity("orthant_q: |rho| = 1, the arcsin branch point");
  }
  const cplx rho = static_cast<double>(s1 * s2) * b / std::sqrt(a1 * a2);
  return (0.25 + std::asin(rho) / (2.0 * specfun::kPi)).real();
}

/// Midpoint sampling of the radial mode integral: bin j sits at
/// k_j = (j + 1/2) dk, and `norm` is the model prefactor. The spectral
/// density starts linearly at k = 0, so plain midpoint weights leave an
/// O(dk^2) endpoint error; the first two weights carry its Euler-Maclaurin
/// correction -dk^2 f'(0)/24 ~ dk (f(k_0) - f(k_1))/24.
struct DiscretizedField {
  int n_modes = 256;
  double k_max = 12.0;
  double norm = 0.0;
  std::vector<double> k;
  std::vector<double> weights;

  static DiscretizedField make(const FieldModel& model, int n_modes, double k_max_times_L) {
    if (n_modes < 2) throw ConfigError("discretized field needs n_modes >= 2");
    if (!(k_max_times_L > 0.0)) throw ConfigError("discretized field needs k_max > 0");
    DiscretizedField f;
    f.n_modes = n_modes;
    f.k_max = k_max_times_L / model.L;
    f.norm = model.kind == FieldKind::Scalar3D ? 1.0 / (4.0 * specfun::kPi * specfun::kPi)
                                               : 1.0 / (4.0 * specfun::kPi);
    const double dk = f.k_max / n_modes;
    for (int j = 0; j < n_modes; ++j) {
      f.k.push_back((j + 0.5) * dk);
      f.weights.push_back(dk);
    }
    f.weights[0] *= 25.0 / 24.0;
    f.weights[1] *= 23.0 / 24.0;
    return f;
  }
};

namespace detail {

// Second moments of the mode pair (a_k, a_{-k}) after the two-mode squeeze
// S^dag a_k S = cosh r a_k - e^{i theta} sinh r a_{-k}^dag.
struct PairMoments {
  double aad;      // <a a^dag>
  double ada;      // <a^dag a>
  cplx pair;       // <a_k a_{-k}>

  static PairMoments of(double r, double theta) {
    const double c = std::cosh(r);
    const double s = std::sinh(r);
    return {c * c, s * s, -std::polar(c * s, theta)};
  }
};

}  // namespace detail

/// Kernels rebuilt mode by mode: each bin contributes a (k, -k) pair whose
/// field amplitude g_k^2 = norm k e^{-L^2 k^2/2} dk multiplies e^{-ikt}, and
/// the Wightman function is contracted from the pair moments above.
inline KernelSet discretized_kernels(const DiscretizedField& field, const FieldModel& model,
                                     const StateSpec& state, double t1, double t2) {
  const auto mom = detail::PairMoments::of(state.r, state.theta);
  auto wightman = [&](double ta, double tb) {  // <phi(ta) phi(tb)>
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < field.k.size(); ++j) {
      const double k = field.k[j];
      const double g2 = field.norm * k * std::exp(-0.5 * model.L * model.L * k * k) * field.weights[j];
      const cplx ua = std::polar(1.0, -k * ta);
      const cplx ub = std::polar(1.0, -k * tb);
      // <a a^dag> u_a conj(u_b) + <a^dag a> conj(u_a) u_b, plus the pair
      // correlators <a_k a_{-k}> u_a u_b and their conjugates
      const cplx stationary = mom.aad * ua * std::conj(ub) + mom.ada * std::conj(ua) * ub;
      const cplx paired = mom.pair * ua * ub + std::conj(mom.pair * ua * ub);
      sum += g2 * (stationary + paired);
    }
    return sum;
  };
  const double e1 = kernels::coherent_mean(model, state, t1);
  const double e2 = kernels::coherent_mean(model, state, t2);
  return KernelSet::from(wightman(t1, t1), wightman(t2, t2), wightman(t2, t1), e1, e2);
}

/// q on the discretized field, through the same engines as the continuum.
inline double discretized_q(const DiscretizedField& field, const FieldModel& model,
                            const StateSpec& state, const ProjectionScheme& scheme,
                            const QuasiProbQuery& query, const QuadratureConfig& cfg = {}) {
  auto provider = [&](double t1, double t2) {
    return discretized_kernels(field, model, state, t1, t2);
  };
  return qp::evaluate(model, provider, scheme, query, cfg).q;
}

}  // namespace lgq::oracle
