#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lgq/quasiprob.hpp"

using namespace lgq;

namespace {

constexpr double kPi = 3.14159265358979323846;

QuadratureConfig with_engine(Engine e) {
  QuadratureConfig cfg;
  cfg.engine = e;
  return cfg;
}

double orthant_value(double rho, int s1, int s2) { return 0.25 + std::asin(s1 * s2 * rho) / (2 * kPi); }

StateSpec random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StateSpec s;
  s.xi = 10.0 * u(rng);
  s.ell = 1.0;
  s.alpha = 2 * kPi * u(rng);
  s.r = u(rng) < 0.5 ? 0.0 : 0.8 * u(rng);
  s.theta = 2 * kPi * u(rng);
  return s;
}

}  // namespace

TEST(SignEngines, OrthantRealCorrelation) {
  const auto k = KernelSet::from(1.0, 1.0, 0.5, 0.0, 0.0);
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const QuasiProbQuery q{s1, s2, 0.0, 1.0};
      const double want = orthant_value(0.5, s1, s2);
      EXPECT_NEAR(qp::qp_sign_polar(k, q, {}).q, want, 1e-9);
      EXPECT_NEAR(qp::qp_sign_cartesian(k, q, {}).q, want, 1e-8);
    }
  }
}

TEST(SignEngines, IndependentQuadrants) {
  const auto k = KernelSet::from(2.0, 0.5, 0.0, 0.0, 0.0);
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      EXPECT_NEAR(qp::qp_sign_polar(k, {s1, s2, 0, 1}, {}).q, 0.25, 1e-12);
      EXPECT_NEAR(qp::qp_sign_cartesian(k, {s1, s2, 0, 1}, {}).q, 0.25, 1e-9);
    }
  }
}

TEST(SignEngines, ShiftedIndependentMeans) {
  // b = 0 with means: product of single-time tails
  const auto k = KernelSet::from(1.0, 4.0, 0.0, 0.7, -1.1);
  const double p1 = 0.5 * std::erfc(-0.7 / std::sqrt(2.0));
  const double p2 = 0.5 * std::erfc(1.1 / std::sqrt(8.0));
  EXPECT_NEAR(qp::qp_sign_polar(k, {1, 1, 0, 1}, {}).q, p1 * p2, 1e-9);
  EXPECT_NEAR(qp::qp_sign_cartesian(k, {1, -1, 0, 1}, {}).q, p1 * (1 - p2), 1e-8);
}

TEST(SignEngines, CartesianMatchesPolarRandomDraws) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto kind : {FieldKind::Scalar3D, FieldKind::Chiral1D}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const FieldModel m{kind, 0.5 + 4.0 * u(rng)};
      const auto s = random_state(rng);
      const double t1 = 3.0 * u(rng);
      const double t2 = t1 + 0.05 + 5.0 * u(rng);
      const int s1 = u(rng) < 0.5 ? 1 : -1;
      const int s2 = u(rng) < 0.5 ? 1 : -1;
      const auto k = kernels::kernel_set(m, s, t1, t2);
      const double p = qp::qp_sign_polar(k, {s1, s2, t1, t2}, {}).q;
      const double c = qp::qp_sign_cartesian(k, {s1, s2, t1, t2}, {}).q;
      worst = std::max(worst, std::abs(p - c));
    }
    EXPECT_LT(worst, 1e-6) << to_string(kind);
  }
}

TEST(SignEngines, SqueezedCoherentCrossEngine) {
  const FieldModel m{FieldKind::Scalar3D, 10.0 / 3.0};
  StateSpec s;
  s.xi = 8.0;
  s.r = 0.5;
  const auto k = kernels::kernel_set(m, s, 0.0, 2.0);
  const QuasiProbQuery q{-1, 1, 0.0, 2.0};
  EXPECT_NEAR(qp::qp_sign_polar(k, q, {}).q, qp::qp_sign_cartesian(k, q, {}).q, 1e-6);
}

TEST(QuasiProb, VacuumFactorisesAtLargeSeparation) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      EXPECT_NEAR(qp::quasi_prob(m, {}, SignThreshold{}, {s1, s2, 0.0, 20.0}).q, 0.25, 1e-3);
    }
  }
}

TEST(QuasiProb, CompletenessAllSchemes) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const QuadratureConfig cfg;
  for (int i = 0; i < 20; ++i) {
    const FieldModel m{i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D, 0.5 + 3.0 * u(rng)};
    const auto s = random_state(rng);
    const double t2 = 0.1 + 4.0 * u(rng);
    for (const ProjectionScheme& scheme :
         {ProjectionScheme{SignThreshold{}}, ProjectionScheme{WindowBand{0.6 * u(rng) / m.L}}}) {
      const auto c = qp::lg_correlators(m, s, scheme, 0.0, t2, cfg);
      EXPECT_NEAR(c.total, 1.0, 4 * cfg.abs_tol);
    }
  }
}

TEST(QuasiProb, MarginalIndependentOfSecondTime) {
  const FieldModel m{FieldKind::Scalar3D, 2.0};
  StateSpec s;
  s.xi = 5.0;
  s.r = 0.2;
  const auto k1 = kernels::kernel_set(m, s, 0.3, 0.3);
  const double single = qp::single_time_marginal(k1.a1, k1.e1, 1, 0.0);
  for (double t2 : {0.5, 1.7, 4.0}) {
    const double sum = qp::quasi_prob(m, s, SignThreshold{}, {1, 1, 0.3, t2}).q +
                       qp::quasi_prob(m, s, SignThreshold{}, {1, -1, 0.3, t2}).q;
    EXPECT_NEAR(sum, single, 2e-9);
  }
}

TEST(QuasiProb, ExchangeSymmetry) {
  const FieldModel m{FieldKind::Chiral1D, 1.0};
  StateSpec s;
  s.xi = 3.0;
  s.ell = 2.0;
  s.r = 0.4;
  s.theta = 0.7;
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const double a = qp::quasi_prob(m, s, SignThreshold{}, {s1, s2, 0.2, 1.5}).q;
      const double b = qp::quasi_prob(m, s, SignThreshold{}, {s2, s1, 1.5, 0.2}).q;
      EXPECT_NEAR(a, b, 1e-8);
      const double wa = qp::quasi_prob(m, s, WindowBand{0.3}, {s1, s2, 0.2, 1.5}).q;
      const double wb = qp::quasi_prob(m, s, WindowBand{0.3}, {s2, s1, 1.5, 0.2}).q;
      EXPECT_NEAR(wa, wb, 1e-8);
    }
  }
}

TEST(QuasiProb, SignFlipSymmetryWithoutDisplacement) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  StateSpec s;
  s.r = 0.6;
  s.theta = 1.1;
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const double a = qp::quasi_prob(m, s, SignThreshold{}, {s1, s2, 0.0, 1.3}).q;
      const double b = qp::quasi_prob(m, s, SignThreshold{}, {-s1, -s2, 0.0, 1.3}).q;
      EXPECT_NEAR(a, b, 1e-8);
    }
  }
}

TEST(QuasiProb, WindowBandHasNoSignFlipSymmetry) {
  // q_{++} + q_{+-} = P(|phi| > w) while q_{--} + q_{-+} = P(|phi| < w)
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  const auto pp = qp::lg_correlators(m, {}, WindowBand{0.05}, 0.0, 1.3);
  EXPECT_GT(std::abs(pp.mean1), 0.1);
}

TEST(SignEngines, MeanDeepInsideQuadrant) {
  const auto base = kernels::kernel_set({FieldKind::Scalar3D, 1.0}, {}, 0.0, 1.2);
  for (double mu : {30.0, 628.0, 1e4}) {
    const auto inside = KernelSet::from(base.a1, base.a2, base.b, mu, mu);
    EXPECT_NEAR(qp::qp_sign_polar(inside, {1, 1, 0, 1}, {}).q, 1.0, 1e-9);
    EXPECT_NEAR(qp::qp_sign_cartesian(inside, {1, 1, 0, 1}, {}).q, 1.0, 1e-8);
    const auto edge = KernelSet::from(base.a1, base.a2, base.b, mu, 0.0);
    EXPECT_NEAR(qp::qp_sign_polar(edge, {1, 1, 0, 1}, {}).q, 0.5, 1e-9);
    EXPECT_NEAR(qp::qp_sign_cartesian(edge, {1, 1, 0, 1}, {}).q, 0.5, 1e-8);
  }
}

TEST(QuasiProb, CoherentEquivalentToShiftedVacuumThreshold) {
  for (auto kind : {FieldKind::Scalar3D, FieldKind::Chiral1D}) {
    const FieldModel m{kind, 2.0};
    StateSpec coherent;
    coherent.xi = 6.0;
    coherent.ell = 1.3;
    coherent.alpha = 0.4;
    const SignThreshold shifted{MinusEReference{6.0, 1.3, 0.4}};
    for (double t2 : {0.7, 2.2}) {
      const double a = qp::quasi_prob(m, coherent, SignThreshold{}, {-1, 1, 0.0, t2}).q;
      const double b = qp::quasi_prob(m, StateSpec{}, shifted, {-1, 1, 0.0, t2}).q;
      EXPECT_NEAR(a, b, 1e-9);
    }
  }
}

TEST(QuasiProb, TabulatedReference) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  StateSpec coherent;
  coherent.xi = 4.0;
  const double e1 = kernels::coherent_mean(m, coherent, 0.0);
  const double e2 = kernels::coherent_mean(m, coherent, 1.0);
  const double a = qp::quasi_prob(m, coherent, SignThreshold{}, {1, 1, 0.0, 1.0}).q;
  const double b = qp::quasi_prob(m, {}, SignThreshold{TabulatedReference{-e1, -e2}}, {1, 1, 0.0, 1.0}).q;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(QuasiProb, TinySqueezeMatchesCoherent) {
  const FieldModel m{FieldKind::Scalar3D, 10.0 / 3.0};
  StateSpec s;
  s.xi = 8.0;
  const double a = qp::quasi_prob(m, s, SignThreshold{}, {-1, 1, 0.0, 2.0}).q;
  s.r = 1e-12;
  const double b = qp::quasi_prob(m, s, SignThreshold{}, {-1, 1, 0.0, 2.0}).q;
  EXPECT_NEAR(a, b, 1e-8);
}

TEST(QuasiProb, NearCoincidence) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  StateSpec s;
  s.xi = 2.0;
  const double t = 0.4;
  const double eps = 1e-4 * m.L;
  const auto k = kernels::kernel_set(m, s, t, t);
  for (int sg : {1, -1}) {
    const double same = qp::quasi_prob(m, s, SignThreshold{}, {sg, sg, t, t + eps}).q;
    const double cross = qp::quasi_prob(m, s, SignThreshold{}, {sg, -sg, t, t + eps}).q;
    EXPECT_LT(std::abs(cross), 5e-3);
    EXPECT_NEAR(same, qp::single_time_marginal(k.a1, k.e1, sg, 0.0), 5e-3);
  }
}

TEST(QuasiProb, DegeneratePath) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  const auto r = qp::quasi_prob(m, {}, SignThreshold{}, {1, 1, 0.5, 0.5});
  EXPECT_EQ(r.engine_used, EngineUsed::DegenerateLimit);
  EXPECT_NEAR(r.q, 0.5, 2e-3);
  QuadratureConfig cfg;
  cfg.degenerate_shift = false;
  EXPECT_THROW(qp::quasi_prob(m, {}, SignThreshold{}, {1, 1, 0.5, 0.5}, cfg), DegenerateKernel);
  EXPECT_THROW(qp::qp_sign_polar(kernels::kernel_set(m, {}, 0.5, 0.5), {1, 1, 0.5, 0.5}, {}),
               DegenerateKernel);
}

TEST(QuasiProb, EngineReported) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  EXPECT_EQ(qp::quasi_prob(m, {}, SignThreshold{}, {1, 1, 0, 1}).engine_used, EngineUsed::Polar);
  EXPECT_EQ(qp::quasi_prob(m, {}, SignThreshold{}, {1, 1, 0, 1}, with_engine(Engine::Cartesian)).engine_used,
            EngineUsed::Cartesian);
  EXPECT_EQ(qp::quasi_prob(m, {}, WindowBand{0.1}, {1, 1, 0, 1}).engine_used, EngineUsed::Window);
}

TEST(QuasiProb, ReportsImaginaryResidual) {
  const FieldModel m{FieldKind::Scalar3D, 3.0};
  StateSpec s;
  s.xi = 8.0;
  const auto r = qp::quasi_prob(m, s, SignThreshold{}, {-1, 1, 0.0, 2.0});
  EXPECT_GT(std::abs(r.residual_imag), 1e-4);
  EXPECT_GE(r.est_error, 0.0);
}

TEST(QuasiProb, BudgetExhaustionThrows) {
  QuadratureConfig cfg;
  cfg.max_subdiv = 1;
  cfg.abs_tol = 1e-15;
  cfg.rel_tol = 1e-15;
  const FieldModel m{FieldKind::Scalar3D, 3.0};
  StateSpec s;
  s.xi = 8.0;
  EXPECT_THROW(qp::quasi_prob(m, s, SignThreshold{}, {-1, 1, 0.0, 2.0}, cfg), QuadratureFailure);
}

TEST(Window, ZeroWidthIsCertain) {
  const FieldModel m{FieldKind::Chiral1D, 1.0};
  StateSpec s;
  s.r = 0.3;
  EXPECT_NEAR(qp::quasi_prob(m, s, WindowBand{0.0}, {1, 1, 0.0, 1.2}).q, 1.0, 1e-9);
  EXPECT_NEAR(qp::quasi_prob(m, s, WindowBand{0.0}, {-1, -1, 0.0, 1.2}).q, 0.0, 1e-9);
}

TEST(Window, WideBandIsCertainMinus) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  const double w = 100.0 / std::sqrt(kernels::kernel_A(m));
  EXPECT_NEAR(qp::quasi_prob(m, {}, WindowBand{w}, {-1, -1, 0.0, 1.2}).q, 1.0, 1e-9);
  EXPECT_NEAR(qp::quasi_prob(m, {}, WindowBand{w}, {1, -1, 0.0, 1.2}).q, 0.0, 1e-9);
}

TEST(Window, CartesianAgrees) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  StateSpec s;
  s.r = 0.3;
  for (int s1 : {1, -1}) {
    const double a = qp::quasi_prob(m, s, WindowBand{0.2}, {s1, 1, 0.0, 1.0}).q;
    const double b = qp::quasi_prob(m, s, WindowBand{0.2}, {s1, 1, 0.0, 1.0}, with_engine(Engine::Cartesian)).q;
    EXPECT_NEAR(a, b, 1e-6);
  }
}

TEST(Window, SqueezedThreeDimensionalNegativity) {
  const FieldModel m{FieldKind::Scalar3D, 1.0};
  StateSpec s;
  s.r = 0.3;
  double best = 1.0;
  for (double t2 = 0.5; t2 <= 2.0; t2 += 0.01) {
    best = std::min(best, qp::quasi_prob(m, s, WindowBand{0.2}, {1, 1, 0.0, t2}).q);
  }
  EXPECT_LT(best, -0.03);
}

TEST(Config, Validation) {
  QuadratureConfig cfg;
  cfg.trunc_sigmas = 5.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW((QuasiProbQuery{2, 1, 0, 1}.validate()), ConfigError);
  EXPECT_THROW((QuasiProbQuery{1, 1, -1, 1}.validate()), ConfigError);
  EXPECT_THROW(validate(ProjectionScheme{WindowBand{-0.1}}), ConfigError);
}
