#pragma once

// Self-check suite behind `lgq verify`: closed-form kernels against mode-space
// quadrature, engine cross-checks, probability sum rules and symmetries, the
// orthant formula and (at level full) the discretized field.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lgq/errors.hpp"
#include "lgq/kernels.hpp"
#include "lgq/oracle.hpp"
#include "lgq/quasiprob.hpp"

namespace lgq::verify {

enum class Level { Quick, Full };

using KernelFn = std::function<KernelSet(const FieldModel&, const StateSpec&, double, double)>;

struct Options {
  Level level = Level::Quick;
  std::uint64_t seed = 20240521;
  KernelFn kernels = [](const FieldModel& m, const StateSpec& s, double t1, double t2) {
    return kernels::kernel_set(m, s, t1, t2);
  };
};

struct Check {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double bound = 0.0;
  int samples = 0;
  double seconds = 0.0;
  std::string note;
};

namespace detail {

constexpr double kTwoPi = 6.283185307179586;

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int sign() { return uniform(0.0, 1.0) < 0.5 ? 1 : -1; }
  FieldModel model(FieldKind kind) { return {kind, uniform(0.3, 4.0)}; }
  StateSpec state(bool displaced, bool squeezed) {
    StateSpec s;
    s.ell = uniform(0.3, 2.0);
    if (displaced) {
      s.xi = uniform(0.0, 10.0);
      s.alpha = uniform(0.0, kTwoPi);
    }
    if (squeezed) {
      s.r = uniform(0.05, 0.8);
      s.theta = uniform(0.0, kTwoPi);
    }
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

struct Context {
  const Options& opt;
  QuadratureConfig cfg;

  QuasiProbResult q(const FieldModel& m, const StateSpec& s, const ProjectionScheme& scheme,
                    const QuasiProbQuery& query, Engine engine = Engine::Auto) const {
    QuadratureConfig c = cfg;
    c.engine = engine;
    auto provider = [&](double t1, double t2) { return opt.kernels(m, s, t1, t2); };
    return qp::evaluate(m, provider, scheme, query, c);
  }
};

template <class Body>
Check run(const std::string& name, double bound, Body body) {
  Check c;
  c.name = name;
  c.bound = bound;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
    c.pass = c.worst <= bound;
  } catch (const Error& e) {
    c.pass = false;
    c.note = e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

inline void record(Check& c, double deviation) {
  ++c.samples;
  if (!(deviation <= c.worst)) c.worst = std::isnan(deviation) ? INFINITY : deviation;
}

/// Closed-form kernels against direct mode-space quadrature, scaled by the
/// one-time variance (means by their amplitude).
inline double kernel_deviation(const KernelSet& got, const KernelSet& ref) {
  const double scale = std::abs(ref.a1);
  double dev = std::max({std::abs(got.a1 - ref.a1) / std::abs(ref.a1), std::abs(got.a2 - ref.a2) / std::abs(ref.a2),
                         std::abs(got.b - ref.b) / scale});
  const double e_scale = std::max(std::abs(ref.e1), std::abs(ref.e2));
  if (e_scale > 0.0) {
    dev = std::max(dev, std::max(std::abs(got.e1 - ref.e1), std::abs(got.e2 - ref.e2)) / e_scale);
  }
  return dev;
}

inline Check kernel_check(const Context& ctx, Draws& d, int per_model) {
  return run("kernels: closed form vs mode quadrature", 1e-8, [&](Check& c) {
    for (auto kind : {FieldKind::Scalar3D, FieldKind::Chiral1D}) {
      for (int i = 0; i < per_model; ++i) {
        const auto m = d.model(kind);
        const auto s = d.state(true, i % 5 != 0);
        const double t1 = d.uniform(0.0, 5.0);
        const double t2 = d.uniform(0.0, 5.0);
        record(c, kernel_deviation(ctx.opt.kernels(m, s, t1, t2), kernels::oracle_kernels(m, s, t1, t2)));
      }
    }
  });
}

}  // namespace detail

inline std::vector<Check> run_checks(const Options& opt) {
  using namespace detail;
  Draws d(opt.seed);
  const Context ctx{opt, QuadratureConfig{}};
  const double tol = ctx.cfg.abs_tol;
  std::vector<Check> out;

  out.push_back(kernel_check(ctx, d, opt.level == Level::Full ? 200 : 10));

  out.push_back(run("sum rule: sum_s q = 1", 4 * tol, [&](Check& c) {
    for (int i = 0; i < 24; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(i % 3 != 0, i % 4 < 2);
      const ProjectionScheme scheme =
          i % 3 == 2 ? ProjectionScheme{WindowBand{d.uniform(0.0, 0.8) / m.L}} : ProjectionScheme{SignThreshold{}};
      const double t1 = d.uniform(0.0, 3.0);
      const double t2 = t1 + d.uniform(0.05, 4.0);
      double total = 0.0;
      for (int s1 : {1, -1}) {
        for (int s2 : {1, -1}) total += ctx.q(m, s, scheme, {s1, s2, t1, t2}).q;
      }
      record(c, std::abs(total - 1.0));
    }
  }));

  out.push_back(run("exchange: q_{s1,s2}(t1,t2) = q_{s2,s1}(t2,t1)", 1e-8, [&](Check& c) {
    for (int i = 0; i < 16; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(true, i % 2 == 0);
      const ProjectionScheme scheme =
          i % 4 == 3 ? ProjectionScheme{WindowBand{d.uniform(0.0, 0.8) / m.L}} : ProjectionScheme{SignThreshold{}};
      const int s1 = d.sign();
      const int s2 = d.sign();
      const double t1 = d.uniform(0.0, 3.0);
      const double t2 = t1 + d.uniform(0.05, 4.0);
      record(c, std::abs(ctx.q(m, s, scheme, {s1, s2, t1, t2}).q - ctx.q(m, s, scheme, {s2, s1, t2, t1}).q));
    }
  }));

  out.push_back(run("sign flip: q_{s1,s2} = q_{-s1,-s2} without displacement", 1e-8, [&](Check& c) {
    for (int i = 0; i < 16; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(false, i % 4 != 0);
      const int s1 = d.sign();
      const int s2 = d.sign();
      const double t1 = d.uniform(0.0, 3.0);
      const double t2 = t1 + d.uniform(0.05, 4.0);
      record(c, std::abs(ctx.q(m, s, SignThreshold{}, {s1, s2, t1, t2}).q -
                         ctx.q(m, s, SignThreshold{}, {-s1, -s2, t1, t2}).q));
    }
  }));

  out.push_back(run("coherent state = vacuum with threshold -E(t)", 1e-9, [&](Check& c) {
    for (int i = 0; i < 16; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(true, false);
      const SignThreshold shifted{MinusEReference{s.xi, s.ell, s.alpha}};
      const QuasiProbQuery q{d.sign(), d.sign(), d.uniform(0.0, 3.0), d.uniform(3.1, 6.0)};
      record(c, std::abs(ctx.q(m, s, SignThreshold{}, q).q - ctx.q(m, StateSpec{}, shifted, q).q));
    }
  }));

  out.push_back(run("r -> 0: squeezed pipeline at r = 1e-12 = coherent", 1e-8, [&](Check& c) {
    for (int i = 0; i < 16; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      auto s = d.state(true, false);
      const QuasiProbQuery q{d.sign(), d.sign(), d.uniform(0.0, 3.0), d.uniform(3.1, 6.0)};
      const double coherent = ctx.q(m, s, SignThreshold{}, q).q;
      s.r = 1e-12;
      s.theta = d.uniform(0.0, kTwoPi);
      record(c, std::abs(ctx.q(m, s, SignThreshold{}, q).q - coherent));
    }
  }));

  out.push_back(run("engines: cartesian = polar (100 draws per model)", 1e-6, [&](Check& c) {
    for (auto kind : {FieldKind::Scalar3D, FieldKind::Chiral1D}) {
      for (int i = 0; i < 100; ++i) {
        const auto m = d.model(kind);
        const auto s = d.state(i % 4 != 3, i % 2 == 0);
        const double t1 = d.uniform(0.0, 3.0);
        const QuasiProbQuery q{d.sign(), d.sign(), t1, t1 + d.uniform(0.05, 5.0)};
        record(c, std::abs(ctx.q(m, s, SignThreshold{}, q, Engine::Polar).q -
                           ctx.q(m, s, SignThreshold{}, q, Engine::Cartesian).q));
      }
    }
  }));

  out.push_back(run("orthant formula on zero-mean draws", 1e-7, [&](Check& c) {
    for (int i = 0; i < 40; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(false, i % 3 != 0);
      const int s1 = d.sign();
      const int s2 = d.sign();
      const double t1 = d.uniform(0.0, 3.0);
      const double t2 = t1 + d.uniform(0.05, 4.0);
      const auto k = ctx.opt.kernels(m, s, t1, t2);
      const double want = oracle::orthant_q(k.a1, k.a2, k.b, s1, s2);
      record(c, std::abs(ctx.q(m, s, SignThreshold{}, {s1, s2, t1, t2}, Engine::Cartesian).q - want));
      record(c, std::abs(ctx.q(m, s, SignThreshold{}, {s1, s2, t1, t2}, Engine::Polar).q - want));
    }
  }));

  out.push_back(run("near coincidence t2 = t1 + 1e-4 L", 5e-3, [&](Check& c) {
    for (int i = 0; i < 12; ++i) {
      const auto m = d.model(i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D);
      const auto s = d.state(i % 3 != 0, i % 2 == 0);
      const double t = d.uniform(0.0, 3.0);
      const double eps = 1e-4 * m.L;
      const auto k = ctx.opt.kernels(m, s, t, t);
      for (int sg : {1, -1}) {
        record(c, std::abs(ctx.q(m, s, SignThreshold{}, {sg, -sg, t, t + eps}).q));
        const double single = qp::single_time_marginal(k.a1, k.e1, sg, 0.0);
        record(c, std::abs(ctx.q(m, s, SignThreshold{}, {sg, sg, t, t + eps}).q - single));
      }
    }
  }));

  if (opt.level == Level::Full) {
    out.push_back(run("discretized kernels (1024 modes, k_max = 16/L)", 1e-6, [&](Check& c) {
      for (auto kind : {FieldKind::Scalar3D, FieldKind::Chiral1D}) {
        const FieldModel m{kind, 1.0};
        const auto field = oracle::DiscretizedField::make(m, 1024, 16.0);
        for (int i = 0; i < 10; ++i) {
          const auto s = d.state(true, true);
          const double t1 = d.uniform(0.0, 3.0);
          const double t2 = d.uniform(0.0, 3.0);
          const auto got = oracle::discretized_kernels(field, m, s, t1, t2);
          const auto ref = ctx.opt.kernels(m, s, t1, t2);
          record(c, std::max({std::abs(got.a1 - ref.a1), std::abs(got.a2 - ref.a2), std::abs(got.b - ref.b)}));
        }
      }
    }));

    out.push_back(run("discretized q: 256 modes within 1e-3 and closer than 64 or 128", 1e-3, [&](Check& c) {
      for (int i = 0; i < 10; ++i) {
        const FieldModel m{i % 2 ? FieldKind::Chiral1D : FieldKind::Scalar3D, 1.0};
        const auto s = d.state(i % 3 == 1, i % 3 != 2);
        const ProjectionScheme scheme =
            i % 2 ? ProjectionScheme{WindowBand{d.uniform(0.1, 0.6)}} : ProjectionScheme{SignThreshold{}};
        const double t1 = d.uniform(0.0, 2.0);
        const QuasiProbQuery q{d.sign(), d.sign(), t1, t1 + d.uniform(0.3, 3.0)};
        const double cont = ctx.q(m, s, scheme, q).q;
        double coarsest = INFINITY;
        double dev = INFINITY;
        for (int n : {64, 128, 256}) {
          const auto field = oracle::DiscretizedField::make(m, n, 12.0);
          dev = std::abs(oracle::discretized_q(field, m, s, scheme, q) - cont);
          if (n < 256) coarsest = std::min(coarsest, dev);
        }
        // below 1e-9 the deviation is quadrature noise, not discretization
        if (dev >= coarsest && dev > 1e-9) {
          c.note = "256-mode deviation " + std::to_string(dev) + " not below the coarser " + std::to_string(coarsest);
          record(c, INFINITY);
        }
        record(c, dev);
      }
    }));
  }
  return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

inline void print_table(const std::vector<Check>& checks, std::ostream& out) {
  for (const auto& c : checks) {
    std::ostringstream line;
    line << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(64) << c.name << std::right
         << " worst " << std::scientific << std::setprecision(2) << c.worst << " <= " << c.bound << "  n="
         << c.samples << std::fixed << std::setprecision(1) << "  " << c.seconds << "s";
    if (!c.note.empty()) line << "  (" << c.note << ")";
    out << line.str() << "\n";
  }
}

}  // namespace lgq::verify
