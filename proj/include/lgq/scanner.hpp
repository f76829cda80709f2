#pragma once

// 2D parameter sweeps of q, violation regions and minima.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lgq/errors.hpp"
#include "lgq/quasiprob.hpp"

namespace lgq {

enum class AxisParam { EllL, EllT2, Xi, R, WL, T2OverL, Theta };

inline std::string to_string(AxisParam p) {
  switch (p) {
    case AxisParam::EllL: return "ellL";
    case AxisParam::EllT2: return "ellT2";
    case AxisParam::Xi: return "xi";
    case AxisParam::R: return "r";
    case AxisParam::WL: return "wL";
    case AxisParam::T2OverL: return "t2_over_L";
    case AxisParam::Theta: return "theta";
  }
  return "?";
}

inline AxisParam axis_param_from(const std::string& name) {
  for (auto p : {AxisParam::EllL, AxisParam::EllT2, AxisParam::Xi, AxisParam::R, AxisParam::WL,
                 AxisParam::T2OverL, AxisParam::Theta}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown axis parameter '" + name +
                    "' (expected ellL, ellT2, xi, r, wL, t2_over_L or theta)");
}

struct AxisSpec {
  AxisParam param = AxisParam::EllL;
  double min = 0.0;
  double max = 1.0;
  int n = 2;

  double value(int i) const { return min + (max - min) * i / (n - 1); }
  void validate(const std::string& where) const {
    if (n < 2) throw ConfigError(where + ".n must be >= 2");
    if (!(min < max)) throw ConfigError(where + ": min must be < max");
  }
};

/// Everything a single evaluation needs; axes overwrite individual fields.
struct ScanBase {
  FieldModel model;
  StateSpec state;
  ProjectionScheme scheme = SignThreshold{};
  QuasiProbQuery query;
  QuadratureConfig quadrature;
};

/// Applies axis values to a copy of base. ellL goes first since the
/// t2 axes are measured in units of 1/ell or L.
inline ScanBase apply_axes(ScanBase base, const std::vector<std::pair<AxisParam, double>>& values) {
  for (const auto& [p, v] : values) {
    if (p == AxisParam::EllL) base.model.L = v / base.state.ell;
  }
  for (const auto& [p, v] : values) {
    switch (p) {
      case AxisParam::EllL: break;
      case AxisParam::EllT2: base.query.t2 = v / base.state.ell; break;
      case AxisParam::Xi: base.state.xi = v; break;
      case AxisParam::R: base.state.r = v; break;
      case AxisParam::Theta: base.state.theta = v; break;
      case AxisParam::T2OverL: base.query.t2 = v * base.model.L; break;
      case AxisParam::WL: {
        auto* band = std::get_if<WindowBand>(&base.scheme);
        if (!band) throw ConfigError("axis wL requires the window scheme");
        band->w = v / base.model.L;
        break;
      }
    }
  }
  return base;
}

inline QuasiProbResult evaluate_point(const ScanBase& base, AxisParam px, double x, AxisParam py,
                                      double y) {
  const ScanBase at = apply_axes(base, {{px, x}, {py, y}});
  return qp::quasi_prob(at.model, at.state, at.scheme, at.query, at.quadrature);
}

struct MinPoint {
  double x = 0.0;
  double y = 0.0;
  double q = 0.0;
  int ix = 0;
  int iy = 0;
};

/// Row-major in x: cell (ix, iy) lives at ix * y.n + iy.
struct ScanGrid {
  AxisSpec x;
  AxisSpec y;
  ScanBase fixed;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<unsigned char> negative;  // q + est_error < 0
  std::vector<std::string> failures;    // per failed cell, "" when fine
  int failed = 0;
  std::optional<MinPoint> min_point;

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(ix) * y.n + iy; }
  double at(int ix, int iy) const { return values[index(ix, iy)]; }
};

namespace scan_detail {

inline std::optional<MinPoint> grid_min(const ScanGrid& g) {
  std::optional<MinPoint> best;
  for (int ix = 0; ix < g.x.n; ++ix) {
    for (int iy = 0; iy < g.y.n; ++iy) {
      const double q = g.at(ix, iy);
      if (std::isnan(q)) continue;
      if (!best || q < best->q) best = MinPoint{g.x.value(ix), g.y.value(iy), q, ix, iy};
    }
  }
  return best;
}

}  // namespace scan_detail

/// Evaluates every node; failing cells hold NaN and their error message.
/// The output does not depend on `threads`.
inline ScanGrid scan_plane(const ScanBase& base, const AxisSpec& x, const AxisSpec& y, int threads = 0) {
  x.validate("scan.x");
  y.validate("scan.y");
  if (x.param == y.param) throw ConfigError("scan axes must bind distinct parameters");

  ScanGrid g;
  g.x = x;
  g.y = y;
  g.fixed = base;
  const std::size_t cells = static_cast<std::size_t>(x.n) * y.n;
  g.values.assign(cells, std::numeric_limits<double>::quiet_NaN());
  g.errors.assign(cells, std::numeric_limits<double>::quiet_NaN());
  g.negative.assign(cells, 0);
  g.failures.assign(cells, "");

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const int ix = static_cast<int>(c / y.n);
      const int iy = static_cast<int>(c % y.n);
      try {
        const auto r = evaluate_point(base, x.param, x.value(ix), y.param, y.value(iy));
        if (!std::isfinite(r.q)) throw QuadratureFailure("non-finite q");
        g.values[c] = r.q;
        g.errors[c] = r.est_error;
        g.negative[c] = r.q + r.est_error < 0.0;
      } catch (const Error& e) {
        g.failures[c] = e.what();
      }
    }
  };
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, static_cast<int>(cells));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  g.failed = static_cast<int>(std::count_if(g.failures.begin(), g.failures.end(),
                                            [](const std::string& s) { return !s.empty(); }));
  g.min_point = scan_detail::grid_min(g);
  return g;
}

/// Grid minimum (lowest index wins ties), then one golden-section pass along
/// x and one along y inside the neighbouring cells. A refined point is kept
/// only if it is strictly lower.
inline MinPoint find_min(const ScanGrid& g, bool refine = true) {
  const auto grid_best = scan_detail::grid_min(g);
  if (!grid_best) throw AllCellsFailed("find_min: no cell of the grid evaluated successfully");
  MinPoint best = *grid_best;
  if (!refine) return best;

  auto q_at = [&](double x, double y) {
    try {
      const double q = evaluate_point(g.fixed, g.x.param, x, g.y.param, y).q;
      return std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto golden = [&](auto f, double lo, double hi) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 30; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - inv_phi * (b - a); fc = f(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + inv_phi * (b - a); fd = f(d);
      }
    }
    return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
  };

  const double x_lo = g.x.value(std::max(best.ix - 1, 0));
  const double x_hi = g.x.value(std::min(best.ix + 1, g.x.n - 1));
  const auto [bx, qx] = golden([&](double x) { return q_at(x, best.y); }, x_lo, x_hi);
  if (qx < best.q) {
    best.x = bx;
    best.q = qx;
  }
  const double y_lo = g.y.value(std::max(best.iy - 1, 0));
  const double y_hi = g.y.value(std::min(best.iy + 1, g.y.n - 1));
  const auto [by, qy] = golden([&](double y) { return q_at(best.x, y); }, y_lo, y_hi);
  if (qy < best.q) {
    best.y = by;
    best.q = qy;
  }
  return best;
}

struct Crossing {
  AxisParam param;
  bool found = false;
  double value = 0.0;  // smallest axis value with a robustly negative cell
};

struct ViolationSummary {
  double fraction_neg = 0.0;
  double min_q = 0.0;
  std::vector<Crossing> crossings;  // x axis, then y axis
};

inline ViolationSummary violation_summary(const ScanGrid& g) {
  const auto best = scan_detail::grid_min(g);
  if (!best) throw AllCellsFailed("violation_summary: no cell of the grid evaluated successfully");
  ViolationSummary s;
  s.min_q = best->q;
  int finite = 0;
  int neg = 0;
  Crossing cx{g.x.param};
  Crossing cy{g.y.param};
  int first_iy = g.y.n;
  for (int ix = 0; ix < g.x.n; ++ix) {
    for (int iy = 0; iy < g.y.n; ++iy) {
      if (std::isnan(g.at(ix, iy))) continue;
      ++finite;
      if (!g.negative[g.index(ix, iy)]) continue;
      ++neg;
      if (!cx.found) {
        cx.found = true;
        cx.value = g.x.value(ix);
      }
      first_iy = std::min(first_iy, iy);
    }
  }
  if (first_iy < g.y.n) {
    cy.found = true;
    cy.value = g.y.value(first_iy);
  }
  s.fraction_neg = static_cast<double>(neg) / finite;
  s.crossings = {cx, cy};
  return s;
}

}  // namespace lgq
