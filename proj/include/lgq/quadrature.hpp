#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a finite interval,
// generic over real and complex integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace lgq::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 1 << 14;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

inline constexpr double kEpsilon = 2.220446049250313e-16;

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// One 15-point rule on [a, b] with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<T, 15> fv{};
  fv[7] = f(centre);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    fv[j] = f(centre - dx);
    fv[14 - j] = f(centre + dx);
  }

  T kronrod = fv[7] * kKronrodWeights[7];
  T gauss = fv[7] * kGaussWeights[3];
  double abs_sum = magnitude(fv[7]) * kKronrodWeights[7];
  for (int j = 0; j < 7; ++j) {
    const T pair = fv[j] + fv[14 - j];
    kronrod += pair * kKronrodWeights[j];
    abs_sum += (magnitude(fv[j]) + magnitude(fv[14 - j])) * kKronrodWeights[j];
    if (j % 2 == 1) {
      gauss += pair * kGaussWeights[j / 2];
    }
  }
  const T mean = kronrod * 0.5;
  double asc = kKronrodWeights[7] * magnitude(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kKronrodWeights[j] * (magnitude(fv[j] - mean) + magnitude(fv[14 - j] - mean));
  }

  const double scale = std::abs(half);
  T value = kronrod * half;
  asc *= scale;
  abs_sum *= scale;
  double error = magnitude((kronrod - gauss) * half);
  if (asc != 0.0 && error != 0.0) {
    error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
  }
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * kEpsilon)) {
    error = std::max(50.0 * kEpsilon * abs_sum, error);
  }
  return {a, b, value, error};
}

}  // namespace detail

/// Integrates f over [a, b]. Never throws on non-convergence: callers inspect
/// Result::converged and decide how to report it.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }

  std::priority_queue<detail::Panel<T>> panels;
  panels.push(detail::kronrod15<T>(f, a, b));
  out.evaluations = 15;
  T total = panels.top().value;
  double error = panels.top().error;

  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)); };

  int count = 1;
  while (error > tolerance() && count < opt.max_intervals) {
    const detail::Panel<T> worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      break;  // interval no longer splittable in double precision
    }
    panels.pop();
    const auto left = detail::kronrod15<T>(f, worst.a, mid);
    const auto right = detail::kronrod15<T>(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }

  // Re-sum to shed the drift of the incremental updates.
  T sum{};
  double err_sum = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    err_sum += panels.top().error;
    panels.pop();
  }
  out.value = sum;
  out.error = err_sum;
  out.intervals = count;
  out.converged = err_sum <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
  return out;
}

}  // namespace lgq::quad
