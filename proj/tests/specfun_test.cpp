#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_complex.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "lgq/specfun.hpp"

namespace {

using lgq::specfun::cplx;
namespace mp = boost::multiprecision;
using big = mp::cpp_complex<300>;
using bigf = mp::number<mp::cpp_bin_float<300>>;

// 300-digit reference from the Maclaurin series alone; the digits absorb the
// e^{|z|^2} cancellation for |z| < 20.
big big_erf_series(const big& z) {
  const big z2 = z * z;
  big power = z;
  big sum = z;
  for (int n = 1; n < 4000; ++n) {
    power *= -z2 / n;
    const big term = power / (2 * n + 1);
    sum += term;
    if (n > abs(z2) && abs(term) < bigf("1e-250") * abs(sum)) break;
  }
  return sum * 2 / sqrt(boost::math::constants::pi<bigf>());
}

big big_faddeeva(const big& z) {
  // w(z) = e^{-z^2} (1 - erf(-iz))
  return exp(-z * z) * (big(1) - big_erf_series(big(0, -1) * z));
}

cplx to_double(const big& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

std::vector<cplx> sample_points() {
  std::vector<cplx> pts;
  for (double x : {0.0, 0.1, 0.49, 0.5, 0.75, 1.0, 2.3, 3.9, 4.99, 5.5, 6.0, 8.0, 15.0}) {
    for (double y : {0.0, 1e-3, 0.2, 0.5, 1.7, 3.0, 5.9, 7.0, 12.0}) {
      for (double sx : {1.0, -1.0}) {
        pts.emplace_back(sx * x, y);
      }
    }
  }
  return pts;
}

}  // namespace

TEST(Faddeeva, UpperHalfPlaneMatchesReference) {
  double worst = 0.0;
  for (const cplx z : sample_points()) {
    const cplx want = to_double(big_faddeeva(big(z.real(), z.imag())));
    const double e = rel_err(lgq::specfun::faddeeva(z), want);
    worst = std::max(worst, e);
    EXPECT_LT(e, 1e-13) << "z = " << z;
  }
  RecordProperty("worst_rel_err", std::to_string(worst));
}

TEST(Faddeeva, LowerHalfPlaneModerate) {
  for (double x : {-3.0, -0.4, 0.0, 0.8, 2.5}) {
    for (double y : {-0.1, -1.0, -2.5}) {
      const cplx z{x, y};
      const cplx want = to_double(big_faddeeva(big(x, y)));
      EXPECT_LT(rel_err(lgq::specfun::faddeeva(z), want), 1e-12) << "z = " << z;
    }
  }
}

TEST(Faddeeva, KnownValues) {
  EXPECT_DOUBLE_EQ(lgq::specfun::faddeeva(cplx{0, 0}).real(), 1.0);
  // w(iy) = erfcx(y) is real
  const cplx w = lgq::specfun::faddeeva(cplx{0, 2.0});
  EXPECT_NEAR(w.real(), std::exp(4.0) * std::erfc(2.0), 1e-15);
  EXPECT_EQ(w.imag(), 0.0);
}

TEST(Faddeeva, ReflectionSymmetry) {
  for (const cplx z : sample_points()) {
    const cplx a = lgq::specfun::faddeeva(-std::conj(z));
    const cplx b = std::conj(lgq::specfun::faddeeva(z));
    EXPECT_EQ(a, b);
  }
}

TEST(Erf, RealAxisMatchesStd) {
  for (double x = -6.0; x <= 6.0; x += 0.173) {
    EXPECT_NEAR(lgq::specfun::erf(cplx{x, 0}).real(), std::erf(x), 2e-16 + 2e-15 * std::abs(std::erf(x)));
    const double want = std::erfc(x);
    EXPECT_LT(std::abs(lgq::specfun::erfc(cplx{x, 0}).real() - want), 4e-15 * want) << x;
  }
}

TEST(Erf, ComplexMatchesReference) {
  for (double x : {0.0, 0.3, 1.0, 2.2, -1.4}) {
    for (double y : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
      const cplx z{x, y};
      const cplx want = to_double(big_erf_series(big(x, y)));
      if (std::abs(want) == 0.0) continue;
      EXPECT_LT(rel_err(lgq::specfun::erf(z), want), 1e-13) << "z = " << z;
    }
  }
}

TEST(Erfc, ComplexMatchesReferenceWithoutCancellation) {
  // erfc(z) = e^{-z^2} w(iz)
  for (double x : {0.5, 2.0, 4.0, 9.0}) {
    for (double y : {-3.0, 0.0, 1.5}) {
      const cplx z{x, y};
      const big bz(x, y);
      const cplx want = to_double(exp(-bz * bz) * big_faddeeva(big(0, 1) * bz));
      EXPECT_LT(rel_err(lgq::specfun::erfc(z), want), 1e-13) << "z = " << z;
    }
  }
}

TEST(Erfc, OverflowReported) {
  EXPECT_THROW(lgq::specfun::erfc(cplx{0.0, 30.0}), lgq::OverflowDomain);
  EXPECT_THROW(lgq::specfun::erf(cplx{1.0, 28.0}), lgq::OverflowDomain);
  EXPECT_NO_THROW(lgq::specfun::faddeeva(cplx{0.0, 30.0}));
}

TEST(Erfi, MatchesReference) {
  for (double x : {-3.0, -0.2, 0.0, 0.5, 1.0, 2.7, 5.0}) {
    const cplx want = to_double(big(0, -1) * big_erf_series(big(0, x)));
    const double got = lgq::specfun::erfi(x);
    EXPECT_NEAR(got, want.real(), 1e-14 * std::max(1.0, std::abs(want.real())));
  }
}
