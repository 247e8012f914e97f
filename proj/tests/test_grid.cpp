#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "csl/grid.hpp"
#include "csl/master.hpp"

using namespace csl;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

mp mp_lambda(mp gamma, mp r, int dim) {
  const mp four_pi_r2 = 4 * boost::math::constants::pi<mp>() * r * r;
  return gamma / pow(four_pi_r2, mp(dim) / 2);
}

}  // namespace

TEST(Grid, RejectsDegenerateGrids) {
  EXPECT_THROW(Grid1D(7, 1.0, 0.0), Error);
  EXPECT_THROW(Grid1D(8, 0.0, 0.0), Error);
  EXPECT_THROW(Grid1D(8, -1.0, 0.0), Error);
  EXPECT_NO_THROW(Grid1D(8, 1.0, 0.0));
}

TEST(Grid, CenteredAndPeriodic) {
  const Grid1D g = Grid1D::centered(16, 0.5);
  EXPECT_DOUBLE_EQ(g.x_min(), -4.0);
  EXPECT_DOUBLE_EQ(g.span(), 8.0);
  EXPECT_DOUBLE_EQ(g.x(8), 0.0);
  EXPECT_DOUBLE_EQ(g.min_image(7.0), -1.0);
  EXPECT_DOUBLE_EQ(g.min_image(-7.5), 0.5);
  EXPECT_DOUBLE_EQ(g.offset(15), -0.5);
  EXPECT_EQ(g.site_of(0.0), 8u);
  EXPECT_EQ(g.site_of(4.0), 0u);  // wraps
}

TEST(LambdaGamma, ThreeDimensionalRegressionAgainstMultiprecision) {
  const mp r("1e-7");
  const mp lam("1e-17");
  const mp gamma = lam * pow(4 * boost::math::constants::pi<mp>() * r * r, mp(3) / 2);
  EXPECT_NEAR(static_cast<double>(gamma), 4.455e-37, 0.001e-37);
  EXPECT_NEAR(gamma_from_lambda(1e-17, 1e-7, 3) / static_cast<double>(gamma), 1.0, 1e-14);
  EXPECT_NEAR(lambda_from_gamma(static_cast<double>(gamma), 1e-7, 3), 1e-17, 1e-17 * 1e-14);
  // quoted three-significant-figure coupling still lands within 0.1%
  EXPECT_NEAR(lambda_from_gamma(4.455e-37, 1e-7, 3) / 1e-17, 1.0, 1e-3);
}

TEST(LambdaGamma, InverseOfFormulaAtModelValue) {
  const double r = 1e-7;
  const double gamma = std::pow(4.0 * std::numbers::pi * r * r, 1.5) * 1e-17;
  EXPECT_NEAR(lambda_from_gamma(gamma, r, 3), 1e-17, 1e-30);
}

TEST(LambdaGamma, OneDimensionMatchesQuadrature) {
  // λ_1 = γ ∫ g(z)² dz with the normalised Gaussian g.
  auto g2 = [](double z) {
    const double g = std::exp(-z * z / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    return g * g;
  };
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g2, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(lambda_from_gamma(1.0, 1.0, 1), q, 1e-12);
  EXPECT_NEAR(lambda_from_gamma(1.0, 1.0, 1), 0.28209479177387814, 1e-15);
}

TEST(LambdaGamma, AllDimensionsAgreeWithMultiprecision) {
  for (int dim = 1; dim <= 3; ++dim)
    for (double r : {1e-8, 1e-7, 0.3, 1.0, 7.0}) {
      const double got = lambda_from_gamma(2.5, r, dim);
      const double want = static_cast<double>(mp_lambda(mp(2.5), mp(r), dim));
      EXPECT_NEAR(got / want, 1.0, 1e-14) << dim << " " << r;
      EXPECT_NEAR(gamma_from_lambda(got, r, dim) / 2.5, 1.0, 1e-14);
    }
}

TEST(LambdaGamma, DecreasingInRcAndLinearInGamma) {
  for (int dim = 1; dim <= 3; ++dim) {
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 0.1; r < 10.0; r *= 1.7) {
      const double l = lambda_from_gamma(1.0, r, dim);
      EXPECT_LT(l, prev);
      prev = l;
      EXPECT_NEAR(lambda_from_gamma(3.0, r, dim) + lambda_from_gamma(2.0, r, dim), lambda_from_gamma(5.0, r, dim),
                  1e-14 * lambda_from_gamma(5.0, r, dim));
    }
  }
}

TEST(CslParams, ValidationAndConversions) {
  const CslParams p = CslParams::from_lambda(0.1, 1.0, 1);
  EXPECT_NEAR(p.gamma, 0.2 * std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(p.lambda(), 0.1, 1e-15);
  CslParams bad = p;
  bad.r_C = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.dim = 4;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.gamma = -1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.gamma = 0.0;
  EXPECT_NO_THROW(bad.validate());
}

TEST(HeatingRate, ThreeDimensionalRegression) {
  // M = m0 = m_N; λ = 1e-17 1/s; r_C = 1e-7 m.
  CslParams p = CslParams::from_lambda(1e-17, 1e-7, 3, si::kNucleonMass, si::kNucleonMass, si::kHbar);
  const double rate = heating_rate(p, si::kNucleonMass);
  // independent arithmetic: (3/4) λ hbar² / (r² M)
  const mp want = mp(3) / 4 * mp("1e-17") * mp(si::kHbar) * mp(si::kHbar) / (mp("1e-14") * mp(si::kNucleonMass));
  EXPECT_NEAR(rate / static_cast<double>(want), 1.0, 1e-12);
  EXPECT_NEAR(rate / 4.98e-45, 1.0, 0.01);
}

TEST(HeatingRate, OneDimensionSimulationUnits) {
  CslParams p = CslParams::from_lambda(0.1, 1.0, 1);
  EXPECT_NEAR(heating_rate(p, 1.0), 0.025, 1e-15);
  EXPECT_NEAR(heating_rate(p, 2.0), 0.05, 1e-15);
}

TEST(HeatingRate, OneDimensionClosedFormFromKernelDerivative) {
  // (γ hbar² M / 2 m0²) ∫ g'(z)² dz
  const double gamma = gamma_from_lambda(0.1, 1.0, 1);
  auto gp2 = [](double z) {
    const double gp = -z * std::exp(-z * z / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    return gp * gp;
  };
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      gp2, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(0.5 * gamma * I, 0.025, 1e-12);
}

TEST(DecayRate, ClosedFormValues) {
  const CslParams p = CslParams::from_lambda(2.0, 1.0, 1);
  EXPECT_EQ(decay_rate(0.0, p), 0.0);
  EXPECT_NEAR(decay_rate(2.0, p) / 2.0, 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(decay_rate(2.0, p) / 2.0, 0.63212, 1e-5);
  EXPECT_NEAR(decay_rate(20.0, p), 2.0, 2.0 * 1e-8);
  double prev = 0.0;
  for (double d = 0.0; d < 30.0; d += 0.37) {
    const double r = decay_rate(d, p);
    EXPECT_GE(r, prev);
    EXPECT_LE(r, 2.0);
    prev = r;
  }
}

TEST(DecayRate, MatchesOverlapQuadrature) {
  // Γ(d) = (γ m²/m0²) (K(0) - K(d)) with K(d) = ∫ g(z) g(z - d) dz.
  const CslParams p = CslParams::from_lambda(0.7, 1.3, 1);
  auto K = [&](double d) {
    auto f = [&](double z) {
      const double r = p.r_C;
      const double n = 1.0 / std::sqrt(2.0 * std::numbers::pi * r * r);
      return n * std::exp(-z * z / (2 * r * r)) * n * std::exp(-(z - d) * (z - d) / (2 * r * r));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  };
  for (double d : {0.5, 2.6, 5.0, 26.0}) EXPECT_NEAR(decay_rate(d, p), p.gamma * (K(0) - K(d)), 1e-12) << d;
}
