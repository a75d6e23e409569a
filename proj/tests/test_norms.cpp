#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/interp.hpp"
#include "tpflow/norms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tpflow;

namespace {

SpaceTimeGrid grid(int n = 24, double half = 6.0) {
  SpaceTimeGrid g;
  g.box_half_length = half;
  g.n_space = n;
  g.n_time_modes = 2;
  return g;
}

RealField steady_from(const SpaceTimeGrid& g, const std::function<double(const Vec3&)>& fn) {
  RealField f = RealField::steady(g, 1);
  for (int a = 0; a < g.n_space; ++a)
    for (int b = 0; b < g.n_space; ++b)
      for (int c = 0; c < g.n_space; ++c) f(0, 0, g.flat(a, b, c)) = fn(g.point(a, b, c));
  return f;
}

}  // namespace

TEST(WeightedSup, ExactCancellationIsotropic) {
  const auto g = grid();
  const RealField f = steady_from(g, [](const Vec3& x) { return std::pow(1 + x.norm(), -2.0); });
  EXPECT_NEAR(weighted_sup(f, 2.0, 0.0).value, 1.0, 1e-12);
}

TEST(WeightedSup, ExactCancellationWake) {
  const auto g = grid();
  const RealField f = steady_from(g, [](const Vec3& x) {
    return 1.0 / ((1 + x.norm()) * (1 + x.norm() - x(0)));
  });
  EXPECT_NEAR(weighted_sup(f, 1.0, 1.0).value, 1.0, 1e-12);
  // The mirrored weight needs the mirrored field.
  const RealField m = steady_from(g, [](const Vec3& x) {
    return 1.0 / ((1 + x.norm()) * (1 + x.norm() + x(0)));
  });
  EXPECT_NEAR(weighted_sup(m, 1.0, 1.0, -1.0).value, 1.0, 1e-12);
}

TEST(WeightedSup, BumpAtOriginIgnoresWeights) {
  const auto g = grid();
  RealField f = RealField::steady(g, 1);
  const int mid = g.n_space / 2;
  f(0, 0, g.flat(mid, mid, mid)) = -3.5;
  for (double al : {0.0, 1.0, 2.5})
    for (double be : {0.0, 0.5}) {
      const NormValue v = weighted_sup(f, al, be);
      EXPECT_EQ(v.value, 3.5);
      EXPECT_EQ(v.argmax, Vec3::Zero());
      EXPECT_FALSE(v.boundary_attained);
    }
}

TEST(WeightedSup, FlagsBoundaryArgmax) {
  const auto g = grid();
  const RealField f = steady_from(g, [](const Vec3&) { return 1.0; });
  EXPECT_TRUE(weighted_sup(f, 1.0, 0.0).boundary_attained);
}

TEST(WeightedSup, MonotoneHomogeneousAndSubadditive) {
  const auto g = grid(16, 4.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(-1, 1);
  RealField f = RealField::steady(g, 3), h = RealField::steady(g, 3);
  // Compact support away from the origin where all weights are >= 1.
  for (int a = 0; a < g.n_space; ++a)
    for (int b = 0; b < g.n_space; ++b)
      for (int c = 0; c < g.n_space; ++c)
        if (g.point(a, b, c).norm() < 2.5)
          for (int i = 0; i < 3; ++i) {
            f(i, 0, g.flat(a, b, c)) = ur(rng);
            h(i, 0, g.flat(a, b, c)) = ur(rng);
          }
  double prev = 0.0;
  for (double al : {0.0, 0.5, 1.0, 2.0}) {
    const double v = weighted_sup(f, al, 0.5).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(weighted_sup(-2.5 * f, 1.0, 0.3).value, 2.5 * weighted_sup(f, 1.0, 0.3).value, 1e-12);
  EXPECT_LE(weighted_sup(f + h, 1.5, 0.2).value,
            weighted_sup(f, 1.5, 0.2).value + weighted_sup(h, 1.5, 0.2).value + 1e-14);
  const NormValue iso = weighted_sup(f, 1.3, 0.0);
  const NormValue iso2 = weighted_sup(f, 1.3, 0.0, -1.0);
  EXPECT_EQ(iso.value, iso2.value);
}

TEST(WeightedOsc, SineHasClosedFormTimeNorm) {
  const auto g = grid(12, 3.0);
  RealField f = RealField::space_time(g, 1);
  auto gfun = [](const Vec3& x) { return std::exp(-x.squaredNorm()); };
  for (int m = 0; m < g.n_time(); ++m)
    for (int a = 0; a < g.n_space; ++a)
      for (int b = 0; b < g.n_space; ++b)
        for (int c = 0; c < g.n_space; ++c)
          f(0, m, g.flat(a, b, c)) = gfun(g.point(a, b, c)) * std::sin(g.omega() * g.time(m));
  const RealField gs = steady_from(g, gfun);
  const double expected = weighted_sup(gs, 1.0, 0.0).value / std::sqrt(2.0);
  EXPECT_NEAR(weighted_osc(f, 2.0, 1.0).value, expected, 1e-12);
  EXPECT_NEAR(weighted_osc(2.0 * f, 3.0, 1.0).value, 2.0 * weighted_osc(f, 3.0, 1.0).value, 1e-12);
  EXPECT_LE(weighted_osc(f, 3.0, 1.0).value, weighted_osc(f, 4.0, 1.0).value);
}

TEST(WeightedOsc, ConstantInTimeHasNoOscillation) {
  const auto g = grid(8, 2.0);
  RealField f = RealField::space_time(g, 1);
  for (double& v : f.values()) v = 1.25;
  EXPECT_LT(weighted_osc(project_oscillatory(f), 2.0, 1.0).value, 1e-14);
}

TEST(DecayFit, ExactPowerLaw) {
  std::vector<double> r, v;
  for (int i = 0; i < 12; ++i) {
    r.push_back(2.0 * std::pow(10.0, i / 11.0));
    v.push_back(5.0 * std::pow(r.back(), -3.0));
  }
  const DecayReport d = fit_power_law(r, v);
  EXPECT_NEAR(d.slope, -3.0, 1e-12);
  EXPECT_NEAR(d.intercept, std::log(5.0), 1e-12);
  EXPECT_LT(d.std_error, 1e-12);
  EXPECT_NEAR(d.r_squared, 1.0, 1e-12);
}

TEST(DecayFit, ConfidenceIntervalCoversNoisySlope) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.05);
  std::vector<double> r, v;
  for (int i = 0; i < 30; ++i) {
    r.push_back(std::pow(10.0, i / 29.0));
    v.push_back(std::pow(r.back(), -2.0) * std::exp(nd(rng)));
  }
  const DecayReport d = fit_power_law(r, v);
  EXPECT_LT(d.ci_low, -2.0);
  EXPECT_GT(d.ci_high, -2.0);
  EXPECT_GT(d.std_error, 0.0);
}

TEST(DecayFit, InsufficientSamplesRejected) {
  EXPECT_THROW(fit_power_law({1, 2, 3, 4, 5, 6, 7}, {1, 1, 1, 1, 1, 1, 1}), ValidationError);
  EXPECT_THROW(fit_power_law({1, 2, 3, 4, 5, 6, 7, 8}, {1, 1, 1, 1, 0, 1, 1, 1}), ValidationError);
}

TEST(DecayFit, IsotropicFieldOneOverR) {
  const DecayReport d = fit_field_decay([](const Vec3& x) { return 1.0 / (1.0 + x.norm()); },
                                        DecayDirection::isotropic, 100.0, 1000.0, 12);
  EXPECT_NEAR(d.slope, -1.0, 0.01);
}

TEST(DecayFit, GriddedFieldViaInterpolation) {
  SpaceTimeGrid g = grid(64, 40.0);
  const RealField f = steady_from(g, [](const Vec3& x) { return std::pow(1.0 + x.squaredNorm(), -1.0); });
  const DecayReport d = fit_field_decay(f, DecayDirection::isotropic, 8.0, 30.0, 10);
  EXPECT_NEAR(d.slope, -2.0, 0.05);
  EXPECT_THROW(fit_field_decay(f, DecayDirection::isotropic, 8.0, 50.0, 10), ValidationError);
}

TEST(Interpolation, ExactForCubics) {
  SpaceTimeGrid g = grid(16, 8.0);
  auto fn = [](const Vec3& x) { return 0.1 * x(0) * x(0) * x(1) - 0.3 * x(2) * x(2) * x(2) / 8 + x(1); };
  const RealField f = steady_from(g, fn);
  for (const Vec3& x : {Vec3(0.3, -1.7, 2.2), Vec3(-3.1, 0.05, 1.0)})
    EXPECT_NEAR(interpolate_tricubic(f, 0, 0, x), fn(x), 1e-12);
}

TEST(SphereDirections, UnitAndBalanced) {
  const auto d = sphere_directions(64);
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : d) {
    EXPECT_NEAR(v.norm(), 1.0, 1e-14);
    sum += v;
  }
  EXPECT_LT(sum.norm() / 64, 0.05);
}
