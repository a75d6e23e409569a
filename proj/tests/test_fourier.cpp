#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/tpf_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tpflow;

namespace {

SpaceTimeGrid small_grid(int n = 16, int modes = 3) {
  SpaceTimeGrid g;
  g.box_half_length = 2.0;
  g.n_space = n;
  g.period = 3.0;
  g.n_time_modes = modes;
  return g;
}

RealField random_field(const SpaceTimeGrid& g, int components, unsigned seed) {
  RealField f = RealField::space_time(g, components);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.values()) v = nd(rng);
  return f;
}

double rel_diff(const RealField& a, const RealField& b) {
  return (a - b).l2_norm() / b.l2_norm();
}

}  // namespace

TEST(Fourier, RoundTripRandomField) {
  const auto g = small_grid();
  const RealField u = random_field(g, 3, 7);
  EXPECT_LT(rel_diff(inverse_transform(forward_transform(u)), u), 1e-12);
}

TEST(Fourier, ParsevalAgainstDirectQuadrature) {
  const auto g = small_grid();
  const RealField u = random_field(g, 1, 11);
  double direct = 0.0;
  for (double v : u.values()) direct += v * v;
  direct *= std::pow(g.spacing(), 3) / g.n_time();
  const double spec = std::pow(spectral_l2(forward_transform(u)), 2);
  EXPECT_NEAR(spec / direct, 1.0, 1e-12);
}

TEST(Fourier, ConstantFieldHasOnlyZeroMode) {
  const auto g = small_grid();
  RealField u = RealField::space_time(g, 1);
  for (double& v : u.values()) v = 2.5;
  const SpectralField s = forward_transform(u);
  const double expected = 2.5 * std::pow(g.spacing() * g.n_space / (2.0 * pi), 3);
  EXPECT_NEAR(s.coeff(0, 0, 0, 0, 0).real(), expected, 1e-12);
  double others = 0.0;
  for (std::size_t i = 1; i < s.values().size(); ++i) others = std::max(others, std::abs(s.values()[i]));
  EXPECT_LT(others, 1e-12);
}

TEST(Fourier, SingleTimeHarmonic) {
  const auto g = small_grid();
  RealField u = RealField::space_time(g, 1);
  for (int m = 0; m < g.n_time(); ++m)
    for (double& v : u.layer(0, m)) v = std::cos(g.omega() * g.time(m));
  const SpectralField s = forward_transform(u);
  const double a = std::abs(s.coeff(0, 1, 0, 0, 0));
  EXPECT_GT(a, 1e-3);
  EXPECT_NEAR(std::abs(s.coeff(0, -1, 0, 0, 0)), a, 1e-14);
  double others = 0.0;
  for (int kidx = 0; kidx < s.layers(); ++kidx) {
    if (std::abs(s.mode_of_layer(kidx)) == 1) continue;
    for (const cplx& v : s.layer(0, kidx)) others = std::max(others, std::abs(v));
  }
  EXPECT_LT(others, 1e-14);
}

TEST(Fourier, InverseOfZeroIsZero) {
  const auto g = small_grid();
  EXPECT_EQ(inverse_transform(SpectralField::space_time(g, 3)).max_abs(), 0.0);
}

TEST(Fourier, SingleModeGivesPlaneWave) {
  const auto g = small_grid();
  SpectralField s = SpectralField::space_time(g, 1);
  s.coeff(0, 2, 1, 0, 0) = 0.5;
  s.coeff(0, -2, -1, 0, 0) = 0.5;
  const RealField u = inverse_transform(s);
  const double scale = std::pow(g.wavenumber_spacing(), 3);
  double err = 0.0;
  for (int m = 0; m < g.n_time(); ++m)
    for (int a = 0; a < g.n_space; ++a)
      for (int b = 0; b < g.n_space; ++b)
        for (int c = 0; c < g.n_space; ++c) {
          const double phase = pi * g.coordinate(a) / g.box_half_length + 2.0 * g.omega() * g.time(m);
          err = std::max(err, std::abs(u(0, m, g.flat(a, b, c)) - scale * std::cos(phase)));
        }
  EXPECT_LT(err, 1e-13);
}

TEST(Fourier, RejectsBrokenConjugateSymmetry) {
  const auto g = small_grid();
  SpectralField s = SpectralField::space_time(g, 1);
  s.coeff(0, 1, 1, 0, 0) = 1.0;
  EXPECT_THROW(inverse_transform(s), ValidationError);
}

TEST(Fourier, RejectsNonFiniteInput) {
  const auto g = small_grid();
  RealField u = RealField::space_time(g, 1);
  u.values()[5] = std::nan("");
  EXPECT_THROW(forward_transform(u), ValidationError);
}

TEST(Fourier, ProjectionsAreComplementaryIdempotents) {
  const auto g = small_grid();
  const RealField f = random_field(g, 2, 3);
  const RealField s = broadcast_steady(project_steady(f));
  const RealField o = project_oscillatory(f);
  EXPECT_LT((s + o - f).max_abs(), 1e-12);
  EXPECT_LT((project_oscillatory(o) - o).max_abs(), 1e-12);
  EXPECT_LT((broadcast_steady(project_steady(s)) - s).max_abs(), 1e-12);
  EXPECT_LT(project_steady(o).max_abs(), 1e-12);
  EXPECT_LT(project_oscillatory(s).max_abs(), 1e-12);
}

TEST(Fourier, ZeroMeanHarmonicHasNoSteadyPart) {
  const auto g = small_grid();
  RealField f = RealField::space_time(g, 1);
  for (int m = 0; m < g.n_time(); ++m)
    for (std::size_t i = 0; i < g.n_points(); ++i)
      f(0, m, i) = std::sin(0.1 * static_cast<double>(i)) * std::sin(g.omega() * g.time(m));
  EXPECT_LT(project_steady(f).max_abs(), 1e-14);
  EXPECT_LT((project_oscillatory(f) - f).max_abs(), 1e-14);
}

TEST(Fourier, DerivativeOfExponentialIsExact) {
  const auto g = small_grid();
  SpectralField s = SpectralField::space_time(g, 1);
  s.coeff(0, 1, 2, -3, 1) = cplx(0.3, -0.2);
  const SpectralField d = partial(s, {1, 0, 0});
  const cplx expected = cplx(0.0, g.wavenumber(2)) * cplx(0.3, -0.2);
  EXPECT_EQ(d.coeff(0, 1, 2, -3, 1), expected);
  const SpectralField lap = laplacian(s);
  const double xi2 = std::pow(g.wavenumber(2), 2) + std::pow(g.wavenumber(-3), 2) +
                     std::pow(g.wavenumber(1), 2);
  EXPECT_NEAR(std::abs(lap.coeff(0, 1, 2, -3, 1) + xi2 * cplx(0.3, -0.2)), 0.0, 1e-13);
}

TEST(Fourier, CurlIsDivergenceFree) {
  const auto g = small_grid();
  const SpectralField a = forward_transform(random_field(g, 3, 5));
  EXPECT_LT(spectral_l2(divergence(curl(a))), 1e-12 * spectral_l2(a));
}

TEST(Fourier, DealiasMaskKeepsTwoThirds) {
  const auto g = small_grid();
  SpectralField s = forward_transform(random_field(g, 1, 9));
  apply_dealias_mask(s);
  EXPECT_NE(s.coeff(0, 0, 5, 0, 0), cplx(0.0));
  EXPECT_EQ(s.coeff(0, 0, 6, 0, 0), cplx(0.0));
  EXPECT_EQ(s.coeff(0, 1, 0, -6, 0), cplx(0.0));
}

TEST(Fourier, ResampleTimeInterpolatesBandLimitedSignal) {
  const auto g = small_grid(8, 2);
  RealField f = RealField::space_time(g, 1);
  auto signal = [&](double t) { return 1.0 + std::cos(g.omega() * t) - 0.5 * std::sin(2.0 * g.omega() * t); };
  for (int m = 0; m < g.n_time(); ++m)
    for (double& v : f.layer(0, m)) v = signal(g.time(m));
  const RealField r = resample_time(f, 64);
  for (int s = 0; s < 64; ++s) EXPECT_NEAR(r(0, s, 0), signal(s * g.period / 64), 1e-13);
}

TEST(TpfFormat, RoundTripsPhysicalAndSpectral) {
  auto g = small_grid(8, 1);
  g.kappa = -0.25;
  const RealField u = random_field(g, 3, 21);
  const auto back = decode_tpf(encode_tpf(u));
  ASSERT_TRUE(std::holds_alternative<RealField>(back));
  const RealField& r = std::get<RealField>(back);
  EXPECT_TRUE(std::equal(r.values().begin(), r.values().end(), u.values().begin()));
  EXPECT_EQ(r.grid().kappa, -0.25);

  const SpectralField s = forward_transform(u);
  const auto sb = decode_tpf(encode_tpf(s));
  ASSERT_TRUE(std::holds_alternative<SpectralField>(sb));
  EXPECT_TRUE(std::equal(std::get<SpectralField>(sb).values().begin(),
                         std::get<SpectralField>(sb).values().end(), s.values().begin()));
}

TEST(TpfFormat, RejectsTruncatedData) {
  const auto g = small_grid(8, 1);
  std::string bytes = encode_tpf(random_field(g, 1, 1));
  bytes.resize(bytes.size() - 8);
  EXPECT_THROW(decode_tpf(bytes), ValidationError);
  EXPECT_THROW(decode_tpf("XXXX"), ValidationError);
}

TEST(Fourier, RoundoffComponentIsJudgedAgainstWholeField) {
  // Component 1 holds a one-sided mode at roundoff size next to an O(1) component 0.
  const auto g = small_grid();
  const SpectralField a = forward_transform(random_field(g, 1, 5));
  SpectralField s(g, 2, g.n_time());
  std::ranges::copy(a.component(0), s.component(0).begin());
  s(1, 1, g.flat(1, 0, 0)) = 1e-17;
  EXPECT_NO_THROW(inverse_transform(s));
  SpectralField t(g, 1, g.n_time());
  t(0, 1, g.flat(1, 0, 0)) = 1.0;
  EXPECT_THROW(inverse_transform(t), ValidationError);
}
