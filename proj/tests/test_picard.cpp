#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/norms.hpp"
#include "tpflow/picard.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tpflow;

namespace {

SpaceTimeGrid grid(int n, int modes, double kappa = 0.0) {
  SpaceTimeGrid g;
  g.box_half_length = pi;
  g.n_space = n;
  g.n_time_modes = modes;
  g.kappa = kappa;
  g.viscosity = 1.0;
  return g;
}

RealField scaled_forcing(const SpaceTimeGrid& g, NormFlavor flavor, double target) {
  RealField f = localized_forcing(g);
  f *= target / data_norm(f, flavor, NormParams{}).total;
  return f;
}

OscillationSpec bump(double eps0) {
  OscillationSpec s;
  s.amplitude = eps0;
  s.b = 1.0;
  return s;
}

// v = (0, 0, sin x1 cos t), q = 0
RealField single_mode(const SpaceTimeGrid& g) {
  RealField v = RealField::space_time(g, 3);
  for (int m = 0; m < g.n_time(); ++m)
    for (int i = 0; i < g.n_space; ++i)
      for (int j = 0; j < g.n_space; ++j)
        for (int k = 0; k < g.n_space; ++k)
          v(2, m, g.flat(i, j, k)) = std::sin(g.point(i, j, k)(0)) * std::cos(g.time(m));
  return v;
}

}  // namespace

TEST(CompositeNorm, ZeroPairIsZero) {
  const auto g = grid(16, 1, 0.5);
  const RealField v = RealField::space_time(g, 3), q = RealField::space_time(g, 1);
  for (auto fl : {NormFlavor::stokes_I0, NormFlavor::oseen_Ikappa, NormFlavor::oseen_int})
    EXPECT_EQ(composite_norm(v, q, fl, {}).total, 0.0) << to_string(fl);
}

TEST(CompositeNorm, Homogeneous) {
  const auto g = grid(16, 1, 0.5);
  const RealField f = localized_forcing(g);
  RealField q = RealField::space_time(g, 1);
  for (std::size_t i = 0; i < q.layer_size(); ++i)
    for (int m = 0; m < g.n_time(); ++m) q(0, m, i) = f(0, m, i) + 0.5 * f(2, m, i);
  for (auto fl : {NormFlavor::stokes_I0, NormFlavor::oseen_Ikappa, NormFlavor::oseen_int}) {
    const double a = composite_norm(f, q, fl, {}).total;
    RealField f2 = f, q2 = q;
    f2 *= -2.5;
    q2 *= -2.5;
    const double b = composite_norm(f2, q2, fl, {}).total;
    EXPECT_NEAR(b, 2.5 * a, 1e-12 * b) << to_string(fl);
  }
}

TEST(CompositeNorm, SingleModeMatchesPieces) {
  const auto g = grid(16, 2);
  const RealField v = single_mode(g);
  const RealField q = RealField::space_time(g, 1);
  const NormParams np;
  const auto c = composite_norm(v, q, NormFlavor::stokes_I0, np);
  // Box L_4 norms of sin x1 and cos x1: ((2 pi)^2 * 3 pi / 4)^{1/4}; time factor ||cos||_{L_2} = 1/sqrt 2.
  const double trig4 = std::pow(4.0 * pi * pi * 3.0 * pi / 4.0, 0.25);
  const double t2 = std::sqrt(0.5);
  EXPECT_NEAR(c.term("dt_v"), t2 * trig4, 1e-10);
  EXPECT_NEAR(c.term("v_H2"), 3.0 * t2 * trig4, 1e-10);
  EXPECT_NEAR(c.term("grad_q"), 0.0, 1e-12);
  const RealField grad = inverse_transform(gradient(forward_transform(v)));
  EXPECT_NEAR(c.term("v_osc_p1"), weighted_osc(v, np.p, 1.0, np.time_samples).value, 1e-12);
  EXPECT_NEAR(c.term("grad_v_osc_p2"), weighted_osc(grad, np.p, 2.0, np.time_samples).value, 1e-12);
  double sum = 0.0;
  for (const auto& [k, x] : c.terms) sum += x;
  EXPECT_NEAR(c.total, sum, 1e-14 * sum);
}

TEST(CompositeNorm, IntegrabilityPiecesOnSteadyMode) {
  auto g = grid(16, 1, 0.5);
  RealField v = RealField::steady(g, 3);
  for (int i = 0; i < g.n_space; ++i)
    for (int j = 0; j < g.n_space; ++j)
      for (int k = 0; k < g.n_space; ++k) v(2, 0, g.flat(i, j, k)) = std::sin(g.point(i, j, k)(0));
  const RealField q = RealField::steady(g, 1);
  const NormParams np;
  const auto c = composite_norm(v, q, NormFlavor::oseen_int, np);
  EXPECT_NEAR(c.term("hess_vS_s"), lebesgue_space(v, np.s), 1e-10);
  EXPECT_NEAR(c.term("d1_vS"), 0.5 * lebesgue_space(v, np.s), 1e-10);
  EXPECT_NEAR(c.term("vS"), std::sqrt(0.5) * lebesgue_space(v, 2.0 * np.s / (2.0 - np.s)), 1e-10);
  EXPECT_EQ(c.term("dt_vperp_s"), 0.0);
}

TEST(CompositeNorm, RejectsOutOfRangeExponents) {
  const auto g = grid(16, 1, 0.5);
  const RealField v = RealField::space_time(g, 3), q = RealField::space_time(g, 1);
  NormParams np;
  np.delta = 0.3;
  EXPECT_THROW(composite_norm(v, q, NormFlavor::oseen_Ikappa, np), ValidationError);
  np = {};
  np.s = 1.5;
  EXPECT_THROW(composite_norm(v, q, NormFlavor::oseen_int, np), ValidationError);
}

TEST(DivergencePotential, DivergenceRecoversForcing) {
  const auto g = grid(16, 1);
  const RealField f = localized_forcing(g);
  const RealField F = divergence_potential(f);
  ASSERT_EQ(F.components(), 9);
  // div of row i: sum_j d_j F_{ij}
  const SpectralField s = forward_transform(F);
  RealField div = RealField::space_time(g, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::array<int, 3> o{0, 0, 0};
      o[j] = 1;
      const RealField d = inverse_transform(partial(component_of(s, 3 * i + j), o));
      for (int m = 0; m < g.n_time(); ++m)
        for (std::size_t x = 0; x < d.layer_size(); ++x) div(i, m, x) += d(0, m, x);
    }
  SpectralField a = forward_transform(div), b = forward_transform(f);
  zero_nyquist(a);
  zero_nyquist(b);
  a -= b;
  EXPECT_LT(spectral_l2(a), 1e-3 * spectral_l2(b));
}

TEST(Picard, ZeroForcingConvergesImmediately) {
  const auto g = grid(16, 1);
  const auto r = picard_iterate(RealField::space_time(g, 3), std::nullopt, PicardConfig{});
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.steps.size(), 1u);
  EXPECT_EQ(r.state.velocity.max_abs(), 0.0);
  EXPECT_EQ(r.trace.final_residual, 0.0);
}

TEST(Picard, SmallDataContracts) {
  const auto g = grid(16, 1);
  const auto r = picard_iterate(scaled_forcing(g, NormFlavor::stokes_I0, 1e-3), std::nullopt, PicardConfig{});
  ASSERT_TRUE(r.trace.converged) << r.trace.message;
  for (const auto& s : r.trace.steps) {
    if (s.iter > 2 && s.q) EXPECT_LE(*s.q, 0.5);
    EXPECT_LE(s.div_rel, 1e-9);
  }
  EXPECT_LE(r.trace.final_residual, 1e-8);
}

TEST(Picard, DoublingDataDoublesSolution) {
  const auto g = grid(16, 1);
  const RealField f = scaled_forcing(g, NormFlavor::stokes_I0, 1e-3);
  RealField f2 = f;
  f2 *= 2.0;
  const double a = picard_iterate(f, std::nullopt, {}).trace.steps.back().composite_norm;
  const double b = picard_iterate(f2, std::nullopt, {}).trace.steps.back().composite_norm;
  EXPECT_NEAR(b / a, 2.0, 0.3);
}

TEST(Picard, OscillationRaisesContractionFactor) {
  const auto g = grid(16, 1, 0.5);
  PicardConfig c;
  c.norm_flavor = NormFlavor::oseen_Ikappa;
  const RealField f = scaled_forcing(g, c.norm_flavor, 1e-3);
  const auto flat = picard_iterate(f, std::nullopt, c);
  const auto small = picard_iterate(f, bump(0.01), c);
  const auto large = picard_iterate(f, bump(0.02), c);
  ASSERT_TRUE(small.trace.converged && large.trace.converged);
  EXPECT_LT(flat.trace.max_q(), small.trace.max_q());
  EXPECT_LT(small.trace.max_q(), large.trace.max_q());
  EXPECT_LE(small.trace.final_residual, 1e-8);
  for (const auto& s : large.trace.steps) EXPECT_LE(s.div_rel, 1e-9);
}

TEST(Picard, ConfigAmplitudeOverridesSpec) {
  const auto g = grid(16, 1);
  const RealField f = scaled_forcing(g, NormFlavor::stokes_I0, 1e-3);
  PicardConfig c;
  c.eps0 = 0.02;
  const auto a = picard_iterate(f, bump(0.005), c);
  const auto b = picard_iterate(f, bump(0.02), PicardConfig{});
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
}

TEST(Picard, MirrorSymmetryIsKept) {
  // Wide box: the forcing's Gaussian tail must vanish at the periodic seam.
  auto g = grid(16, 1);
  g.box_half_length = 2.0 * pi;
  const auto r = picard_iterate(scaled_forcing(g, NormFlavor::stokes_I0, 1e-3), bump(0.01), {});
  ASSERT_TRUE(r.trace.converged);
  const RealField& u = r.state.velocity;
  const int n = g.n_space;
  double odd = 0.0, even = 0.0;
  for (int m = 0; m < g.n_time(); ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const auto a = g.flat(i, j, k), b = g.flat(i, (n - j) % n, k);
          for (int c : {0, 2}) odd = std::max(odd, std::abs(u(c, m, a) - u(c, m, b)));
          odd = std::max(odd, std::abs(u(1, m, a) + u(1, m, b)));
          even = std::max(even, std::abs(u(1, m, a)));
        }
  EXPECT_LE(odd, 1e-10 * u.max_abs());
  EXPECT_GT(even, 0.0);
}

TEST(Picard, LargeDataIsReportedAsDivergence) {
  const auto g = grid(16, 1);
  PicardConfig c;
  c.rho = 1e-3;
  const auto r = picard_iterate(scaled_forcing(g, NormFlavor::stokes_I0, 50.0), std::nullopt, c);
  EXPECT_TRUE(r.trace.diverged);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_NE(r.trace.message.find("10 rho"), std::string::npos);
}

TEST(Picard, TraceCsvHasHeaderAndRows) {
  const auto g = grid(16, 1);
  const auto r = picard_iterate(scaled_forcing(g, NormFlavor::stokes_I0, 1e-3), std::nullopt, {});
  const std::string csv = r.trace.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,composite_norm,step_norm,q_i,residual,div_rel");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.trace.steps.size() + 1);
  const auto j = r.trace.to_json();
  EXPECT_TRUE(j.at("converged").get<bool>());
}

TEST(Picard, RejectsMismatchedCoefficients) {
  const auto g = grid(16, 1, 0.5);
  EXPECT_THROW(picard_iterate(localized_forcing(g), zero_coefficients(grid(16, 1)), {}), ValidationError);
  EXPECT_THROW(picard_iterate(RealField::steady(g, 3), std::nullopt, {}), ValidationError);
}

TEST(PicardConfig, JsonRoundTripAndValidation) {
  PicardConfig c;
  c.rho = 0.02;
  c.norm_flavor = NormFlavor::oseen_int;
  const auto back = PicardConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  EXPECT_THROW(PicardConfig::from_json({{"rho", 0.1}, {"radius", 1}}), ValidationError);
  EXPECT_THROW(PicardConfig::from_json({{"rho", -1.0}}), ValidationError);
  EXPECT_THROW(PicardConfig::from_json({{"max_iters", 1}}), ValidationError);
  EXPECT_THROW(PicardConfig::from_json({{"norm_flavor", "oseen_Ikappa"}, {"delta", 0.3}}), ValidationError);
  EXPECT_THROW(PicardConfig::from_json({{"norm_flavor", "energy"}}), ValidationError);
}

TEST(Sweep, SmallEpsConvergesWithBoundedRatio) {
  const auto g = grid(16, 1);
  const auto t = smallness_sweep(NormFlavor::stokes_I0, {0.0}, {1e-2, 5e-3, 2.5e-3}, std::nullopt, g, {});
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.ratio, 1.0);
    EXPECT_NEAR(r.data_norm, r.data_target, 1e-12 * r.data_target);
  }
  // Solution ~ eps^2, ratio ~ eps: halves with eps.
  EXPECT_LT(t.rows[1].ratio, t.rows[0].ratio);
  EXPECT_NEAR(t.rows[1].ratio / t.rows[0].ratio, 0.5, 0.05);
  EXPECT_NEAR(t.rows[2].ratio / t.rows[1].ratio, 0.5, 0.05);
}

TEST(Sweep, LargeEpsIsATableEntry) {
  const auto g = grid(16, 1, 0.5);
  SweepTable t;
  EXPECT_NO_THROW(t = smallness_sweep(NormFlavor::oseen_Ikappa, {0.5}, {1.0, 30.0}, std::nullopt, g, {}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(t.rows[1].diverged || !t.rows[1].converged);
  EXPECT_NE(t.to_csv().find("kappa,eps"), std::string::npos);
}

TEST(Sweep, OseenFlavorsNeedNonzeroKappa) {
  const auto g = grid(16, 1);
  EXPECT_THROW(smallness_sweep(NormFlavor::oseen_int, {0.0}, {1e-2}, std::nullopt, g, {}), ValidationError);
  EXPECT_THROW(smallness_sweep(NormFlavor::stokes_I0, {}, {1e-2}, std::nullopt, g, {}), ValidationError);
}

TEST(Sweep, KappaPowers) {
  NormParams np;
  EXPECT_DOUBLE_EQ(data_kappa_power(NormFlavor::oseen_Ikappa, 0.25, np), std::pow(0.25, 0.2));
  EXPECT_DOUBLE_EQ(data_kappa_power(NormFlavor::oseen_int, 0.25, np), std::pow(0.25, 1.0 / 1.1));
  EXPECT_DOUBLE_EQ(solution_kappa_power(NormFlavor::oseen_int, 0.25, np), 0.5);
  EXPECT_DOUBLE_EQ(solution_kappa_power(NormFlavor::stokes_I0, 0.25, np), 1.0);
}
