#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/transform.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tpflow;

namespace {

OscillationSpec sway(double eps0 = 0.01) {
  OscillationSpec s;
  s.kind = OscillationKind::lateral_sway;
  s.amplitude = eps0;
  return s;
}

OscillationSpec random_harmonic(std::uint64_t seed, double eps0 = 0.01) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  OscillationSpec s;
  s.kind = OscillationKind::custom_harmonic;
  s.amplitude = eps0;
  for (int k = 1; k <= 2; ++k) {
    Harmonic h;
    h.k = k;
    h.cos_coeff = Vec3(u(rng), u(rng), u(rng));
    h.sin_coeff = Vec3(u(rng), u(rng), u(rng));
    s.harmonics.push_back(h);
  }
  return s;
}

SpaceTimeGrid grid(int n, double half = 3.2, int modes = 1) {
  SpaceTimeGrid g;
  g.box_half_length = half;
  g.n_space = n;
  g.n_time_modes = modes;
  return g;
}

RealField smooth_velocity(const SpaceTimeGrid& g, bool solenoidal = false) {
  const double src = solenoidal ? 0.0 : 1.0;
  RealField v = RealField::space_time(g, 3);
  const double k = pi / g.box_half_length;
  const int n = g.n_space;
  for (int m = 0; m < g.n_time(); ++m)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const Vec3 y = g.point(a, b, c);
          const double t = g.time(m);
          const std::size_t p = g.flat(a, b, c);
          v(0, m, p) = std::sin(k * y(1) + t) * std::cos(k * y(2)) + 0.4 * src * std::sin(k * y(0));
          v(1, m, p) = std::cos(k * y(0) - t) + 0.3 * std::sin(k * y(2));
          v(2, m, p) = std::sin(k * (y(0) + y(1))) * std::cos(t) - 0.2 * src * std::cos(k * y(2) + t);
        }
  return v;
}

}  // namespace

TEST(ForwardMap, FlatIsIdentity) {
  OscillationSpec s = sway(0.0);
  const Vec3 y(0.3, -0.7, 1.1);
  EXPECT_EQ(forward_map(y, 1.3, s, 0.0), y);
}

TEST(ForwardMap, StartsAtReference) {
  const OscillationSpec s = random_harmonic(3);
  const Vec3 y(0.3, -0.7, 0.4);
  EXPECT_LT((forward_map(y, 0.0, s, 0.8) - y).norm(), 1e-15);
}

TEST(ForwardMap, TranslatesOutsideSupport) {
  const OscillationSpec s = random_harmonic(4);
  const Vec3 y(2.5, 0.1, 0.0);
  EXPECT_EQ(forward_map(y, 1.7, s, 0.6), y + Vec3(1.7 * 0.6, 0, 0));
}

TEST(InverseMap, RoundTrip) {
  const OscillationSpec s = random_harmonic(5, 0.05);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.2, 2.2);
  for (int i = 0; i < 200; ++i) {
    const Vec3 y(u(rng), u(rng), u(rng));
    const double t = 0.03 * i;
    const InverseResult r = inverse_map(forward_map(y, t, s, 0.7), t, s, 0.7);
    EXPECT_LT((r.y - y).norm(), 1e-12 * (1.0 + y.norm()));
  }
}

TEST(InverseMap, PsiVanishesAwayFromBody) {
  const OscillationSpec s = random_harmonic(6);
  const double t = 2.1, kappa = 0.9;
  const Vec3 x = Vec3(3.0, -1.0, 0.5) + Vec3(t * kappa, 0, 0);
  EXPECT_EQ(inverse_map(x, t, s, kappa).psi, Vec3::Zero());
}

TEST(InverseMap, FlatGivesZeroPsi) {
  const OscillationSpec s = sway(0.0);
  EXPECT_LT(inverse_map(Vec3(0.2, 0.1, 0.0), 0.5, s, 0.3).psi.norm(), 1e-15);
}

TEST(Coefficients, FlatSpecGivesZeroFields) {
  const auto g = grid(16);
  const auto c = assemble_coefficients(sway(0.0), 0.5, g);
  EXPECT_EQ(c.a0.max_abs(), 0.0);
  EXPECT_EQ(c.A.max_abs(), 0.0);
  EXPECT_EQ(c.J0.max_abs(), 0.0);
  EXPECT_EQ(c.Bm1.max_abs(), 0.0);
}

TEST(Coefficients, WeightTimesInverseIsIdentity) {
  const auto g = grid(16, 3.2, 2);
  const auto c = assemble_coefficients(random_harmonic(7), 0.4, g);
  EXPECT_LT(inverse_identity_error(c), 1e-10);
}

TEST(Coefficients, VanishOutsideSupport) {
  const auto g = grid(16, 3.2, 2);
  const OscillationSpec s = random_harmonic(8);
  const auto c = assemble_coefficients(s, 0.4, g);
  const int n = g.n_space;
  double outside = 0.0;
  for (int m = 0; m < g.n_time(); ++m)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k) {
          if (g.point(a, b, k).norm() < s.support_radius()) continue;
          const std::size_t p = g.flat(a, b, k);
          outside = std::max({outside, std::abs(c.J0(0, m, p)), c.matrix(c.A, m, p).norm(),
                              c.matrix(c.Bm1, m, p).norm()});
          for (int q = 0; q < 3; ++q) outside = std::max(outside, std::abs(c.a0(q, m, p)));
        }
  EXPECT_LT(outside, 1e-12);
}

TEST(Coefficients, TimePeriodic) {
  const OscillationSpec s = random_harmonic(9);
  const Vec3 y(0.4, -0.9, 0.3);
  const auto a = coefficients_at(y, 0.8, s, 0.5, CoefficientMethod::analytic, 0.0);
  const auto b = coefficients_at(y, 0.8 + s.period, s, 0.5, CoefficientMethod::analytic, 0.0);
  EXPECT_LT((a.A - b.A).norm(), 1e-12);
  EXPECT_LT((a.a0 - b.a0).norm(), 1e-12);
  EXPECT_LT(std::abs(a.J0 - b.J0), 1e-12);
}

TEST(Coefficients, DifferencesMatchInverseJacobianAtSecondOrder) {
  const OscillationSpec s = random_harmonic(10, 0.03);
  const Vec3 y(0.7, -0.5, 0.9);
  const double t = 1.1;
  const auto exact = coefficients_at(y, t, s, 0.6, CoefficientMethod::analytic, 0.0);
  const auto c1 = coefficients_at(y, t, s, 0.6, CoefficientMethod::finite_difference, 0.1);
  const auto c2 = coefficients_at(y, t, s, 0.6, CoefficientMethod::finite_difference, 0.05);
  const double e1 = (c1.A - exact.A).norm(), e2 = (c2.A - exact.A).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
  const double t1 = (c1.a0 - exact.a0).norm(), t2 = (c2.a0 - exact.a0).norm();
  EXPECT_NEAR(std::log2(t1 / t2), 2.0, 0.2);
}

TEST(Coefficients, TimeDerivativeOfInverseMatchesDifferences) {
  const OscillationSpec s = random_harmonic(12, 0.02);
  const Vec3 y(0.2, 0.8, -0.6);
  const double t = 2.3, d = 1e-5;
  const auto c = coefficients_at(y, t, s, 0.0, CoefficientMethod::analytic, 0.0);
  const auto p = coefficients_at(y, t + d, s, 0.0, CoefficientMethod::analytic, 0.0);
  const auto m = coefficients_at(y, t - d, s, 0.0, CoefficientMethod::analytic, 0.0);
  EXPECT_LT((c.dtBm1 - (p.Bm1 - m.Bm1) / (2 * d)).norm(), 1e-8);
}

TEST(Coefficients, RejectsPeriodMismatch) {
  auto g = grid(16);
  g.period = 3.0;
  EXPECT_THROW(assemble_coefficients(sway(), 0.0, g), ValidationError);
}

TEST(ChainRule, SecondOrder) {
  const OscillationSpec s = random_harmonic(13, 0.02);
  const std::vector<Vec3> pts = {Vec3(0.3, 0.2, -0.5), Vec3(1.2, 0.4, 0.3), Vec3(-0.8, 1.1, 0.2)};
  const std::vector<double> ts = {0.4, 3.9};
  const auto a = chain_rule_check(s, 0.7, 0.1, pts, ts);
  const auto b = chain_rule_check(s, 0.7, 0.05, pts, ts);
  EXPECT_NEAR(std::log2(a.space_error / b.space_error), 2.0, 0.2);
  EXPECT_NEAR(std::log2(a.time_error / b.time_error), 2.0, 0.2);
}

TEST(DivergenceIdentity, FlatIsExact) {
  const auto g = grid(16);
  const auto c = zero_coefficients(g);
  const auto rep = transform_divergence_check(smooth_velocity(g), c);
  // Both sides reduce to div v; only the centered difference error remains.
  EXPECT_GT(rep.reference, 0.0);
  const auto g2 = grid(32);
  const auto rep2 = transform_divergence_check(smooth_velocity(g2), zero_coefficients(g2));
  EXPECT_NEAR(std::log2(rep.max_discrepancy / rep2.max_discrepancy), 2.0, 0.1);
}

TEST(DivergenceIdentity, LiteralTransposeDoesNotConverge) {
  OscillationSpec s = sway();
  s.b = 1.5;
  s.cutoff_inner = 0.1;
  std::vector<double> comp, lit;
  for (int n : {16, 32}) {
    const auto g = grid(n);
    const auto c = assemble_coefficients(s, 0.0, g);
    const RealField v = smooth_velocity(g, true);
    comp.push_back(transform_divergence_check(v, c, WeightForm::component).max_discrepancy);
    lit.push_back(transform_divergence_check(v, c, WeightForm::literal_transpose).max_discrepancy);
  }
  EXPECT_GT(comp[0] / comp[1], 3.0);
  EXPECT_LT(lit[0] / lit[1], 1.5);
  EXPECT_GT(lit[1], 10.0 * comp[1]);
}

TEST(Smallness, ScalesLinearlyWithAmplitude) {
  const auto g = grid(16, 3.2, 1);
  std::vector<SmallnessReport> r;
  for (double e : {0.005, 0.01, 0.02}) {
    OscillationSpec s = random_harmonic(14, e);
    r.push_back(assemble_coefficients(s, 0.3, g).smallness);
  }
  for (int i = 1; i < 3; ++i) {
    EXPECT_NEAR(r[i].phi_norm / r[i - 1].phi_norm, 2.0, 0.2);
    EXPECT_NEAR(r[i].coefficient_total() / r[i - 1].coefficient_total(), 2.0, 0.2);
    EXPECT_NEAR(r[i].inverse_total() / r[i - 1].inverse_total(), 2.0, 0.2);
  }
}

TEST(Noslip, FlatGivesTranslation) {
  const OscillationSpec s = sway(0.0);
  const auto rep = noslip_boundary_data(s, 0.7, body_surface_points(s, 20), 16);
  for (const Vec3& h : rep.values) EXPECT_LT((h - Vec3(0.7, 0, 0)).norm(), 1e-15);
}

TEST(Noslip, RadialBumpWithoutDrift) {
  OscillationSpec s;
  s.kind = OscillationKind::radial_bump;
  s.amplitude = 0.02;
  const auto pts = body_surface_points(s, 30);
  const auto rep = noslip_boundary_data(s, 0.0, pts, 32);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t m = 0; m < rep.times.size(); ++m) {
      const double t = rep.times[m];
      const auto pc = coefficients_at(pts[i], t, s, 0.0, CoefficientMethod::analytic, 0.0);
      EXPECT_LT((rep.values[i * rep.times.size() + m] - pc.weight * s.velocity(pts[i], t)).norm(), 1e-15);
    }
  EXPECT_LT(rep.max_time_mean, 1e-3);
  EXPECT_GT(rep.sup_h, 0.0);
  EXPECT_LE(rep.sup_h, (1.0 + rep.measured_c * s.amplitude) * rep.sup_dt_phi * (1 + 1e-12));
}

TEST(BodyVelocity, AbsorbedIntoDisplacement) {
  OscillationSpec s = sway(0.0);
  s.period = 6.0;
  s.vb_samples = {{0.0, Vec3(0.5, 0.0, 0.0)},
                  {1.5, Vec3(0.56, 0.01, 0.0)},
                  {3.0, Vec3(0.47, 0.0, -0.005)},
                  {4.5, Vec3(0.45, -0.01, 0.005)}};
  s.validate();
  // Mean of the periodic piecewise-linear interpolant.
  double mean = 0.0;
  const int nq = 200000;
  Vec3 travelled = Vec3::Zero();
  const double t_end = 2.2;
  auto vb = [&](double t) {
    const std::vector<double> ts = {0.0, 1.5, 3.0, 4.5, s.period};
    const std::vector<Vec3> vs = {s.vb_samples[0].v, s.vb_samples[1].v, s.vb_samples[2].v, s.vb_samples[3].v,
                                  s.vb_samples[0].v};
    int i = 0;
    while (ts[i + 1] < t) ++i;
    const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return Vec3((1 - w) * vs[i] + w * vs[i + 1]);
  };
  for (int i = 0; i < nq; ++i) {
    const double t = s.period * (i + 0.5) / nq;
    mean += vb(t)(0) / nq;
  }
  for (int i = 0; i < nq; ++i) travelled += vb(t_end * (i + 0.5) / nq) * (t_end / nq);
  EXPECT_NEAR(s.absorbed_kappa(), mean, 1e-9);
  const Vec3 y(0.2, 0.3, -0.1);  // inside the body, where the cutoff is 1
  EXPECT_LT((forward_map(y, t_end, s, s.absorbed_kappa()) - y - travelled).norm(), 1e-8);
  EXPECT_LT((s.displacement(y, s.period) - s.displacement(y, 0.0)).norm(), 1e-12);
  auto g = grid(16);
  g.period = s.period;
  EXPECT_THROW(assemble_coefficients(s, 0.0, g), ValidationError);
  EXPECT_NO_THROW(assemble_coefficients(s, s.absorbed_kappa(), g));
}

TEST(BodyVelocity, RejectsTransverseMean) {
  OscillationSpec s = sway(0.0);
  s.vb_samples = {{0.0, Vec3(0.5, 0.1, 0.0)}, {3.0, Vec3(0.5, 0.1, 0.0)}};
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(OscillationJson, RoundTripAndUnknownKeys) {
  const OscillationSpec s = random_harmonic(15);
  const OscillationSpec back = OscillationSpec::from_json(nlohmann::json::parse(s.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), s.to_json().dump());
  auto j = nlohmann::json::parse(s.to_json().dump());
  j["amplitdue"] = 0.1;
  EXPECT_THROW(OscillationSpec::from_json(j), ValidationError);
}

TEST(OscillationJson, RejectsLargeAmplitude) {
  nlohmann::json j = {{"kind", "radial_bump"}, {"amplitude", 2.0}, {"b", 1.0}};
  EXPECT_THROW(OscillationSpec::from_json(j), ValidationError);
}
