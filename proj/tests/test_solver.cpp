#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/solver.hpp"
#include "tpflow/symbols.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tpflow;

namespace {

SpaceTimeGrid grid(int n, int modes, double kappa = 0.0) {
  SpaceTimeGrid g;
  g.box_half_length = pi;
  g.n_space = n;
  g.n_time_modes = modes;
  g.period = 2.0;
  g.viscosity = 0.7;
  g.kappa = kappa;
  return g;
}

double rel(const RealField& a, const RealField& b) { return (a - b).l2_norm() / b.l2_norm(); }

RealField remove_spatial_mean(const RealField& p) {
  RealField out = p;
  for (int m = 0; m < p.layers(); ++m) {
    auto l = out.layer(0, m);
    double mean = 0.0;
    for (double v : l) mean += v;
    mean /= static_cast<double>(l.size());
    for (double& v : l) v -= mean;
  }
  return out;
}

// Periodic second-order central differences.
double fd(const RealField& u, int c, int a, int b, int d, std::array<int, 3> order) {
  const SpaceTimeGrid& g = u.grid();
  const int n = g.n_space;
  const double h = g.spacing();
  auto at = [&](int i, int j, int k) {
    return u(c, 0, g.flat((i + n) % n, (j + n) % n, (k + n) % n));
  };
  int ax = 0;
  while (order[ax] == 0) ++ax;
  int e[3] = {0, 0, 0};
  e[ax] = 1;
  if (order[ax] == 1)
    return (at(a + e[0], b + e[1], d + e[2]) - at(a - e[0], b - e[1], d - e[2])) / (2 * h);
  return (at(a + e[0], b + e[1], d + e[2]) - 2 * at(a, b, d) + at(a - e[0], b - e[1], d - e[2])) / (h * h);
}

}  // namespace

TEST(Solver, ZeroForcingGivesZero) {
  const auto g = grid(8, 1);
  LinearSolveReport rep;
  const FlowState s = solve_linear_tp(RealField::space_time(g, 3), &rep);
  EXPECT_EQ(s.velocity.max_abs(), 0.0);
  EXPECT_EQ(s.pressure.max_abs(), 0.0);
  EXPECT_EQ(rep.residual_rel, 0.0);
}

TEST(Solver, RecoversManufacturedSolution) {
  for (double kappa : {0.0, 0.8, -1.5}) {
    const auto g = grid(16, 2, kappa);
    const ManufacturedCase mc = manufactured_case(42, g, 0.6);
    LinearSolveReport rep;
    const FlowState s = solve_linear_tp(mc.forcing, &rep);
    EXPECT_LT(rel(s.velocity, mc.velocity), 1e-12) << kappa;
    EXPECT_LT(rel(s.pressure, mc.pressure), 1e-12) << kappa;
    EXPECT_LT(rep.residual_rel, 1e-13) << kappa;
    EXPECT_LT(rep.flagged_rel, 1e-13) << kappa;
    EXPECT_LT(relative_divergence(forward_transform(s.velocity)), 1e-12);
  }
}

TEST(Solver, SingleModeScaledBySymbol) {
  auto g = grid(16, 2, 0.9);
  const int j[3] = {2, -1, 3};
  const Vec3 xi(g.wavenumber(j[0]), g.wavenumber(j[1]), g.wavenumber(j[2]));
  const Eigen::Vector3cd c = helmholtz_projector(xi).cast<cplx>() * Eigen::Vector3cd(cplx(1, 0.5), -0.3, cplx(0, 2));
  SpectralField f = SpectralField::space_time(g, 3);
  for (int i = 0; i < 3; ++i) {
    f.coeff(i, 1, j[0], j[1], j[2]) = c(i);
    f.coeff(i, -1, -j[0], -j[1], -j[2]) = std::conj(c(i));
  }
  const SpectralFlow s = solve_linear_spectral(f);
  const cplx d = oseen_denominator(xi, g.viscosity, g.kappa, cplx(0, g.omega()));
  for (int i = 0; i < 3; ++i)
    EXPECT_LT(std::abs(s.velocity.coeff(i, 1, j[0], j[1], j[2]) - c(i) / d), 1e-15);
  EXPECT_LT(spectral_l2(s.pressure), 1e-15);
  SpectralField other = s.velocity;
  for (int i = 0; i < 3; ++i) {
    other.coeff(i, 1, j[0], j[1], j[2]) = 0.0;
    other.coeff(i, -1, -j[0], -j[1], -j[2]) = 0.0;
  }
  EXPECT_EQ(spectral_l2(other), 0.0);
}

TEST(Solver, FlaggedModesAreProjectedOutAndReported) {
  const auto g = grid(8, 1);
  RealField f = RealField::space_time(g, 3);
  for (double& v : f.component(0)) v = 1.0;  // pure (k=0, xi=0) forcing
  LinearSolveReport rep;
  const FlowState s = solve_linear_tp(f, &rep);
  EXPECT_LT(s.velocity.max_abs(), 1e-15);
  EXPECT_NEAR(rep.flagged_rel, 1.0, 1e-14);
  EXPECT_GT(rep.modes_flagged, 0);
  EXPECT_EQ(rep.residual_rel, 0.0);
}

TEST(Solver, LinearityAndModeDecoupling) {
  const auto g = grid(12, 2, 0.4);
  const RealField f1 = manufactured_case(1, g, 0.8).forcing;
  const RealField f2 = manufactured_case(2, g, 0.8).forcing;
  const double al = 1.7, be = -0.6;
  const FlowState s = solve_linear_tp(al * f1 + be * f2);
  const FlowState s1 = solve_linear_tp(f1), s2 = solve_linear_tp(f2);
  EXPECT_LT(rel(s.velocity, al * s1.velocity + be * s2.velocity), 1e-12);
  EXPECT_LT(rel(s.pressure, al * s1.pressure + be * s2.pressure), 1e-12);

  const FlowState ss = solve_linear_tp(broadcast_steady(project_steady(f1)));
  EXPECT_LT(rel(ss.velocity, broadcast_steady(project_steady(s1.velocity))), 1e-12);
  const FlowState so = solve_linear_tp(project_oscillatory(f1));
  EXPECT_LT(rel(so.velocity, project_oscillatory(s1.velocity)), 1e-12);
}

TEST(Solver, SteadyStokesSymbolIsPositive) {
  const auto g = grid(12, 1);
  const ManufacturedCase mc = manufactured_case(5, g, 0.8);
  // A divergence-free steady forcing: the steady part of v*.
  const RealField fs = broadcast_steady(project_steady(mc.velocity));
  const FlowState s = solve_linear_tp(fs);
  double dot = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) dot += fs.values()[i] * s.velocity.values()[i];
  EXPECT_GT(dot, 0.0);
}

TEST(Divergence, GradientGivesLaplacianAndCurlVanishes) {
  const auto g = grid(12, 1);
  const ManufacturedCase mc = manufactured_case(9, g, 0.8);
  const SpectralField ph = forward_transform(mc.pressure);
  const RealField lap = inverse_transform(laplacian(ph));
  EXPECT_LT(rel(divergence(inverse_transform(gradient(ph))), lap), 1e-12);
  const RealField c = inverse_transform(curl(forward_transform(mc.velocity)));
  EXPECT_LT(divergence(c).l2_norm(), 1e-12 * c.l2_norm());
}

TEST(Manufactured, DeterministicAndDivergenceFree) {
  const auto g = grid(12, 1, 0.3);
  const ManufacturedCase a = manufactured_case(77, g, 0.7);
  const ManufacturedCase b = manufactured_case(77, g, 0.7);
  EXPECT_TRUE(std::equal(a.forcing.values().begin(), a.forcing.values().end(), b.forcing.values().begin()));
  EXPECT_TRUE(std::equal(a.velocity.values().begin(), a.velocity.values().end(), b.velocity.values().begin()));
  EXPECT_LT(divergence(a.velocity).l2_norm(), 1e-12 * a.velocity.l2_norm());
  const ManufacturedCase c = manufactured_case(78, g, 0.7);
  EXPECT_GT(rel(c.velocity, a.velocity), 0.1);
}

TEST(Manufactured, SteadyForcingMatchesFiniteDifferences) {
  // Second-order differences of the steady parts; error must drop ~4x per halving of h.
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const auto g = grid(r == 0 ? 32 : 64, 1, 0.6);
    const ManufacturedCase mc = manufactured_case(3, g, 3.0);
    const RealField vs = project_steady(mc.velocity), ps = project_steady(mc.pressure);
    const RealField fs = project_steady(mc.forcing);
    double e = 0.0, scale = 0.0;
    const int n = g.n_space;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d)
          for (int i = 0; i < 3; ++i) {
            const double lap = fd(vs, i, a, b, d, {2, 0, 0}) + fd(vs, i, a, b, d, {0, 2, 0}) +
                               fd(vs, i, a, b, d, {0, 0, 2});
            std::array<int, 3> e1{0, 0, 0};
            e1[i] = 1;
            const double approx = -g.viscosity * lap - g.kappa * fd(vs, i, a, b, d, {1, 0, 0}) +
                                  fd(ps, 0, a, b, d, e1);
            const double exact = fs(i, 0, g.flat(a, b, d));
            e = std::max(e, std::abs(approx - exact));
            scale = std::max(scale, std::abs(exact));
          }
    err[r] = e / scale;
  }
  EXPECT_LT(err[0], 0.05);
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.4);
}

TEST(Manufactured, AnalyticCaseShowsSpectralAccuracy) {
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const auto g = grid(r == 0 ? 16 : 32, 2, 0.5);
    const ManufacturedCase mc = analytic_manufactured_case(g, 1.2);
    LinearSolveReport rep;
    const FlowState s = solve_linear_tp(mc.forcing, &rep);
    err[r] = rel(s.velocity, mc.velocity);
    EXPECT_LT(rel(remove_spatial_mean(s.pressure), remove_spatial_mean(mc.pressure)), 10 * err[r] + 1e-12);
  }
  EXPECT_GT(err[0] / err[1], 100.0) << err[0] << " " << err[1];
}
