// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here; a failing criterion is reported, never relaxed.
//
//   tpflow_acceptance [--configs DIR] [--only N[,N...]]

#include "cli.hpp"

#include "tpflow/fourier.hpp"
#include "tpflow/fundamental.hpp"
#include "tpflow/operators.hpp"
#include "tpflow/picard.hpp"
#include "tpflow/solver.hpp"
#include "tpflow/transform.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

using namespace tpflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "" : "!") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

SpaceTimeGrid box(double half, int n, int modes, double kappa = 0.0, double mu = 1.0) {
  SpaceTimeGrid g;
  g.box_half_length = half;
  g.n_space = n;
  g.n_time_modes = modes;
  g.kappa = kappa;
  g.viscosity = mu;
  return g;
}

double rel(const RealField& a, const RealField& b) {
  RealField d = a;
  d -= b;
  return d.l2_norm() / b.l2_norm();
}

std::vector<double> log_radii(double r0, double r1, int n) {
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = r0 * std::pow(r1 / r0, static_cast<double>(i) / (n - 1));
  return r;
}

// Random low-mode trigonometric field, solenoidal through a spectral curl.
RealField random_modes(const SpaceTimeGrid& g, int comps, std::uint64_t seed, bool solenoidal) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mode(-3, 3), tmode(-g.n_time_modes, g.n_time_modes);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * pi);
  RealField f = RealField::space_time(g, comps);
  const int n = g.n_space;
  for (int c = 0; c < comps; ++c)
    for (int term = 0; term < 6; ++term) {
      const Vec3 xi(g.wavenumber(mode(rng)), g.wavenumber(mode(rng)), g.wavenumber(mode(rng)));
      const int k = tmode(rng);
      const double a = amp(rng), ph = phase(rng);
      for (int m = 0; m < g.n_time(); ++m)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
              f(c, m, g.flat(i, j, l)) += a * std::cos(xi.dot(g.point(i, j, l)) + k * g.omega() * g.time(m) + ph);
    }
  return solenoidal ? inverse_transform(curl(forward_transform(f))) : f;
}

// ------------------------------------------------------------------ 1
Outcome roundtrip_parseval() {
  Outcome o;
  const auto g = box(pi, 32, 8);
  double rt = 0.0, pv = 0.0;
  for (int s = 0; s < 10; ++s) {
    RealField f = RealField::space_time(g, 1);
    std::mt19937_64 rng(100 + s);
    std::normal_distribution<double> nd;
    for (double& v : f.values()) v = nd(rng);
    const SpectralField F = forward_transform(f);
    rt = std::max(rt, rel(inverse_transform(F), f));
    // Direct quadrature: time mean of h^3 sum |u|^2.
    double direct = 0.0;
    for (double v : f.values()) direct += v * v;
    direct *= std::pow(g.spacing(), 3) / g.n_time();
    pv = std::max(pv, std::abs(spectral_l2(F) / std::sqrt(direct) - 1.0));
  }
  o.check(rt <= 1e-10, fmt("round-trip %.2e <= 1e-10", rt));
  o.check(pv <= 1e-10, fmt("Parseval %.2e <= 1e-10", pv));
  return o;
}

// ------------------------------------------------------------------ 2
Outcome linear_solver() {
  Outcome o;
  const auto g = box(pi, 48, 8, 0.7);
  const ManufacturedCase mc = manufactured_case(7, g, 0.6);
  LinearSolveReport rep;
  const FlowState s = solve_linear_tp(mc.forcing, &rep);
  const double rv = rel(s.velocity, mc.velocity), rp = rel(s.pressure, mc.pressure);
  o.check(rep.residual_rel <= 1e-10, fmt("residual %.2e <= 1e-10", rep.residual_rel));
  o.check(std::max(rv, rp) <= 1e-8, fmt("recovery %.2e <= 1e-8 (48^3 x 17)", std::max(rv, rp)));
  double err[2];
  for (int i = 0; i < 2; ++i) {
    const ManufacturedCase a = analytic_manufactured_case(box(pi, i == 0 ? 24 : 48, 8, 0.7), 2.5);
    err[i] = rel(solve_linear_tp(a.forcing).velocity, a.velocity);
  }
  o.check(err[0] / err[1] >= 1e2, fmt("analytic data n 24 -> 48: %.2e -> %.2e, ratio >= 1e2", err[0], err[1]));
  return o;
}

// ------------------------------------------------------------------ 3
Outcome kernel_decay() {
  Outcome o;
  std::vector<Vec3> pts;
  for (double r : log_radii(2.0, 20.0, 12)) pts.push_back(r * Vec3(0.0, 0.6, 0.8));
  double prev[2] = {0.0, 0.0};
  for (double half : {32.0, 64.0}) {
    const auto g = box(half, static_cast<int>(2.0 * half / 0.5), 4);
    const auto s = eval_tp_kernel(pts, g, 1);
    const double s0 = fit_kernel_decay(s, 0, 1).slope, s1 = fit_kernel_decay(s, 1, 1).slope;
    o.check(s0 >= -3.3 && s0 <= -2.7, fmt("L=%g: kernel slope %.3f in [-3.3, -2.7]", half, s0));
    o.check(s1 >= -4.4 && s1 <= -3.6, fmt("gradient slope %.3f in [-4.4, -3.6]", s1));
    if (half == 64.0)
      o.check(std::abs(s0 - prev[0]) < 0.05 && std::abs(s1 - prev[1]) < 0.05,
              fmt("slope change %.4f, %.4f < 0.05", std::abs(s0 - prev[0]), std::abs(s1 - prev[1])));
    prev[0] = s0;
    prev[1] = s1;
  }
  return o;
}

// ------------------------------------------------------------------ 4
Outcome mu_phi() {
  Outcome o;
  MuPhiConfig c;
  c.theta = 1.0;
  c.period = 2.0 * pi;
  const double kmax = std::sqrt(c.theta / c.period);
  for (int j = 1; j <= 20; ++j) c.kappas.push_back(kmax * j / 21.0);
  const MuPhiReport r = check_mu_phi(c);
  o.check(r.margin_imag > 0.0, fmt("Im margin %.3e > 0 (C_theta %.4f)", r.margin_imag, r.c_theta));
  o.check(r.margin_lower > 0.0 && r.margin_upper > 0.0,
          fmt("|mu| margins %.3e, %.3e > 0", r.margin_lower, r.margin_upper));
  const double d = std::abs(phi_function(0.01) - 1.0 / std::sqrt(2.0));
  o.check(d <= 1e-3, fmt("|Phi(0.01) - 1/sqrt 2| = %.3e <= 1e-3", d));
  return o;
}

// ------------------------------------------------------------------ 5
Outcome oseen_wake() {
  Outcome o;
  const double mu = 1.0, kappa = 1.0;
  const auto radii = log_radii(10.0, 1000.0, 25);
  std::vector<double> along, against;
  for (double r : radii) {
    along.push_back(steady_oseen_kernel(Vec3(-r, 0, 0), mu, kappa).norm());
    against.push_back(steady_oseen_kernel(Vec3(r, 0, 0), mu, kappa).norm());
  }
  const double sa = fit_power_law(radii, along).slope, sg = fit_power_law(radii, against).slope;
  o.check(std::abs(sa + 1.0) <= 0.1, fmt("wake slope %.3f = -1 +- 0.1", sa));
  o.check(std::abs(sg + 2.0) <= 0.1, fmt("upstream slope %.3f = -2 +- 0.1", sg));
  const std::vector<Vec3> pts = {Vec3(5, 0, 0), Vec3(-5, 0, 0), Vec3(0, 5, 0), Vec3(-3, 0, 4)};
  const auto b = box_steady_kernel(pts, box(16.0, 64, 1, kappa, mu));
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Mat3 ref = steady_oseen_kernel(pts[i], mu, kappa);
    worst = std::max(worst, (b[i] - ref).norm() / ref.norm());
  }
  o.check(worst <= 0.02, fmt("box vs closed form at |x|=5: %.2e <= 2e-2", worst));
  return o;
}

// ------------------------------------------------------------------ 6
RealField solenoidal_probe(const SpaceTimeGrid& g) {
  RealField v = RealField::space_time(g, 3);
  const double k = pi / g.box_half_length;
  for (int m = 0; m < g.n_time(); ++m)
    for (int a = 0; a < g.n_space; ++a)
      for (int b = 0; b < g.n_space; ++b)
        for (int c = 0; c < g.n_space; ++c) {
          const Vec3 y = g.point(a, b, c);
          const double t = g.time(m);
          const std::size_t p = g.flat(a, b, c);
          v(0, m, p) = std::sin(k * y(1) + t) * std::cos(k * y(2));
          v(1, m, p) = std::cos(k * y(0) - t) + 0.3 * std::sin(k * y(2));
          v(2, m, p) = std::sin(k * (y(0) + y(1))) * std::cos(t);
        }
  return v;
}

OscillationSpec harmonic(double eps0) {
  OscillationSpec s;
  s.kind = OscillationKind::custom_harmonic;
  s.amplitude = eps0;
  s.harmonics.push_back({1, Vec3(0.3, -0.5, 0.2), Vec3(0.6, 0.1, -0.4)});
  s.harmonics.push_back({2, Vec3(-0.2, 0.3, 0.1), Vec3(0.1, 0.2, 0.3)});
  return s;
}

Outcome transform_algebra() {
  Outcome o;
  OscillationSpec sway;
  sway.kind = OscillationKind::lateral_sway;
  sway.amplitude = 0.01;
  sway.b = 1.5;
  sway.cutoff_inner = 0.1;
  double ident = 0.0, div[2];
  for (int i = 0; i < 2; ++i) {
    const auto g = box(3.2, i == 0 ? 32 : 64, 1);
    const auto c = assemble_coefficients(sway, 0.0, g);
    ident = std::max(ident, inverse_identity_error(c));
    div[i] = transform_divergence_check(solenoidal_probe(g), c).relative();
  }
  o.check(ident <= 1e-10, fmt("weight (I + B) = I: %.2e <= 1e-10", ident));
  const double dord = std::log2(div[0] / div[1]);
  o.check(dord >= 1.8 && dord <= 2.2, fmt("divergence identity order %.3f in [1.8, 2.2]", dord));

  const std::vector<Vec3> pts = {Vec3(0.3, 0.2, -0.5), Vec3(1.2, 0.4, 0.3), Vec3(-0.8, 1.1, 0.2)};
  const std::vector<double> ts = {0.4, 3.9};
  const auto a = chain_rule_check(harmonic(0.02), 0.7, 0.1, pts, ts);
  const auto b = chain_rule_check(harmonic(0.02), 0.7, 0.05, pts, ts);
  const double os = std::log2(a.space_error / b.space_error), ot = std::log2(a.time_error / b.time_error);
  o.check(os >= 1.8 && os <= 2.2 && ot >= 1.8 && ot <= 2.2,
          fmt("chain rule orders %.3f (space), %.3f (time) in [1.8, 2.2]", os, ot));

  const auto g = box(3.2, 32, 1);
  std::vector<SmallnessReport> r;
  for (double e : {0.005, 0.01, 0.02}) {
    sway.amplitude = e;
    r.push_back(assemble_coefficients(sway, 0.0, g).smallness);
  }
  double worst = 0.0;
  for (int i = 1; i < 3; ++i)
    for (double q : {r[i].phi_norm / r[i - 1].phi_norm, r[i].coefficient_total() / r[i - 1].coefficient_total(),
                     r[i].inverse_total() / r[i - 1].inverse_total()})
      worst = std::max(worst, std::abs(q / 2.0 - 1.0));
  o.check(worst <= 0.1, fmt("smallness norms per amplitude doubling: deviation %.3f <= 0.1", worst));
  return o;
}

// ------------------------------------------------------------------ 7
Outcome operator_properties() {
  Outcome o;
  const auto g = box(pi, 24, 2, 0.4, 0.8);
  OscillationSpec s;
  s.amplitude = 0.02;
  s.b = 1.2;
  s.cutoff_inner = 0.3;
  const PerturbationOperators ops(assemble_coefficients(s, g.kappa, g));
  const PerturbationOperators flat(zero_coefficients(g));
  const RealField w1 = random_modes(g, 3, 1, true), w2 = random_modes(g, 3, 2, true);
  const RealField q1 = random_modes(g, 1, 3, false), q2 = random_modes(g, 1, 4, false);
  const double al = 1.7, be = -0.6;
  RealField wc = al * w1 + be * w2, qc = al * q1 + be * q2;
  RealField lhs = ops.apply_L(wc, qc);
  RealField rhs = al * ops.apply_L(w1, q1) + be * ops.apply_L(w2, q2);
  rhs -= lhs;
  const double lin = rhs.max_abs() / lhs.max_abs();
  o.check(lin <= 1e-12, fmt("L linearity %.2e <= 1e-12", lin));
  RealField n2 = flat.apply_N(-2.5 * w1), n1 = 6.25 * flat.apply_N(w1);
  n2 -= n1;
  const double hom = n2.max_abs() / n1.max_abs();
  o.check(hom <= 1e-12, fmt("N homogeneity %.2e <= 1e-12", hom));
  const NonlinearSplit sp = split_nonlinearity(w1);
  const double id = std::max(sp.identity_error_S, sp.identity_error_perp);
  o.check(id <= 1e-10, fmt("div tilde N1 = N1 (steady, oscillatory) %.2e <= 1e-10", id));
  return o;
}

// ------------------------------------------------------------------ 8
Outcome picard() {
  Outcome o;
  for (double kappa : {0.0, 0.5}) {
    const auto g = box(pi, 16, 2, kappa);
    PicardConfig c;
    c.norm_flavor = kappa == 0.0 ? NormFlavor::stokes_I0 : NormFlavor::oseen_Ikappa;
    RealField f = localized_forcing(g);
    f *= 1e-3 / data_norm(f, c.norm_flavor, c.norm).total;
    const auto base = picard_iterate(f, std::nullopt, c);
    const std::string tag = fmt("kappa=%g", kappa);
    o.check(base.trace.converged && base.trace.max_q() < 0.7 && base.trace.final_residual <= 1e-7,
            tag + fmt(": q_max %.2e < 0.7, residual %.2e <= 1e-7", base.trace.max_q(), base.trace.final_residual));
    const auto half = picard_iterate(0.5 * f, std::nullopt, c);
    const double ratio = half.trace.steps.back().composite_norm / base.trace.steps.back().composite_norm;
    o.check(half.trace.converged && std::abs(ratio / 0.5 - 1.0) <= 0.1,
            fmt("half data -> solution ratio %.4f = 0.5 +- 10%%", ratio));
    OscillationSpec s;
    s.amplitude = 0.01;
    s.b = 1.0;
    const auto osc = picard_iterate(f, s, c);
    const double dq = osc.trace.max_q() - base.trace.max_q();
    o.check(osc.trace.converged && osc.trace.final_residual <= 1e-7 && dq < 0.2,
            fmt("eps0=0.01: converged, q_max rises by %.3f < 0.2, residual %.2e", dq, osc.trace.final_residual));
  }
  return o;
}

// ------------------------------------------------------------------ 9
std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& configs) {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "tpflow_acceptance";
  fs::remove_all(root);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(configs))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  int same = 0;
  // The subcommands' one-line summaries would interleave with the report.
  std::fflush(stdout);
  const int saved = ::dup(STDOUT_FILENO);
  const int null = ::open("/dev/null", O_WRONLY);
  ::dup2(null, STDOUT_FILENO);
  ::close(null);
  for (const auto& f : files) {
    const std::string cmd = cli::config_command(f.string());
    const fs::path a = root / "a" / f.stem(), b = root / "b" / f.stem();
    const int ra = cli::run({cmd, "--config", f.string(), "--out", a.string(), "--threads", "1"});
    const int rb = cli::run({cmd, "--config", f.string(), "--out", b.string(), "--threads", "2"});
    bool ok = ra == rb && fs::exists(a);
    if (ok)
      for (const auto& e : fs::directory_iterator(a)) {
        const fs::path other = b / e.path().filename();
        ok = ok && fs::exists(other) && slurp(e.path()) == slurp(other);
      }
    if (!ok) o.check(false, f.filename().string() + " differs between runs");
    same += ok;
  }
  std::cout.flush();
  std::fflush(stdout);
  ::dup2(saved, STDOUT_FILENO);
  ::close(saved);
  o.check(same == static_cast<int>(files.size()) && !files.empty(),
          std::to_string(same) + "/" + std::to_string(files.size()) + " configs byte-identical across two runs");
  fs::remove_all(root);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  fs::path configs = fs::path(TPFLOW_SOURCE_DIR) / "configs";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--configs" && i + 1 < argc) {
      configs = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: %s [--configs DIR] [--only N[,N...]]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> all = {
      {1, "transform round-trip and Parseval", 5.0, roundtrip_parseval},
      {2, "linear solver residual and recovery", 60.0, linear_solver},
      {3, "oscillatory kernel decay", 600.0, kernel_decay},
      {4, "mu/Phi inequalities", 10.0, mu_phi},
      {5, "steady Oseen wake anisotropy", 120.0, oseen_wake},
      {6, "transform algebra", 120.0, transform_algebra},
      {7, "operator properties", 60.0, operator_properties},
      {8, "Picard contraction and smallness scaling", 600.0, picard},
      {9, "determinism of shipped configs", 1e9, [&] { return determinism(configs); }},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s < 1e9) o.check(dt < c.limit_s, fmt("%.1f s < %g s", dt, c.limit_s));
    else o.notes.push_back(fmt("%.1f s", dt));
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %d %s: %s | %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
