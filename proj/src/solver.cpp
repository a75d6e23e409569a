#include "tpflow/solver.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/parallel.hpp"
#include "tpflow/symbols.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace tpflow {

nlohmann::ordered_json LinearSolveReport::to_json() const {
  return {{"residual_rel", residual_rel},
          {"zero_mode_policy", zero_mode_policy},
          {"modes_solved", modes_solved},
          {"modes_flagged", modes_flagged},
          {"flagged_rel", flagged_rel}};
}

namespace {

bool flagged(const SpaceTimeGrid& g, int k, int a, int b, int c) {
  if (g.is_nyquist(a) || g.is_nyquist(b) || g.is_nyquist(c)) return true;
  return k == 0 && a == 0 && b == 0 && c == 0;
}

Vec3 frequency(const SpaceTimeGrid& g, int a, int b, int c) {
  return {g.wavenumber(g.space_mode(a)), g.wavenumber(g.space_mode(b)), g.wavenumber(g.space_mode(c))};
}

}  // namespace

void zero_flagged_modes(SpectralField& s) {
  const SpaceTimeGrid& g = s.grid();
  const int n = g.n_space;
  for (int comp = 0; comp < s.components(); ++comp)
    for (int kidx = 0; kidx < s.layers(); ++kidx) {
      const int k = s.mode_of_layer(kidx);
      auto d = s.layer(comp, kidx);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            if (flagged(g, k, a, b, c)) d[g.flat(a, b, c)] = 0.0;
    }
}

SpectralField oseen_operator(const SpectralField& v, const SpectralField& p) {
  const SpaceTimeGrid& g = v.grid();
  SpectralField out = time_derivative(v);
  SpectralField lap = laplacian(v);
  lap *= -g.viscosity;
  out += lap;
  SpectralField drift = partial(v, {1, 0, 0});
  drift *= -g.kappa;
  out += drift;
  out += gradient(p);
  return out;
}

SpectralFlow solve_linear_spectral(const SpectralField& f, LinearSolveReport* report) {
  const auto start = std::chrono::steady_clock::now();
  if (f.components() != 3) throw ValidationError("solve_linear: forcing must have 3 components");
  const SpaceTimeGrid& g = f.grid();
  g.validate();
  const int n = g.n_space;
  const std::size_t ls = g.n_points();
  SpectralFlow out{SpectralField(g, 3, f.layers()), SpectralField(g, 1, f.layers())};
  std::vector<char> is_flagged(static_cast<std::size_t>(f.layers()) * ls, 0);

  parallel_for(0, static_cast<std::size_t>(f.layers()) * ls, [&](std::size_t idx) {
    const int kidx = static_cast<int>(idx / ls);
    const std::size_t flat = idx % ls;
    const int a = static_cast<int>(flat / (static_cast<std::size_t>(n) * n));
    const int b = static_cast<int>((flat / n) % n);
    const int c = static_cast<int>(flat % n);
    const int k = f.mode_of_layer(kidx);
    if (flagged(g, k, a, b, c)) {
      is_flagged[idx] = 1;
      return;
    }
    const Eigen::Vector3cd fh(f(0, kidx, flat), f(1, kidx, flat), f(2, kidx, flat));
    const Vec3 xi = frequency(g, a, b, c);
    const cplx lambda(0.0, g.omega() * k);
    const cplx d = oseen_denominator(xi, g.viscosity, g.kappa, lambda);
    if (std::abs(d) < 1e-14) {
      std::ostringstream msg;
      msg << "singular mode k = " << k << ", j = (" << g.space_mode(a) << ", " << g.space_mode(b)
          << ", " << g.space_mode(c) << ")";
      throw SingularModeError(msg.str());
    }
    const double xi2 = xi.squaredNorm();
    Eigen::Vector3cd vh;
    cplx ph = 0.0;
    if (xi2 == 0.0) {
      vh = fh / d;
    } else {
      vh = (fh - xi.cast<cplx>() * (xi.cast<cplx>().dot(fh) / xi2)) / d;
      ph = cplx(0.0, -1.0) * xi.cast<cplx>().dot(fh) / xi2;
    }
    for (int i = 0; i < 3; ++i) out.velocity(i, kidx, flat) = vh(i);
    out.pressure(0, kidx, flat) = ph;
  });

  if (report != nullptr) {
    SpectralField dropped = f;
    long long nflag = 0;
    for (std::size_t idx = 0; idx < is_flagged.size(); ++idx) {
      if (is_flagged[idx]) {
        ++nflag;
        continue;
      }
      for (int i = 0; i < 3; ++i) dropped(i, static_cast<int>(idx / ls), idx % ls) = 0.0;
    }
    const double fnorm = spectral_l2(f);
    SpectralField res = oseen_operator(out.velocity, out.pressure);
    res -= f;
    res += dropped;  // flagged forcing is reported separately
    report->modes_flagged = nflag;
    report->modes_solved = static_cast<long long>(is_flagged.size()) - nflag;
    report->flagged_rel = fnorm > 0.0 ? spectral_l2(dropped) / fnorm : 0.0;
    report->residual_rel = fnorm > 0.0 ? spectral_l2(res) / fnorm : 0.0;
    report->wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

FlowState solve_linear_tp(const RealField& f, LinearSolveReport* report) {
  const SpectralFlow s = solve_linear_spectral(forward_transform(f), report);
  return {inverse_transform(s.velocity), inverse_transform(s.pressure)};
}

RealField divergence(const RealField& v) {
  return inverse_transform(divergence(forward_transform(v)));
}

double relative_divergence(const SpectralField& v) {
  const double vn = spectral_l2(v);
  return vn > 0.0 ? spectral_l2(divergence(v)) / vn : 0.0;
}

ManufacturedCase manufactured_case(std::uint64_t seed, const SpaceTimeGrid& g, double smoothness) {
  g.validate();
  if (!(smoothness > 0.0)) throw ValidationError("smoothness must be > 0");
  const int band = std::min(g.n_space / 2 - 1,
                            static_cast<int>(std::ceil(37.0 / smoothness)));
  const int nk = g.n_time_modes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpectralField pot = SpectralField::space_time(g, 3);
  SpectralField pres = SpectralField::space_time(g, 1);
  auto draw = [&](SpectralField& s, int comps, bool zero_mean) {
    for (int k = -nk; k <= nk; ++k)
      for (int j1 = -band; j1 <= band; ++j1)
        for (int j2 = -band; j2 <= band; ++j2)
          for (int j3 = -band; j3 <= band; ++j3) {
            const double amp =
                std::exp(-smoothness * std::sqrt(double(j1 * j1 + j2 * j2 + j3 * j3)) - 0.5 * std::abs(k));
            for (int c = 0; c < comps; ++c) {
              const double re = nd(rng), im = nd(rng);
              if (zero_mean && j1 == 0 && j2 == 0 && j3 == 0) continue;
              s.coeff(c, k, j1, j2, j3) = amp * cplx(re, im);
            }
          }
    // Hermitian part: coefficients of a real field.
    SpectralField sym = s;
    for (int c = 0; c < comps; ++c)
      for (int k = -nk; k <= nk; ++k)
        for (int j1 = -band; j1 <= band; ++j1)
          for (int j2 = -band; j2 <= band; ++j2)
            for (int j3 = -band; j3 <= band; ++j3)
              sym.coeff(c, k, j1, j2, j3) =
                  0.5 * (s.coeff(c, k, j1, j2, j3) + std::conj(s.coeff(c, -k, -j1, -j2, -j3)));
    s = sym;
  };
  draw(pot, 3, false);
  draw(pres, 1, true);
  const SpectralField vel = curl(pot);
  SpectralField f = oseen_operator(vel, pres);
  return {inverse_transform(vel), inverse_transform(pres), inverse_transform(f)};
}

namespace {

// Derivatives of G(s) = exp(a sin s) up to third order.
double profile(double a, double s, int order) {
  const double sn = std::sin(s), cs = std::cos(s), gv = std::exp(a * sn);
  switch (order) {
    case 0: return gv;
    case 1: return a * cs * gv;
    case 2: return (a * a * cs * cs - a * sn) * gv;
    case 3: return (a * a * a * cs * cs * cs - 3.0 * a * a * sn * cs - a * cs) * gv;
    default: throw std::logic_error("profile order");
  }
}

struct AnalyticPotential {
  double a;
  double L;
  double omega;
  double phase[4][3];
  double tau[4][3];  // alpha, beta, gamma of alpha + beta cos wt + gamma sin wt

  double time_factor(int c, double t, int dt) const {
    const double wt = omega * t;
    if (dt == 0) return tau[c][0] + tau[c][1] * std::cos(wt) + tau[c][2] * std::sin(wt);
    return omega * (-tau[c][1] * std::sin(wt) + tau[c][2] * std::cos(wt));
  }
  // d^alpha (d/dt)^dt of component c (c = 3 is the pressure profile).
  double eval(int c, const Vec3& x, std::array<int, 3> alpha, double t, int dt) const {
    double v = time_factor(c, t, dt);
    for (int i = 0; i < 3; ++i)
      v *= std::pow(pi / L, alpha[i]) * profile(a, pi * x(i) / L + phase[c][i], alpha[i]);
    return v;
  }
};

}  // namespace

ManufacturedCase analytic_manufactured_case(const SpaceTimeGrid& g, double sharpness) {
  g.validate();
  AnalyticPotential pot{sharpness, g.box_half_length, g.omega(), {}, {}};
  const double phases[4][3] = {{0.3, 1.1, -0.7}, {2.0, -0.4, 0.9}, {-1.3, 0.6, 2.4}, {0.8, -2.2, 1.7}};
  const double taus[4][3] = {{0.7, 0.5, -0.3}, {-0.4, 0.2, 0.6}, {0.5, -0.6, 0.1}, {0.3, 0.4, -0.5}};
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 3; ++i) {
      pot.phase[c][i] = phases[c][i];
      pot.tau[c][i] = taus[c][i];
    }
  ManufacturedCase mc{RealField::space_time(g, 3), RealField::space_time(g, 1), RealField::space_time(g, 3)};
  const int n = g.n_space;
  const double mu = g.viscosity, kappa = g.kappa;
  // curl: v_i = d_j A_k - d_k A_j for cyclic (i, j, k)
  auto curl_term = [&](int i, const Vec3& x, std::array<int, 3> extra, double t, int dt) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    std::array<int, 3> aj = extra, ak = extra;
    aj[j] += 1;
    ak[k] += 1;
    return pot.eval(k, x, aj, t, dt) - pot.eval(j, x, ak, t, dt);
  };
  for (int m = 0; m < g.n_time(); ++m) {
    const double t = g.time(m);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const Vec3 x = g.point(a, b, c);
          const std::size_t fl = g.flat(a, b, c);
          mc.pressure(0, m, fl) = pot.eval(3, x, {0, 0, 0}, t, 0);
          for (int i = 0; i < 3; ++i) {
            const double v = curl_term(i, x, {0, 0, 0}, t, 0);
            const double vt = curl_term(i, x, {0, 0, 0}, t, 1);
            const double lap = curl_term(i, x, {2, 0, 0}, t, 0) + curl_term(i, x, {0, 2, 0}, t, 0) +
                               curl_term(i, x, {0, 0, 2}, t, 0);
            const double d1 = curl_term(i, x, {1, 0, 0}, t, 0);
            std::array<int, 3> e{0, 0, 0};
            e[i] = 1;
            const double gp = pot.eval(3, x, e, t, 0);
            mc.velocity(i, m, fl) = v;
            mc.forcing(i, m, fl) = vt - mu * lap - kappa * d1 + gp;
          }
        }
  }
  return mc;
}

}  // namespace tpflow
