#include "tpflow/fundamental.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fft_plan.hpp"
#include "tpflow/interp.hpp"
#include "tpflow/parallel.hpp"
#include "tpflow/symbols.hpp"

#include <algorithm>
#include <cmath>

namespace tpflow {

namespace {

// Symmetric 3x3 index pairs (a <= b) and their multiplicity in a Frobenius sum.
constexpr int kPairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
constexpr double kPairWeight[6] = {1, 2, 2, 1, 2, 1};

struct ModeGeometry {
  const SpaceTimeGrid& g;
  int n;
  std::size_t ls;
  explicit ModeGeometry(const SpaceTimeGrid& grid)
      : g(grid), n(grid.n_space), ls(grid.n_points()) {}
  void unpack(std::size_t idx, int& a, int& b, int& c) const {
    a = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    b = static_cast<int>((idx / n) % n);
    c = static_cast<int>(idx % n);
  }
  Vec3 xi(int a, int b, int c) const {
    return {g.wavenumber(g.space_mode(a)), g.wavenumber(g.space_mode(b)), g.wavenumber(g.space_mode(c))};
  }
  bool nyquist(int a, int b, int c) const { return g.is_nyquist(a) || g.is_nyquist(b) || g.is_nyquist(c); }
};

double spectral_filter(double xi_norm, const SpaceTimeGrid& g, const KernelOptions& opt) {
  const double xi_max = g.wavenumber(g.n_space / 2);
  return std::exp(-std::pow(xi_norm / (opt.filter_fraction * xi_max), opt.filter_order));
}

void validate_options(const KernelOptions& opt) {
  if (opt.time_samples < 64) throw ValidationError("kernel time_samples must be >= 64");
  if (opt.exponents.empty()) throw ValidationError("kernel needs at least one norm exponent");
  for (double r : opt.exponents)
    if (!(r >= 1.0) || !std::isfinite(r)) throw ValidationError("kernel norm exponents must be finite and >= 1");
  if (!(opt.filter_fraction > 0.0) || opt.filter_order < 2) throw ValidationError("bad kernel filter parameters");
}

// Inverse spatial transform of one spectral block in place: Delta xi^3 (-1)^j, backward FFT.
void block_inverse(std::vector<cplx>& work, const SpaceTimeGrid& g) {
  const int n = g.n_space;
  execute_fft({n, n, n}, work.data(), FftDirection::backward);
}

// Fill `work` with scale(xi) * P_ab(xi) * (i xi_l if l >= 0), including the origin phase.
void fill_component(std::vector<cplx>& work, const std::vector<cplx>& base, const ModeGeometry& geo,
                    int pa, int pb, int l, const Mat3& p_origin) {
  const double dxi3 = std::pow(geo.g.wavenumber_spacing(), 3);
  parallel_for(0, geo.ls, [&](std::size_t idx) {
    int a, b, c;
    geo.unpack(idx, a, b, c);
    const cplx s = base[idx];
    if (s == 0.0) {
      work[idx] = 0.0;
      return;
    }
    const Vec3 xi = geo.xi(a, b, c);
    const double x2 = xi.squaredNorm();
    double pab = x2 == 0.0 ? p_origin(pa, pb) : (pa == pb ? 1.0 : 0.0) - xi(pa) * xi(pb) / x2;
    cplx v = s * pab * dxi3;
    if (l >= 0) v *= cplx(0.0, xi(l));
    if ((a + b + c) & 1) v = -v;
    work[idx] = v;
  });
}

}  // namespace

std::vector<KernelSample> eval_tp_kernel(const std::vector<Vec3>& points, const SpaceTimeGrid& g, int order,
                                         const KernelOptions& opt) {
  g.validate();
  validate_options(opt);
  if (order < 0 || order > 1) throw ValidationError("kernel derivative order must be 0 or 1");
  const ModeGeometry geo(g);
  const int nm = g.n_time_modes;
  const int ncomp = order == 0 ? 6 : 24;  // 6 symmetric entries, then 18 = 6 x 3 gradients
  // coeffs[pt][k-1][comp]
  std::vector<cplx> coeffs(points.size() * nm * ncomp);
  std::vector<cplx> base(geo.ls), work(geo.ls);
  const Mat3 p_origin = (2.0 / 3.0) * Mat3::Identity();  // angular mean of P

  for (int k = 1; k <= nm; ++k) {
    const cplx lambda(0.0, g.omega() * k);
    parallel_for(0, geo.ls, [&](std::size_t idx) {
      int a, b, c;
      geo.unpack(idx, a, b, c);
      if (geo.nyquist(a, b, c)) {
        base[idx] = 0.0;
        return;
      }
      const Vec3 xi = geo.xi(a, b, c);
      base[idx] = spectral_filter(xi.norm(), g, opt) / oseen_denominator(xi, g.viscosity, g.kappa, lambda);
    });
    for (int comp = 0; comp < ncomp; ++comp) {
      const int pair = comp < 6 ? comp : (comp - 6) / 3;
      const int l = comp < 6 ? -1 : (comp - 6) % 3;
      fill_component(work, base, geo, kPairs[pair][0], kPairs[pair][1], l, p_origin);
      block_inverse(work, g);
      for (std::size_t p = 0; p < points.size(); ++p)
        coeffs[(p * nm + (k - 1)) * ncomp + comp] = interpolate_tricubic(work.data(), g, points[p]);
    }
  }

  const int ns = opt.time_samples;
  const std::size_t ne = opt.exponents.size();
  std::vector<KernelSample> out(points.size());
  parallel_for(0, points.size(), [&](std::size_t p) {
    KernelSample& ks = out[p];
    ks.x = points[p];
    ks.r = points[p].norm();
    ks.near_boundary = points[p].cwiseAbs().maxCoeff() > opt.safety_fraction * g.box_half_length ||
                       ks.r > opt.safety_fraction * g.box_half_length;
    ks.norms.assign(order + 1, std::vector<double>(ne, 0.0));
    std::vector<double> mean(ncomp, 0.0), val(ncomp);
    for (int s = 0; s < ns; ++s) {
      const double t = g.period * s / ns;
      for (int comp = 0; comp < ncomp; ++comp) {
        double acc = 0.0;
        for (int k = 1; k <= nm; ++k)
          acc += 2.0 * (coeffs[(p * nm + (k - 1)) * ncomp + comp] * std::polar(1.0, g.omega() * k * t)).real();
        val[comp] = acc;
        mean[comp] += acc / ns;
      }
      for (int m = 0; m <= order; ++m) {
        double fro = 0.0;
        if (m == 0) {
          for (int q = 0; q < 6; ++q) fro += kPairWeight[q] * val[q] * val[q];
        } else {
          for (int q = 6; q < 24; ++q) fro += kPairWeight[(q - 6) / 3] * val[q] * val[q];
        }
        fro = std::sqrt(fro);
        for (std::size_t e = 0; e < ne; ++e) ks.norms[m][e] += std::pow(fro, opt.exponents[e]) / ns;
      }
    }
    for (int m = 0; m <= order; ++m)
      for (std::size_t e = 0; e < ne; ++e) ks.norms[m][e] = std::pow(ks.norms[m][e], 1.0 / opt.exponents[e]);
    for (double v : mean) ks.time_mean_max = std::max(ks.time_mean_max, std::abs(v));
  });
  return out;
}

DecayReport fit_kernel_decay(const std::vector<KernelSample>& samples, int order, int exponent_index) {
  std::vector<double> r, v;
  for (const KernelSample& s : samples) {
    if (s.near_boundary) continue;
    if (order >= static_cast<int>(s.norms.size()) || exponent_index >= static_cast<int>(s.norms[order].size()))
      throw ValidationError("kernel samples lack the requested derivative order or exponent");
    r.push_back(s.r);
    v.push_back(s.norms[order][exponent_index]);
  }
  return fit_power_law(r, v);
}

namespace {

// F'(s) and F''(s) of the Oseen potential, without the 1/(4 pi |kappa|) factor.
void oseen_potential_derivatives(double s, double& f1, double& f2) {
  if (s < 0.05) {
    // (1 - e^{-s})/s = sum (-1)^n s^n/(n+1)!
    double term = 1.0, d1 = 0.0, d2 = 0.0, fact = 1.0;
    for (int n = 0; n < 14; ++n) {
      fact *= (n + 1);
      const double sign = (n % 2) ? -1.0 : 1.0;
      d1 += sign * term / fact;
      if (n >= 1) d2 += sign * n * std::pow(s, n - 1) / fact;
      term *= s;
    }
    f1 = d1;
    f2 = d2;
    return;
  }
  const double om = -std::expm1(-s);  // 1 - e^{-s}
  f1 = om / s;
  f2 = (s * std::exp(-s) - om) / (s * s);
}

}  // namespace

Mat3 steady_oseen_kernel(const Vec3& x, double mu, double kappa) {
  const double r = x.norm();
  if (r == 0.0) throw NumericalError("steady Oseen kernel is singular at x = 0");
  if (kappa == 0.0) throw ValidationError("steady_oseen_kernel needs kappa != 0 (use stokeslet)");
  if (!(mu > 0.0)) throw ValidationError("mu must be > 0");
  const double ak = std::abs(kappa);
  const double sg = kappa > 0 ? 1.0 : -1.0;
  const double c = ak / (2.0 * mu);
  const double s = c * (r + sg * x(0));
  Vec3 ds = c * x / r;
  ds(0) += c * sg;
  const Mat3 dds = c * (Mat3::Identity() / r - x * x.transpose() / (r * r * r));
  double f1, f2;
  oseen_potential_derivatives(s, f1, f2);
  const double scale = 1.0 / (4.0 * pi * ak);
  const double phi = std::exp(-s) / (4.0 * pi * mu * r);
  return phi * Mat3::Identity() - scale * (f2 * ds * ds.transpose() + f1 * dds);
}

Mat3 stokeslet(const Vec3& x, double mu) {
  const double r = x.norm();
  if (r == 0.0) throw NumericalError("Stokeslet is singular at x = 0");
  return (Mat3::Identity() / r + x * x.transpose() / (r * r * r)) / (8.0 * pi * mu);
}

namespace {

using VecXc = Eigen::VectorXcd;

// Adaptive Gauss-Kronrod (7/15) for vector-valued integrands.
template <typename F>
VecXc gk15(const F& f, double a, double b, VecXc& err_out) {
  static constexpr double xk[8] = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                   0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                   0.207784955007898468, 0.0};
  static constexpr double wk[8] = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                   0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                   0.204432940075298892, 0.209482141084727828};
  static constexpr double wg[4] = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                   0.417959183673469388};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  VecXc fc = f(c);
  VecXc kron = wk[7] * fc, gauss = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    VecXc s = f(c - h * xk[i]) + f(c + h * xk[i]);
    kron += wk[i] * s;
    if (i % 2 == 1) gauss += wg[i / 2] * s;
  }
  err_out = (kron - gauss) * h;
  return kron * h;
}

template <typename F>
VecXc adaptive(const F& f, double a, double b, double atol, int depth) {
  VecXc err;
  VecXc val = gk15(f, a, b, err);
  if (depth <= 0 || err.cwiseAbs().maxCoeff() <= atol) return val;
  const double m = 0.5 * (a + b);
  return adaptive(f, a, m, 0.5 * atol, depth - 1) + adaptive(f, m, b, 0.5 * atol, depth - 1);
}

}  // namespace

std::vector<Mat3> box_steady_kernel(const std::vector<Vec3>& points, const SpaceTimeGrid& g,
                                    const KernelOptions& opt) {
  g.validate();
  validate_options(opt);
  const ModeGeometry geo(g);
  const double mu = g.viscosity, kappa = g.kappa;
  const double dxi = g.wavenumber_spacing();
  const double norm = std::pow(2.0 * pi, -3);
  // The symbol is split as w m + (1 - w) m with w = exp(-|xi|^4 / width^4). The
  // remainder vanishes like |xi|^4 at the origin, so its kernel decays fast and the
  // periodic images are harmless; the low part carries the wake and is integrated
  // directly at the requested points.
  const double width = 8.0 * dxi;
  auto low_weight = [&](double x2) { return std::exp(-x2 * x2 / std::pow(width, 4)); };

  std::vector<cplx> base(geo.ls), work(geo.ls);
  parallel_for(0, geo.ls, [&](std::size_t idx) {
    int a, b, c;
    geo.unpack(idx, a, b, c);
    if (geo.nyquist(a, b, c) || idx == 0) {
      base[idx] = 0.0;
      return;
    }
    const Vec3 xi = geo.xi(a, b, c);
    const double x2 = xi.squaredNorm();
    base[idx] = norm * (spectral_filter(std::sqrt(x2), g, opt) - low_weight(x2)) /
                oseen_denominator(xi, mu, kappa, 0.0);
  });
  // Origin cell: midpoint sub-quadrature average of the (bounded) remainder symbol.
  const int sub = 24;
  Mat3c cell = Mat3c::Zero();
  for (int i = 0; i < sub; ++i)
    for (int j = 0; j < sub; ++j)
      for (int k = 0; k < sub; ++k) {
        const Vec3 xi = dxi * Vec3((i + 0.5) / sub - 0.5, (j + 0.5) / sub - 0.5, (k + 0.5) / sub - 0.5);
        const double x2 = xi.squaredNorm();
        cell += helmholtz_projector(xi).cast<cplx>() * ((1.0 - low_weight(x2)) / oseen_denominator(xi, mu, kappa, 0.0));
      }
  cell *= norm / (sub * sub * sub);
  std::vector<Mat3> out(points.size(), Mat3::Zero());
  for (int q = 0; q < 6; ++q) {
    const int pa = kPairs[q][0], pb = kPairs[q][1];
    fill_component(work, base, geo, pa, pb, -1, Mat3::Zero());
    work[0] = cell(pa, pb) * std::pow(dxi, 3);
    block_inverse(work, g);
    for (std::size_t p = 0; p < points.size(); ++p) {
      const double v = interpolate_tricubic(work.data(), g, points[p]).real();
      out[p](pa, pb) = v;
      out[p](pb, pa) = v;
    }
  }

  // Low part in cylindrical coordinates (xi_1, rho, phi): trapezoid in phi,
  // adaptive in xi_1 (split at the Lorentzian peak xi_1 = 0) and in rho.
  const std::size_t np = points.size();
  if (np == 0) return out;
  const int n_phi = 96;
  const double extent = 2.6 * width;
  const double atol = 1e-9 / (width * width);
  auto at = [&](double xi1, double rho) {
    VecXc acc = VecXc::Zero(static_cast<Eigen::Index>(6 * np));
    for (int t = 0; t < n_phi; ++t) {
      const double phi = 2.0 * pi * t / n_phi;
      const Vec3 xi(xi1, rho * std::cos(phi), rho * std::sin(phi));
      const double x2 = xi.squaredNorm();
      if (x2 == 0.0) continue;
      const cplx sym = low_weight(x2) / oseen_denominator(xi, mu, kappa, 0.0);
      const Mat3 proj = helmholtz_projector(xi);
      for (std::size_t p = 0; p < np; ++p) {
        const cplx e = sym * std::polar(1.0, xi.dot(points[p]));
        for (int q = 0; q < 6; ++q) acc(static_cast<Eigen::Index>(6 * p + q)) += proj(kPairs[q][0], kPairs[q][1]) * e;
      }
    }
    return VecXc(acc * (rho * 2.0 * pi / n_phi));
  };
  auto over_rho = [&](double rho) {
    auto inner = [&](double xi1) { return at(xi1, rho); };
    return VecXc(adaptive(inner, -extent, 0.0, atol, 40) + adaptive(inner, 0.0, extent, atol, 40));
  };
  const VecXc low = adaptive(over_rho, 0.0, extent, atol * extent, 40) * norm;
  for (std::size_t p = 0; p < np; ++p)
    for (int q = 0; q < 6; ++q) {
      const double v = low(static_cast<Eigen::Index>(6 * p + q)).real();
      out[p](kPairs[q][0], kPairs[q][1]) += v;
      if (kPairs[q][0] != kPairs[q][1]) out[p](kPairs[q][1], kPairs[q][0]) += v;
    }
  return out;
}

double kernel_lq_norm(const SpaceTimeGrid& g, double q, const KernelOptions& opt) {
  g.validate();
  validate_options(opt);
  if (!(q >= 1.0)) throw ValidationError("kernel_lq_norm needs q >= 1");
  const ModeGeometry geo(g);
  const int nm = g.n_time_modes;
  std::vector<std::vector<cplx>> blocks(static_cast<std::size_t>(nm) * 6, std::vector<cplx>(geo.ls));
  std::vector<cplx> base(geo.ls);
  const Mat3 p_origin = (2.0 / 3.0) * Mat3::Identity();
  for (int k = 1; k <= nm; ++k) {
    const cplx lambda(0.0, g.omega() * k);
    parallel_for(0, geo.ls, [&](std::size_t idx) {
      int a, b, c;
      geo.unpack(idx, a, b, c);
      if (geo.nyquist(a, b, c)) {
        base[idx] = 0.0;
        return;
      }
      const Vec3 xi = geo.xi(a, b, c);
      base[idx] = spectral_filter(xi.norm(), g, opt) / oseen_denominator(xi, g.viscosity, g.kappa, lambda);
    });
    for (int pq = 0; pq < 6; ++pq) {
      auto& w = blocks[(k - 1) * 6 + pq];
      fill_component(w, base, geo, kPairs[pq][0], kPairs[pq][1], -1, p_origin);
      block_inverse(w, g);
    }
  }
  const int ns = opt.time_samples;
  std::vector<double> acc(geo.ls, 0.0);
  for (int s = 0; s < ns; ++s) {
    const double t = g.period * s / ns;
    std::vector<cplx> ph(nm);
    for (int k = 1; k <= nm; ++k) ph[k - 1] = std::polar(2.0, g.omega() * k * t);
    parallel_for(0, geo.ls, [&](std::size_t idx) {
      double fro = 0.0;
      for (int pq = 0; pq < 6; ++pq) {
        double v = 0.0;
        for (int k = 1; k <= nm; ++k) v += (blocks[(k - 1) * 6 + pq][idx] * ph[k - 1]).real();
        fro += kPairWeight[pq] * v * v;
      }
      acc[idx] += std::pow(fro, 0.5 * q) / ns;
    });
  }
  double total = 0.0;
  for (double v : acc) total += v;
  return std::pow(total * std::pow(g.spacing(), 3), 1.0 / q);
}

double phi_function(double s) {
  if (!(s > 0.0)) throw ValidationError("Phi is defined for s > 0");
  // u = s^-4, q = sqrt(1+u), w = (q-1)/2, Phi = s (sqrt(1+w) - 1)
  const double u = std::pow(s, -4.0);
  double w;
  if (std::isinf(u)) return 1.0 / std::sqrt(2.0);
  if (u > 1e8) {
    // sqrt((1+q)/2) - 1 with q ~ s^-2: avoid overflow in u
    const double q = 1.0 / (s * s) * std::sqrt(1.0 + s * s * s * s);
    return s * (std::sqrt((1.0 + q) / 2.0) - 1.0);
  }
  w = u / (2.0 * (1.0 + std::sqrt(1.0 + u)));
  return s * w / (1.0 + std::sqrt(1.0 + w));
}

cplx sqrt_upper(cplx z) {
  cplx r = std::sqrt(z);
  if (r.imag() < 0.0 || (r.imag() == 0.0 && r.real() < 0.0)) r = -r;
  return r;
}

cplx mu_kappa_k(double kappa, int k, double period) {
  return cplx(0.25 * kappa * kappa, 2.0 * pi * k / period);
}

double phi_minimum(double s_max, int samples) {
  if (!(s_max > 0.0)) throw ValidationError("phi_minimum needs s_max > 0");
  double best = phi_function(s_max);
  for (int i = 1; i <= samples; ++i) best = std::min(best, phi_function(s_max * i / samples));
  return best;
}

nlohmann::ordered_json MuPhiReport::to_json() const {
  return {{"c_theta", c_theta},
          {"c_tilde", c_tilde},
          {"s_max", s_max},
          {"margin_imag", margin_imag},
          {"margin_lower", margin_lower},
          {"margin_upper", margin_upper},
          {"identity_error", identity_error},
          {"n_samples", n_samples},
          {"passed", passed},
          {"witness", {{"kappa", witness_kappa}, {"k", witness_k}}}};
}

MuPhiReport check_mu_phi(const MuPhiConfig& cfg) {
  if (!(cfg.theta > 0.0) || !(cfg.period > 0.0)) throw ValidationError("theta and period must be > 0");
  if (cfg.kappas.empty()) throw ValidationError("mu/Phi check needs at least one kappa");
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) throw ValidationError("need 1 <= k_min <= k_max");
  for (double kappa : cfg.kappas)
    if (cfg.period * kappa * kappa > cfg.theta)
      throw ValidationError("kappa = " + std::to_string(kappa) + " violates T kappa^2 <= theta");
  MuPhiReport rep;
  rep.s_max = std::sqrt(cfg.theta) / (2.0 * std::sqrt(2.0 * pi));
  rep.c_theta = phi_minimum(rep.s_max);
  rep.c_tilde = std::sqrt(1.0 + std::pow(cfg.theta / (8.0 * pi), 2));
  rep.margin_imag = rep.margin_lower = rep.margin_upper = std::numeric_limits<double>::infinity();
  for (double kappa : cfg.kappas)
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
      const double b = 2.0 * pi * k / cfg.period;
      const cplx mu = mu_kappa_k(kappa, k, cfg.period);
      const double lhs = sqrt_upper(-mu).imag() - 0.5 * std::abs(kappa);
      const double mi = lhs - rep.c_theta * std::sqrt(b);
      const double ml = std::abs(mu) - b;
      const double mu_up = rep.c_tilde * b - std::abs(mu);
      if (std::min({mi / std::sqrt(b), ml / b, mu_up / b}) <
          std::min({rep.margin_imag, rep.margin_lower, rep.margin_upper})) {
        rep.witness_kappa = kappa;
        rep.witness_k = k;
      }
      rep.margin_imag = std::min(rep.margin_imag, mi / std::sqrt(b));
      rep.margin_lower = std::min(rep.margin_lower, ml / b);
      rep.margin_upper = std::min(rep.margin_upper, mu_up / b);
      if (kappa != 0.0) {
        const double s = 0.5 * std::abs(kappa) / std::sqrt(b);
        const double ident = std::sqrt(b) * phi_function(s);
        rep.identity_error = std::max(rep.identity_error, std::abs(lhs - ident) / std::max(std::abs(lhs), 1e-300));
      }
      ++rep.n_samples;
    }
  rep.passed = rep.margin_imag > 0.0 && rep.margin_lower > 0.0 && rep.margin_upper > 0.0;
  return rep;
}

}  // namespace tpflow
