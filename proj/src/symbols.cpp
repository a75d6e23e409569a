#include "tpflow/symbols.hpp"

#include "tpflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tpflow {

Mat3 helmholtz_projector(const Vec3& xi, bool* gauge) {
  const double n2 = xi.squaredNorm();
  if (gauge != nullptr) *gauge = n2 == 0.0;
  if (n2 == 0.0) return Mat3::Identity();
  return Mat3::Identity() - xi * xi.transpose() / n2;
}

cplx oseen_denominator(const Vec3& xi, double mu, double kappa, cplx lambda) {
  return mu * xi.squaredNorm() - cplx(0.0, kappa * xi(0)) + lambda;
}

Mat3c oseen_resolvent_symbol(const Vec3& xi, const ResolventParams& p) {
  const cplx d = oseen_denominator(xi, p.mu, p.kappa, p.lambda);
  if (std::abs(d) < 1e-14) {
    std::ostringstream msg;
    msg << "singular Oseen symbol at xi = (" << xi(0) << ", " << xi(1) << ", " << xi(2)
        << "), lambda = " << p.lambda;
    throw SingularModeError(msg.str());
  }
  return helmholtz_projector(xi).cast<cplx>() / d;
}

Mat3c tp_oseen_symbol(int k, const Vec3& xi, const SpaceTimeGrid& g) {
  if (k == 0) return Mat3c::Zero();
  ResolventParams p{g.viscosity, g.kappa, cplx(0.0, g.omega() * k), g.period};
  return oseen_resolvent_symbol(xi, p);
}

bool in_resolvent_set(cplx lambda, double kappa) {
  if (kappa == 0.0) return !(lambda.imag() == 0.0 && lambda.real() <= 0.0);
  return std::abs(kappa) * lambda.real() + lambda.imag() * lambda.imag() > 0.0;
}

void SectorSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < pi / 2)) throw ValidationError("sector.epsilon must lie in (0, pi/2)");
  if (!(delta > 0.0)) throw ValidationError("sector.delta must be > 0");
}

bool SectorSpec::contains(cplx lambda) const {
  return std::abs(lambda) > delta && std::abs(std::arg(lambda)) < pi - epsilon;
}

void SectorBoundsConfig::validate() const {
  sector.validate();
  if (!(mu > 0.0)) throw ValidationError("mu must be > 0");
  if (!(kappa_max >= 0.0) || !std::isfinite(kappa_max)) throw ValidationError("kappa_max must be >= 0");
  if (n_kappa < 1) throw ValidationError("n_kappa must be >= 1");
  if (samples < 100) throw ValidationError("samples must be >= 100 per axis");
  if (n_directions < 1) throw ValidationError("n_directions must be >= 1");
  if (!(radius_factor > 1.0)) throw ValidationError("radius_factor must be > 1");
  if (!(xi_min > 0.0 && xi_max > xi_min)) throw ValidationError("need 0 < xi_min < xi_max");
}

ResolventProxies resolvent_proxies(cplx lambda, double xi_norm, double xi1, double kappa, double mu) {
  const cplx d = mu * xi_norm * xi_norm - cplx(0.0, kappa * xi1) + lambda;
  const double ad = std::abs(d);
  const double r = std::abs(lambda);
  ResolventProxies p;
  p.s0 = r / ad;
  p.s2 = mu * xi_norm * xi_norm / ad;
  // lambda d/dlambda (lambda^{j/2} / D) = lambda^{j/2} (j/2 / D - lambda / D^2)
  const cplx inv = 1.0 / d;
  const double sr = std::sqrt(r);
  const double sx = std::sqrt(mu) * xi_norm;
  p.deriv[0] = sx * sx * std::abs(lambda * inv * inv);
  p.deriv[1] = sr * sx * std::abs(0.5 * inv - lambda * inv * inv);
  p.deriv[2] = r * std::abs(inv - lambda * inv * inv);
  return p;
}

double min_safe_delta(const SectorSpec& sector, double kappa_max, double mu) {
  if (kappa_max == 0.0) return 0.0;
  // lambda = -a + i b with a = mu b^2 / kappa^2 and b / a = tan(epsilon).
  const double b = kappa_max * kappa_max / (mu * std::tan(sector.epsilon));
  const double a = mu * b * b / (kappa_max * kappa_max);
  return std::hypot(a, b);
}

namespace {

nlohmann::ordered_json sample_json(const SectorSample& s) {
  return {{"lambda", {s.lambda.real(), s.lambda.imag()}},
          {"xi_norm", s.xi_norm},
          {"xi1", s.xi1},
          {"kappa", s.kappa}};
}

// Coordinate-wise golden-section ascent from the grid argmax over
// (log|lambda|, arg lambda, log|xi|), one grid step each way, staying inside
// the closed sector. xi_1 keeps the argmax's ratio xi_1/|xi| unless it sat on
// the |Im D| minimizer, in which case that rule is reapplied.
void refine_argmax(const SectorBoundsConfig& cfg, SectorBoundsReport& rep, bool for_s0) {
  SectorSample& best = for_s0 ? rep.argmax_s0 : rep.argmax_s2;
  double& sup = for_s0 ? rep.sup_s0 : rep.sup_s2;
  if (best.xi_norm == 0.0 || std::abs(best.lambda) == 0.0) return;
  const double kappa = best.kappa;
  const bool on_minimizer =
      kappa != 0.0 && best.xi1 == std::clamp(best.lambda.imag() / kappa, -best.xi_norm, best.xi_norm);
  const double ratio = best.xi1 / best.xi_norm;
  const int n = cfg.samples;
  const double theta_max = pi - cfg.sector.epsilon;
  const double step[3] = {std::log(cfg.radius_factor) / (n - 1), 2.0 * theta_max / (n - 1),
                          std::log(cfg.xi_max / cfg.xi_min) / (n - 1)};
  const double lo[3] = {std::log(cfg.sector.delta), -theta_max, -std::numeric_limits<double>::infinity()};
  const double hi[3] = {std::log(cfg.sector.delta * cfg.radius_factor), theta_max,
                        std::numeric_limits<double>::infinity()};
  double x[3] = {std::log(std::abs(best.lambda)), std::arg(best.lambda), std::log(best.xi_norm)};
  auto sample_at = [&](const double* y) {
    SectorSample sm;
    sm.lambda = std::polar(std::exp(y[0]), y[1]);
    sm.xi_norm = std::exp(y[2]);
    sm.xi1 = on_minimizer ? std::clamp(sm.lambda.imag() / kappa, -sm.xi_norm, sm.xi_norm)
                          : ratio * sm.xi_norm;
    sm.kappa = kappa;
    return sm;
  };
  auto value = [&](const double* y) {
    const SectorSample sm = sample_at(y);
    if (!in_resolvent_set(sm.lambda, kappa)) return 0.0;
    const ResolventProxies p = resolvent_proxies(sm.lambda, sm.xi_norm, sm.xi1, kappa, cfg.mu);
    return for_s0 ? p.s0 : p.s2;
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int round = 0; round < 4; ++round)
    for (int a = 0; a < 3; ++a) {
      double l = std::max(lo[a], x[a] - step[a]), h = std::min(hi[a], x[a] + step[a]);
      double y[3] = {x[0], x[1], x[2]};
      for (int it = 0; it < 40; ++it) {
        const double m1 = h - g * (h - l), m2 = l + g * (h - l);
        y[a] = m1;
        const double f1 = value(y);
        y[a] = m2;
        const double f2 = value(y);
        if (f1 < f2) l = m1; else h = m2;
      }
      y[a] = 0.5 * (l + h);
      if (value(y) > value(x)) x[a] = y[a];
    }
  const double v = value(x);
  if (v > sup) {
    sup = v;
    best = sample_at(x);
  }
}

}  // namespace

nlohmann::ordered_json SectorBoundsReport::to_json() const {
  nlohmann::ordered_json j;
  j["sector"] = {{"epsilon", config.sector.epsilon}, {"delta", config.sector.delta}};
  j["kappa_range"] = {-config.kappa_max, config.kappa_max};
  j["sup_s0"] = sup_s0;
  j["sup_s2"] = sup_s2;
  j["sup_deriv"] = {sup_deriv[0], sup_deriv[1], sup_deriv[2]};
  j["n_samples"] = n_samples;
  j["skipped"] = skipped;
  j["safe_delta"] = safe_delta;
  j["argmax"] = {{"s0", sample_json(argmax_s0)}, {"s2", sample_json(argmax_s2)}};
  return j;
}

SectorBoundsReport sector_sup_bounds(const SectorBoundsConfig& cfg) {
  cfg.validate();
  SectorBoundsReport rep;
  rep.config = cfg;
  const int n = cfg.samples;
  const double mu = cfg.mu;
  const double theta_max = pi - cfg.sector.epsilon;

  std::vector<double> radii(n), angles(n), xis(n + 1), cosines(cfg.n_directions), kappas(cfg.n_kappa);
  // The closed sector is sampled: the sup of these continuous proxies is the
  // same, and it is typically attained at the corner |lambda| = delta.
  for (int i = 0; i < n; ++i)
    radii[i] = cfg.sector.delta * std::pow(cfg.radius_factor, static_cast<double>(i) / (n - 1));
  for (int i = 0; i < n; ++i) angles[i] = -theta_max + (2.0 * theta_max) * i / (n - 1);
  xis[0] = 0.0;
  for (int i = 0; i < n; ++i)
    xis[i + 1] = cfg.xi_min * std::pow(cfg.xi_max / cfg.xi_min, static_cast<double>(i) / (n - 1));
  for (int i = 0; i < cfg.n_directions; ++i)
    cosines[i] = cfg.n_directions == 1 ? 1.0 : std::cos(pi * i / (cfg.n_directions - 1));
  for (int i = 0; i < cfg.n_kappa; ++i)
    kappas[i] = cfg.n_kappa == 1 ? cfg.kappa_max
                                 : -cfg.kappa_max + 2.0 * cfg.kappa_max * i / (cfg.n_kappa - 1);

  rep.safe_delta = min_safe_delta(cfg.sector, cfg.kappa_max, mu);
  for (double kappa : kappas)
    for (double r : radii)
      for (double th : angles) {
        const cplx lambda = std::polar(r, th);
        if (!in_resolvent_set(lambda, kappa)) {
          rep.skipped += static_cast<long long>(xis.size()) * cfg.n_directions;
          continue;
        }
        for (double xn : xis)
          for (int dir = 0; dir <= cfg.n_directions; ++dir) {
            // The extra direction is the xi_1 minimizing |Im D|, where s0 and s2 peak.
            double xi1;
            if (dir < cfg.n_directions) {
              xi1 = xn * cosines[dir];
            } else if (kappa != 0.0) {
              xi1 = std::clamp(lambda.imag() / kappa, -xn, xn);
            } else {
              break;
            }
            const cplx d = mu * xn * xn - cplx(0.0, kappa * xi1) + lambda;
            if (std::abs(d) < 1e-14 * (1.0 + r)) {
              ++rep.skipped;
              continue;
            }
            ++rep.n_samples;
            const ResolventProxies pr = resolvent_proxies(lambda, xn, xi1, kappa, mu);
            const SectorSample here{lambda, xn, xi1, kappa};
            if (pr.s0 > rep.sup_s0) {
              rep.sup_s0 = pr.s0;
              rep.argmax_s0 = here;
            }
            if (pr.s2 > rep.sup_s2) {
              rep.sup_s2 = pr.s2;
              rep.argmax_s2 = here;
            }
            for (int j = 0; j < 3; ++j) rep.sup_deriv[j] = std::max(rep.sup_deriv[j], pr.deriv[j]);
          }
      }
  refine_argmax(cfg, rep, true);
  refine_argmax(cfg, rep, false);
  return rep;
}

}  // namespace tpflow
