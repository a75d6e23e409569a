#pragma once

#include "tpflow/grid.hpp"

#include <nlohmann/json.hpp>

namespace tpflow {

/// I - xi xi^T / |xi|^2. At xi = 0 returns I and sets *gauge (when given).
Mat3 helmholtz_projector(const Vec3& xi, bool* gauge = nullptr);

struct ResolventParams {
  double mu = 1.0;
  double kappa = 0.0;
  cplx lambda{0.0, 0.0};
  double period = 2.0 * pi;
};

/// mu |xi|^2 - i kappa xi_1 + lambda
cplx oseen_denominator(const Vec3& xi, double mu, double kappa, cplx lambda);

/// (mu |xi|^2 - i kappa xi_1 + lambda)^{-1} P(xi).
/// Throws SingularModeError when the denominator vanishes (|D| < 1e-14).
Mat3c oseen_resolvent_symbol(const Vec3& xi, const ResolventParams& p);

/// Multiplier of the purely oscillatory time-periodic problem: zero for k = 0,
/// otherwise the resolvent symbol at lambda = i (2 pi / T) k.
Mat3c tp_oseen_symbol(int k, const Vec3& xi, const SpaceTimeGrid& g);

/// lambda in rho[kappa]: kappa = 0 -> lambda not in (-inf, 0];
/// kappa != 0 -> |kappa| Re(lambda) + Im(lambda)^2 > 0.
bool in_resolvent_set(cplx lambda, double kappa);

struct SectorSpec {
  double epsilon = pi / 4;
  double delta = 1.0;
  void validate() const;
  /// |lambda| > delta and |arg lambda| < pi - epsilon.
  bool contains(cplx lambda) const;
};

struct SectorBoundsConfig {
  SectorSpec sector;
  double mu = 1.0;
  double kappa_max = 0.0;
  int n_kappa = 1;          // kappa samples in [-kappa_max, kappa_max]
  int samples = 100;        // per axis: |lambda|, arg lambda, |xi|
  int n_directions = 5;     // xi directions (angle to e1)
  double radius_factor = 1e4;  // |lambda| in (delta, delta * radius_factor]
  double xi_min = 1e-3;
  double xi_max = 1e3;
  void validate() const;
};

struct ResolventProxies {
  double s0 = 0.0;
  double s2 = 0.0;
  double deriv[3] = {0.0, 0.0, 0.0};
};

/// Proxies at one sample point (|xi|, xi_1).
ResolventProxies resolvent_proxies(cplx lambda, double xi_norm, double xi1, double kappa, double mu);

/// Smallest radius beyond which the sector avoids near-zeros of the Oseen
/// denominator: the modulus of the point where the parabola
/// Re(lambda) = -mu Im(lambda)^2 / kappa^2 meets the ray arg = pi - epsilon.
double min_safe_delta(const SectorSpec& sector, double kappa_max, double mu);

struct SectorSample {
  cplx lambda;
  double xi_norm = 0.0;
  double xi1 = 0.0;
  double kappa = 0.0;
};

struct SectorBoundsReport {
  SectorBoundsConfig config;
  double sup_s0 = 0.0;
  double sup_s2 = 0.0;
  double sup_deriv[3] = {0.0, 0.0, 0.0};
  long long n_samples = 0;
  long long skipped = 0;
  double safe_delta = 0.0;
  SectorSample argmax_s0, argmax_s2;
  nlohmann::ordered_json to_json() const;
};

/// Scalar proxies of the resolvent estimate over a sampled sector:
/// s0 = |lambda|/|D|, s2 = mu|xi|^2/|D| and, for j = 0, 1, 2,
/// |lambda d/dlambda (lambda^{j/2}/D)| (mu^{1/2}|xi|)^{2-j}.
SectorBoundsReport sector_sup_bounds(const SectorBoundsConfig& cfg);

}  // namespace tpflow
