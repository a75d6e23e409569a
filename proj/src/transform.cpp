#include "tpflow/transform.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/norms.hpp"
#include "tpflow/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace tpflow {

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be a 3-element array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

double number(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

// 1 - P(s) with P(s) = 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7 and its derivative.
double step_profile(double s) { return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s))); }
double step_profile_derivative(double s) { return s * s * s * (140.0 + s * (-420.0 + s * (420.0 - 140.0 * s))); }

nlohmann::ordered_json vec_json(const Vec3& v) { return nlohmann::ordered_json::array({v(0), v(1), v(2)}); }

}  // namespace

OscillationKind parse_oscillation_kind(const std::string& s) {
  if (s == "radial_bump") return OscillationKind::radial_bump;
  if (s == "lateral_sway") return OscillationKind::lateral_sway;
  if (s == "custom_harmonic") return OscillationKind::custom_harmonic;
  throw ValidationError("unknown oscillation kind '" + s + "'");
}

std::string to_string(OscillationKind k) {
  switch (k) {
    case OscillationKind::radial_bump: return "radial_bump";
    case OscillationKind::lateral_sway: return "lateral_sway";
    case OscillationKind::custom_harmonic: return "custom_harmonic";
  }
  return "?";
}

OscillationSpec OscillationSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("oscillation spec must be an object");
  reject_unknown(j, {"kind", "amplitude", "b", "period", "cutoff", "harmonics", "vB_samples"}, "oscillation spec");
  OscillationSpec s;
  try {
    if (j.contains("kind")) s.kind = parse_oscillation_kind(j.at("kind").get<std::string>());
    if (j.contains("amplitude")) s.amplitude = number(j, "amplitude");
    if (j.contains("b")) s.b = number(j, "b");
    if (j.contains("period")) s.period = number(j, "period");
    if (j.contains("cutoff")) {
      const auto& c = j.at("cutoff");
      if (!c.is_object()) throw ValidationError("'cutoff' must be an object");
      reject_unknown(c, {"inner"}, "cutoff");
      if (c.contains("inner")) s.cutoff_inner = number(c, "inner");
    }
    if (j.contains("harmonics")) {
      for (const auto& h : j.at("harmonics")) {
        reject_unknown(h, {"k", "cos", "sin"}, "harmonic");
        Harmonic hm;
        hm.k = h.at("k").get<int>();
        if (h.contains("cos")) hm.cos_coeff = vec3_from_json(h.at("cos"), "harmonic cos");
        if (h.contains("sin")) hm.sin_coeff = vec3_from_json(h.at("sin"), "harmonic sin");
        s.harmonics.push_back(hm);
      }
    }
    if (j.contains("vB_samples")) {
      for (const auto& row : j.at("vB_samples")) {
        if (!row.is_array() || row.size() != 4) throw ValidationError("vB_samples rows must be [t, v1, v2, v3]");
        VelocitySample vs;
        vs.t = row[0].get<double>();
        vs.v = Vec3(row[1].get<double>(), row[2].get<double>(), row[3].get<double>());
        s.vb_samples.push_back(vs);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("oscillation spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::ordered_json OscillationSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["amplitude"] = amplitude;
  j["b"] = b;
  j["period"] = period;
  j["cutoff"] = {{"inner", cutoff_inner}};
  if (!harmonics.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& h : harmonics)
      arr.push_back({{"k", h.k}, {"cos", vec_json(h.cos_coeff)}, {"sin", vec_json(h.sin_coeff)}});
    j["harmonics"] = arr;
  }
  if (!vb_samples.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : vb_samples) arr.push_back({v.t, v.v(0), v.v(1), v.v(2)});
    j["vB_samples"] = arr;
  }
  return j;
}

void OscillationSpec::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ValidationError("amplitude must be finite and >= 0");
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("b must be > 0");
  if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("period must be > 0");
  if (!(cutoff_inner > 0.0 && cutoff_inner < 1.0)) throw ValidationError("cutoff inner fraction must lie in (0, 1)");
  if (kind == OscillationKind::custom_harmonic && harmonics.empty())
    throw ValidationError("custom_harmonic needs at least one harmonic");
  for (const auto& h : harmonics) {
    if (h.k < 1) throw ValidationError("harmonic index k must be >= 1");
    if (!h.cos_coeff.allFinite() || !h.sin_coeff.allFinite()) throw ValidationError("harmonic coefficients must be finite");
  }
  if (!vb_samples.empty()) {
    if (vb_samples.size() < 2) throw ValidationError("vB_samples needs at least 2 rows");
    double vmax = 0.0;
    for (std::size_t i = 0; i < vb_samples.size(); ++i) {
      const auto& s = vb_samples[i];
      if (!std::isfinite(s.t) || !s.v.allFinite()) throw ValidationError("vB_samples must be finite");
      if (s.t < 0.0 || s.t >= period) throw ValidationError("vB_samples times must lie in [0, period)");
      if (i > 0 && !(s.t > vb_samples[i - 1].t)) throw ValidationError("vB_samples times must increase");
      vmax = std::max(vmax, s.v.norm());
    }
    const Vec3 mean = drift(period) / period + Vec3(absorbed_kappa(), 0, 0);
    if (std::abs(mean(1)) > 1e-9 * (1.0 + vmax) || std::abs(mean(2)) > 1e-9 * (1.0 + vmax))
      throw ValidationError("mean body velocity must point along e_1 (rotate the frame first)");
  }
  const double bound = jacobian_bound();
  if (!(bound < 0.5))
    throw ValidationError("oscillation too large for a safe inverse map: sup|D phi| ~ " + std::to_string(bound) +
                          " (needs < 0.5)");
}

Vec3 OscillationSpec::body_velocity(double t) const {
  const std::size_t n = vb_samples.size();
  double tau = std::fmod(t, period);
  if (tau < 0) tau += period;
  // Periodic piecewise-linear interpolation.
  std::size_t hi = 0;
  while (hi < n && vb_samples[hi].t <= tau) ++hi;
  const VelocitySample& a = hi == 0 ? vb_samples[n - 1] : vb_samples[hi - 1];
  const VelocitySample& c = hi == n ? vb_samples[0] : vb_samples[hi];
  double ta = a.t, tc = c.t;
  if (hi == 0) ta -= period;
  if (hi == n) tc += period;
  const double w = (tau - ta) / (tc - ta);
  return (1.0 - w) * a.v + w * c.v;
}

namespace {

// int_0^tau of the periodic piecewise-linear interpolant, tau in [0, period].
Vec3 integral_to(const std::vector<VelocitySample>& s, double tau, const std::function<Vec3(double)>& v) {
  std::vector<double> knots{0.0};
  for (const auto& x : s)
    if (x.t > 0.0 && x.t < tau) knots.push_back(x.t);
  knots.push_back(tau);
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 1; i < knots.size(); ++i) acc += 0.5 * (knots[i] - knots[i - 1]) * (v(knots[i - 1]) + v(knots[i]));
  return acc;
}

}  // namespace

double OscillationSpec::absorbed_kappa() const {
  if (vb_samples.empty()) return 0.0;
  auto v = [this](double t) { return body_velocity(t); };
  return integral_to(vb_samples, period, v)(0) / period;
}

Vec3 OscillationSpec::drift(double t) const {
  if (vb_samples.empty()) return Vec3::Zero();
  auto v = [this](double s) { return body_velocity(s); };
  const Vec3 full = integral_to(vb_samples, period, v);
  const double cycles = std::floor(t / period);
  const double tau = t - cycles * period;
  const Vec3 total = cycles * full + integral_to(vb_samples, tau, v);
  return total - t * Vec3(full(0) / period, 0.0, 0.0);
}

double OscillationSpec::cutoff(double r) const {
  const double r1 = support_radius(), r0 = body_radius();
  if (r <= r0) return 1.0;
  if (r >= r1) return 0.0;
  return 1.0 - step_profile((r - r0) / (r1 - r0));
}

double OscillationSpec::cutoff_derivative(double r) const {
  const double r1 = support_radius(), r0 = body_radius();
  if (r <= r0 || r >= r1) return 0.0;
  return -step_profile_derivative((r - r0) / (r1 - r0)) / (r1 - r0);
}

void OscillationSpec::profiles(double t, double& alpha, Vec3& beta, double& dalpha, Vec3& dbeta) const {
  const double w = 2.0 * pi / period;
  alpha = dalpha = 0.0;
  beta = dbeta = Vec3::Zero();
  switch (kind) {
    case OscillationKind::radial_bump:
      alpha = amplitude * std::sin(w * t) / b;
      dalpha = amplitude * w * std::cos(w * t) / b;
      break;
    case OscillationKind::lateral_sway:
      beta(1) = amplitude * std::sin(w * t);
      dbeta(1) = amplitude * w * std::cos(w * t);
      break;
    case OscillationKind::custom_harmonic:
      for (const auto& h : harmonics) {
        const double a = h.k * w * t;
        beta += amplitude * (h.cos_coeff * (std::cos(a) - 1.0) + h.sin_coeff * std::sin(a));
        dbeta += amplitude * h.k * w * (-h.cos_coeff * std::sin(a) + h.sin_coeff * std::cos(a));
      }
      break;
  }
  if (!vb_samples.empty()) {
    beta += drift(t);
    dbeta += body_velocity(t) - Vec3(absorbed_kappa(), 0.0, 0.0);
  }
}

Vec3 OscillationSpec::displacement(const Vec3& y, double t) const {
  const double r = y.norm();
  if (r >= support_radius()) return Vec3::Zero();
  double al, dal;
  Vec3 be, dbe;
  profiles(t, al, be, dal, dbe);
  return cutoff(r) * (al * y + be);
}

Vec3 OscillationSpec::velocity(const Vec3& y, double t) const {
  const double r = y.norm();
  if (r >= support_radius()) return Vec3::Zero();
  double al, dal;
  Vec3 be, dbe;
  profiles(t, al, be, dal, dbe);
  return cutoff(r) * (dal * y + dbe);
}

namespace {

Mat3 profile_jacobian(const OscillationSpec& s, const Vec3& y, double al, const Vec3& be) {
  const double r = y.norm();
  Mat3 d = s.cutoff(r) * al * Mat3::Identity();
  const double dc = s.cutoff_derivative(r);
  if (dc != 0.0) d += (dc / r) * (al * y + be) * y.transpose();
  return d;
}

}  // namespace

Mat3 OscillationSpec::jacobian(const Vec3& y, double t) const {
  if (y.norm() >= support_radius()) return Mat3::Zero();
  double al, dal;
  Vec3 be, dbe;
  profiles(t, al, be, dal, dbe);
  return profile_jacobian(*this, y, al, be);
}

Mat3 OscillationSpec::jacobian_rate(const Vec3& y, double t) const {
  if (y.norm() >= support_radius()) return Mat3::Zero();
  double al, dal;
  Vec3 be, dbe;
  profiles(t, al, be, dal, dbe);
  return profile_jacobian(*this, y, dal, dbe);
}

double OscillationSpec::jacobian_bound() const {
  double amax = 0.0, bmax = 0.0;
  const int nt = 512;
  for (int i = 0; i < nt; ++i) {
    double al, dal;
    Vec3 be, dbe;
    profiles(period * i / nt, al, be, dal, dbe);
    amax = std::max(amax, std::abs(al));
    bmax = std::max(bmax, be.norm());
  }
  double out = 0.0;
  const int nr = 400;
  for (int i = 0; i <= nr; ++i) {
    const double r = support_radius() * i / nr;
    out = std::max(out, std::abs(cutoff_derivative(r)) * (amax * r + bmax) + cutoff(r) * amax);
  }
  return out;
}

Vec3 forward_map(const Vec3& y, double t, const OscillationSpec& spec, double kappa) {
  return y + spec.displacement(y, t) + Vec3(t * kappa, 0.0, 0.0);
}

InverseResult inverse_map(const Vec3& x, double t, const OscillationSpec& spec, double kappa) {
  const Vec3 shift(t * kappa, 0.0, 0.0);
  const double tol = 1e-12 * (1.0 + x.norm());
  InverseResult res;
  Vec3 y = x - shift;
  int polish = -1;
  for (int it = 0; it < 50; ++it) {
    const Vec3 f = forward_map(y, t, spec, kappa) - x;
    res.iterations = it;
    if (f.norm() <= tol) {
      // Two extra steps bring the residual to round-off for finite differences.
      if (polish < 0) polish = 2;
      if (polish == 0 || f.norm() == 0.0) {
        res.y = y;
        res.psi = y - x + shift;
        return res;
      }
      --polish;
    }
    y -= (Mat3::Identity() + spec.jacobian(y, t)).partialPivLu().solve(f);
  }
  if (polish >= 0) {
    res.y = y;
    res.psi = y - x + shift;
    return res;
  }
  throw ConvergenceError("inverse map: Newton did not converge in 50 steps at x = (" + std::to_string(x(0)) + ", " +
                         std::to_string(x(1)) + ", " + std::to_string(x(2)) + "); amplitude too large?");
}

PointCoefficients coefficients_at(const Vec3& y, double t, const OscillationSpec& spec, double kappa,
                                  CoefficientMethod method, double h_fd) {
  PointCoefficients pc;
  if (y.norm() >= spec.support_radius()) return pc;
  const Mat3 ipd = Mat3::Identity() + spec.jacobian(y, t);
  const double jac = ipd.determinant();
  pc.J0 = jac - 1.0;
  const Vec3 e1(kappa, 0.0, 0.0);
  if (method == CoefficientMethod::analytic) {
    const Mat3 ia = ipd.inverse();
    pc.A = ia - Mat3::Identity();
    pc.a0 = -ia * spec.velocity(y, t) - pc.A * e1;
  } else {
    if (!(h_fd > 0.0)) throw ValidationError("finite-difference step must be > 0");
    const Vec3 x = forward_map(y, t, spec, kappa);
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = h_fd;
      pc.A.col(j) = (inverse_map(x + e, t, spec, kappa).psi - inverse_map(x - e, t, spec, kappa).psi) / (2.0 * h_fd);
    }
    pc.a0 = (inverse_map(x, t + h_fd, spec, kappa).psi - inverse_map(x, t - h_fd, spec, kappa).psi) / (2.0 * h_fd);
  }
  pc.weight = jac * (Mat3::Identity() + pc.A);
  const Eigen::JacobiSVD<Mat3> svd(pc.weight);
  const auto sv = svd.singularValues();
  pc.condition = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  if (!(pc.condition <= 1e6))
    throw NumericalError("transform weight matrix ill-conditioned (cond = " + std::to_string(pc.condition) +
                         "); smallness violated");
  pc.Bm1 = pc.weight.inverse() - Mat3::Identity();
  // d_t of (I + D phi)/J with d_t J = J tr((I + D phi)^{-1} d_t D phi).
  const Mat3 rate = spec.jacobian_rate(y, t);
  const double djac = jac * (ipd.inverse() * rate).trace();
  pc.dtBm1 = rate / jac - ipd * (djac / (jac * jac));
  return pc;
}

nlohmann::ordered_json SmallnessReport::to_json() const {
  nlohmann::ordered_json j;
  j["eps0"] = eps0;
  j["phi_norm"] = phi_norm;
  j["a_h2"] = a_h2;
  j["a_dt"] = a_dt;
  j["a0_sup"] = a0_sup;
  j["j0_h2"] = j0_h2;
  j["j0_dt"] = j0_dt;
  j["b_h2"] = b_h2;
  j["b_dt"] = b_dt;
  j["coefficient_total"] = coefficient_total();
  j["inverse_total"] = inverse_total();
  j["max_condition"] = max_condition;
  return j;
}

Mat3 TransformCoefficients::matrix(const RealField& f, int m, std::size_t flat) const {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = f(3 * i + j, m, flat);
  return out;
}

TransformCoefficients zero_coefficients(const SpaceTimeGrid& g) {
  TransformCoefficients c;
  c.grid = g;
  c.kappa = g.kappa;
  c.trivial = true;
  c.a0 = RealField::space_time(g, 3);
  c.A = RealField::space_time(g, 9);
  c.J0 = RealField::space_time(g, 1);
  c.Bm1 = RealField::space_time(g, 9);
  c.dtBm1 = RealField::space_time(g, 9);
  return c;
}

namespace {

// max over layers of sum_{|alpha| <= k} sup_y |d^alpha f| (Euclidean over components).
double sup_sobolev(const RealField& f, int k) {
  std::vector<double> per_layer(f.layers(), 0.0);
  const SpectralField spec = k > 0 ? forward_transform(f) : SpectralField();
  for (int a = 0; a <= k; ++a)
    for (int b = 0; a + b <= k; ++b)
      for (int c = 0; a + b + c <= k; ++c) {
        const RealField d = (a + b + c) == 0 ? f : inverse_transform(partial(spec, {a, b, c}));
        for (int m = 0; m < f.layers(); ++m) {
          double s = 0.0;
          for (std::size_t p = 0; p < f.layer_size(); ++p) {
            double v = 0.0;
            for (int q = 0; q < f.components(); ++q) v += d(q, m, p) * d(q, m, p);
            s = std::max(s, v);
          }
          per_layer[m] += std::sqrt(s);
        }
      }
  return *std::max_element(per_layer.begin(), per_layer.end());
}

double sup_abs(const RealField& f) { return sup_sobolev(f, 0); }

RealField time_derivative_real(const RealField& f) {
  return inverse_transform(time_derivative(forward_transform(f)));
}

}  // namespace

TransformCoefficients assemble_coefficients(const OscillationSpec& spec, double kappa, const SpaceTimeGrid& g,
                                            CoefficientMethod method) {
  g.validate();
  spec.validate();
  if (std::abs(spec.period - g.period) > 1e-12 * g.period)
    throw ValidationError("oscillation period must equal the grid period");
  if (spec.has_body_velocity() && std::abs(spec.absorbed_kappa() - kappa) > 1e-12 * (1.0 + std::abs(kappa)))
    throw ValidationError("kappa must equal the mean body velocity along e_1 (" +
                          std::to_string(spec.absorbed_kappa()) + ")");
  if (spec.support_radius() >= g.box_half_length)
    throw ValidationError("oscillation support 2b must lie inside the box");
  TransformCoefficients c = zero_coefficients(g);
  c.kappa = kappa;
  c.smallness.eps0 = spec.amplitude;
  if (spec.amplitude == 0.0 && !spec.has_body_velocity()) return c;
  c.trivial = false;
  const double h_fd = g.spacing() / 4.0;
  const int n = g.n_space;
  RealField phi = RealField::space_time(g, 3), dphi = RealField::space_time(g, 3);
  std::vector<double> cond(g.n_time() * g.n_points(), 1.0);
  for (int m = 0; m < g.n_time(); ++m) {
    const double t = g.time(m);
    parallel_for(0, g.n_points(), [&](std::size_t p) {
      const int i1 = static_cast<int>(p / (static_cast<std::size_t>(n) * n));
      const int i2 = static_cast<int>((p / n) % n);
      const int i3 = static_cast<int>(p % n);
      const Vec3 y = g.point(i1, i2, i3);
      const Vec3 d = spec.displacement(y, t), v = spec.velocity(y, t);
      for (int q = 0; q < 3; ++q) {
        phi(q, m, p) = d(q);
        dphi(q, m, p) = v(q);
      }
      if (y.norm() >= spec.support_radius()) return;
      const PointCoefficients pc = coefficients_at(y, t, spec, kappa, method, h_fd);
      cond[m * g.n_points() + p] = pc.condition;
      c.J0(0, m, p) = pc.J0;
      for (int i = 0; i < 3; ++i) {
        c.a0(i, m, p) = pc.a0(i);
        for (int j = 0; j < 3; ++j) {
          c.A(3 * i + j, m, p) = pc.A(i, j);
          c.Bm1(3 * i + j, m, p) = pc.Bm1(i, j);
          c.dtBm1(3 * i + j, m, p) = pc.dtBm1(i, j);
        }
      }
    });
  }
  SmallnessReport& s = c.smallness;
  s.eps0 = spec.amplitude;
  s.phi_norm = sup_sobolev(phi, 3) + sup_sobolev(dphi, 1);
  s.a_h2 = sup_sobolev(c.A, 2);
  s.a_dt = sup_abs(time_derivative_real(c.A));
  s.a0_sup = sup_abs(c.a0);
  s.j0_h2 = sup_sobolev(c.J0, 2);
  s.j0_dt = sup_abs(time_derivative_real(c.J0));
  s.b_h2 = sup_sobolev(c.Bm1, 2);
  s.b_dt = sup_abs(c.dtBm1);
  s.max_condition = *std::max_element(cond.begin(), cond.end());
  return c;
}

double inverse_identity_error(const TransformCoefficients& c) {
  const auto& g = c.grid;
  double err = 0.0;
  for (int m = 0; m < g.n_time(); ++m)
    for (std::size_t p = 0; p < g.n_points(); ++p) {
      const double jac = 1.0 + c.J0(0, m, p);
      const Mat3 w = jac * (Mat3::Identity() + c.matrix(c.A, m, p));
      const Mat3 prod = w * (Mat3::Identity() + c.matrix(c.Bm1, m, p)) - Mat3::Identity();
      err = std::max(err, prod.cwiseAbs().maxCoeff());
    }
  return err;
}

nlohmann::ordered_json ChainRuleReport::to_json() const {
  return {{"h", h}, {"space_error", space_error}, {"time_error", time_error}, {"n_points", n_points}};
}

namespace {

struct TestFunction {
  double w;
  double value(const Vec3& y, double t) const {
    return std::sin(0.7 * y(0) - 0.4 * y(1) + 0.9 * y(2) + w * t) + 0.5 * std::cos(1.1 * y(0) + 0.3 * y(2) - 2.0 * w * t);
  }
  Vec3 grad(const Vec3& y, double t) const {
    const double c = std::cos(0.7 * y(0) - 0.4 * y(1) + 0.9 * y(2) + w * t);
    const double s = -0.5 * std::sin(1.1 * y(0) + 0.3 * y(2) - 2.0 * w * t);
    return Vec3(0.7 * c + 1.1 * s, -0.4 * c, 0.9 * c + 0.3 * s);
  }
  double dt(const Vec3& y, double t) const {
    return w * std::cos(0.7 * y(0) - 0.4 * y(1) + 0.9 * y(2) + w * t) +
           w * std::sin(1.1 * y(0) + 0.3 * y(2) - 2.0 * w * t);
  }
};

}  // namespace

ChainRuleReport chain_rule_check(const OscillationSpec& spec, double kappa, double h, const std::vector<Vec3>& points,
                                 const std::vector<double>& times) {
  spec.validate();
  if (!(h > 0.0)) throw ValidationError("chain rule step must be > 0");
  const TestFunction g{2.0 * pi / spec.period};
  auto f = [&](const Vec3& x, double t) { return g.value(inverse_map(x, t, spec, kappa).y, t); };
  ChainRuleReport rep;
  rep.h = h;
  for (const Vec3& y : points)
    for (double t : times) {
      const PointCoefficients pc = coefficients_at(y, t, spec, kappa, CoefficientMethod::finite_difference, h / 4.0);
      const Vec3 gy = g.grad(y, t);
      const Vec3 pred = gy + pc.A.transpose() * gy;
      const double pred_t = g.dt(y, t) + pc.a0.dot(gy) - kappa * gy(0);
      const Vec3 x = forward_map(y, t, spec, kappa);
      for (int j = 0; j < 3; ++j) {
        Vec3 e = Vec3::Zero();
        e(j) = h;
        const double fd = (f(x + e, t) - f(x - e, t)) / (2.0 * h);
        rep.space_error = std::max(rep.space_error, std::abs(fd - pred(j)));
      }
      const double fdt = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
      rep.time_error = std::max(rep.time_error, std::abs(fdt - pred_t));
      ++rep.n_points;
    }
  return rep;
}

nlohmann::ordered_json DivergenceReport::to_json() const {
  return {{"max_discrepancy", max_discrepancy}, {"reference", reference}, {"relative", relative()}};
}

DivergenceReport transform_divergence_check(const RealField& v, const TransformCoefficients& c, WeightForm form) {
  const auto& g = c.grid;
  if (v.components() != 3 || !g.same_shape(v.grid()) || v.layers() != g.n_time())
    throw ValidationError("divergence check needs a 3-component space-time field on the coefficient grid");
  const RealField grad = inverse_transform(gradient(forward_transform(v)));
  const int n = g.n_space;
  const double h = g.spacing();
  DivergenceReport rep;
  for (int m = 0; m < g.n_time(); ++m) {
    RealField w = RealField::steady(g, 3);
    for (std::size_t p = 0; p < g.n_points(); ++p) {
      const double jac = 1.0 + c.J0(0, m, p);
      const Mat3 a = c.matrix(c.A, m, p);
      const Mat3 wm = jac * (Mat3::Identity() + (form == WeightForm::component ? a : Mat3(a.transpose())));
      const Vec3 vp(v(0, m, p), v(1, m, p), v(2, m, p));
      const Vec3 wp = wm * vp;
      for (int q = 0; q < 3; ++q) w(q, 0, p) = wp(q);
    }
    std::vector<double> disc(g.n_points()), ref(g.n_points());
    parallel_for(0, g.n_points(), [&](std::size_t p) {
      const int i[3] = {static_cast<int>(p / (static_cast<std::size_t>(n) * n)), static_cast<int>((p / n) % n),
                        static_cast<int>(p % n)};
      double rhs = 0.0;
      for (int l = 0; l < 3; ++l) {
        int ip[3] = {i[0], i[1], i[2]}, im[3] = {i[0], i[1], i[2]};
        ip[l] = (i[l] + 1) % n;
        im[l] = (i[l] + n - 1) % n;
        rhs += (w(l, 0, g.flat(ip[0], ip[1], ip[2])) - w(l, 0, g.flat(im[0], im[1], im[2]))) / (2.0 * h);
      }
      const Mat3 a = c.matrix(c.A, m, p);
      double lhs = 0.0;
      for (int j = 0; j < 3; ++j) {
        lhs += grad(3 * j + j, m, p);
        for (int l = 0; l < 3; ++l) lhs += a(l, j) * grad(3 * j + l, m, p);
      }
      lhs *= 1.0 + c.J0(0, m, p);
      disc[p] = std::abs(lhs - rhs);
      ref[p] = std::abs(lhs);
    });
    rep.max_discrepancy = std::max(rep.max_discrepancy, *std::max_element(disc.begin(), disc.end()));
    rep.reference = std::max(rep.reference, *std::max_element(ref.begin(), ref.end()));
  }
  return rep;
}

nlohmann::ordered_json NoslipReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_points"] = points.size();
  j["n_times"] = times.size();
  j["kappa"] = kappa;
  j["eps0"] = eps0;
  j["sup_h"] = sup_h;
  j["sup_dt_phi"] = sup_dt_phi;
  j["max_time_mean"] = max_time_mean;
  j["measured_c"] = measured_c;
  j["bound_context"] = bound_context;
  return j;
}

NoslipReport noslip_boundary_data(const OscillationSpec& spec, double kappa, const std::vector<Vec3>& points,
                                  int n_times) {
  spec.validate();
  if (n_times < 2) throw ValidationError("noslip data needs at least 2 time samples");
  NoslipReport rep;
  rep.points = points;
  rep.kappa = kappa;
  rep.eps0 = spec.amplitude;
  for (int m = 0; m < n_times; ++m) rep.times.push_back(spec.period * m / n_times);
  rep.values.resize(points.size() * n_times);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec3 mean = Vec3::Zero();
    for (int m = 0; m < n_times; ++m) {
      const double t = rep.times[m];
      const PointCoefficients pc = coefficients_at(points[i], t, spec, kappa, CoefficientMethod::analytic, 0.0);
      const Vec3 dphi = spec.velocity(points[i], t);
      const Vec3 h = pc.weight * (dphi + Vec3(kappa, 0.0, 0.0));
      rep.values[i * n_times + m] = h;
      rep.sup_h = std::max(rep.sup_h, h.norm());
      rep.sup_dt_phi = std::max(rep.sup_dt_phi, dphi.norm());
      mean += h / n_times;
    }
    rep.max_time_mean = std::max(rep.max_time_mean, mean.norm());
  }
  const double base = rep.sup_dt_phi + std::abs(kappa);
  if (base > 0.0 && rep.eps0 > 0.0) rep.measured_c = (rep.sup_h / base - 1.0) / rep.eps0;
  rep.bound_context = (1.0 + rep.eps0) * (rep.eps0 + std::abs(kappa));
  return rep;
}

std::vector<Vec3> body_surface_points(const OscillationSpec& spec, int n) {
  std::vector<Vec3> pts = sphere_directions(n);
  for (Vec3& p : pts) p *= spec.body_radius();
  return pts;
}

}  // namespace tpflow
