#include "tpflow/norms.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/interp.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace tpflow {

nlohmann::ordered_json NormValue::to_json() const {
  return {{"value", value},
          {"argmax", {argmax(0), argmax(1), argmax(2)}},
          {"boundary_attained", boundary_attained}};
}

double wake_weight(const Vec3& x, double alpha, double beta, double wake_sign) {
  const double r = x.norm();
  double w = std::pow(1.0 + r, alpha);
  if (beta != 0.0) w *= std::pow(1.0 + r - wake_sign * x(0), beta);
  return w;
}

namespace {

NormValue weighted_sup_of_magnitude(const SpaceTimeGrid& g, const std::vector<double>& mag, double alpha,
                                    double beta, double wake_sign) {
  const int n = g.n_space;
  NormValue out;
  int best[3] = {0, 0, 0};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double m = mag[g.flat(a, b, c)];
        if (m == 0.0) continue;
        const double v = m * wake_weight(g.point(a, b, c), alpha, beta, wake_sign);
        if (v > out.value) {
          out.value = v;
          best[0] = a;
          best[1] = b;
          best[2] = c;
        }
      }
  out.argmax = g.point(best[0], best[1], best[2]);
  for (int i : best)
    if (out.value > 0.0 && (i == 0 || i == n - 1)) out.boundary_attained = true;
  return out;
}

std::vector<double> magnitude(const RealField& f, int m) {
  std::vector<double> mag(f.layer_size(), 0.0);
  for (int c = 0; c < f.components(); ++c) {
    const auto l = f.layer(c, m);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += l[i] * l[i];
  }
  for (double& v : mag) v = std::sqrt(v);
  return mag;
}

}  // namespace

NormValue weighted_sup(const RealField& f, double alpha, double beta, double wake_sign) {
  if (!f.is_steady()) throw ValidationError("weighted_sup expects a steady (single-layer) field");
  return weighted_sup_of_magnitude(f.grid(), magnitude(f, 0), alpha, beta, wake_sign);
}

RealField time_lp_norm(const RealField& f, double p, int samples) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("time norm exponent p must be finite and >= 1");
  const RealField r = f.is_steady() ? f : resample_time(f, std::max(samples, f.layers()));
  RealField out = RealField::steady(f.grid(), 1);
  auto dst = out.layer(0, 0);
  for (int m = 0; m < r.layers(); ++m) {
    const std::vector<double> mag = magnitude(r, m);
    for (std::size_t i = 0; i < mag.size(); ++i) dst[i] += std::pow(mag[i], p);
  }
  for (double& v : dst) v = std::pow(v / r.layers(), 1.0 / p);
  return out;
}

NormValue weighted_osc(const RealField& f, double p, double alpha, int samples) {
  if (!(p > 1.0)) throw ValidationError("weighted_osc needs p in (1, inf)");
  const RealField tn = time_lp_norm(f, p, samples);
  const auto l = tn.layer(0, 0);
  return weighted_sup_of_magnitude(f.grid(), std::vector<double>(l.begin(), l.end()), alpha, 0.0, 1.0);
}

nlohmann::ordered_json DecayReport::to_json() const {
  return {{"slope", slope},       {"intercept", intercept}, {"std_error", std_error},
          {"ci95", {ci_low, ci_high}}, {"r_squared", r_squared}, {"n_points", n_points},
          {"r_min", r_min},       {"r_max", r_max}};
}

DecayReport fit_power_law(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size()) throw ValidationError("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  DecayReport rep;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    lx.push_back(std::log(radii[i]));
    ly.push_back(std::log(values[i]));
    rep.radii.push_back(radii[i]);
    rep.values.push_back(values[i]);
  }
  const std::size_t n = lx.size();
  if (n < 8) throw ValidationError("insufficient data for decay fit: " + std::to_string(n) + " valid samples (need 8)");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("decay fit needs distinct radii");
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - rep.intercept - rep.slope * lx[i];
    sse += e * e;
  }
  rep.std_error = std::sqrt(sse / (n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  rep.ci_low = rep.slope - tq * rep.std_error;
  rep.ci_high = rep.slope + tq * rep.std_error;
  rep.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  rep.n_points = static_cast<int>(n);
  rep.r_min = rep.radii.front();
  rep.r_max = rep.radii.back();
  return rep;
}

DecayDirection parse_decay_direction(const std::string& s) {
  if (s == "isotropic") return DecayDirection::isotropic;
  if (s == "along-wake" || s == "along_wake") return DecayDirection::along_wake;
  if (s == "against-wake" || s == "against_wake") return DecayDirection::against_wake;
  throw ValidationError("unknown decay direction '" + s + "'");
}

std::string to_string(DecayDirection d) {
  switch (d) {
    case DecayDirection::isotropic: return "isotropic";
    case DecayDirection::along_wake: return "along-wake";
    case DecayDirection::against_wake: return "against-wake";
  }
  return "?";
}

std::vector<Vec3> sphere_directions(int count) {
  std::vector<Vec3> dirs;
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(1.0 - z * z);
    dirs.emplace_back(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
  }
  return dirs;
}

DecayReport fit_field_decay(const std::function<double(const Vec3&)>& magnitude_at, DecayDirection dir,
                            double r_min, double r_max, int n_radii, double wake_sign, int n_directions) {
  if (n_radii < 8) throw ValidationError("insufficient data for decay fit: need >= 8 radii");
  if (!(r_min > 0.0 && r_max > r_min)) throw ValidationError("decay fit needs 0 < r_min < r_max");
  std::vector<Vec3> dirs;
  if (dir == DecayDirection::isotropic) dirs = sphere_directions(n_directions);
  else if (dir == DecayDirection::along_wake) dirs = {Vec3(wake_sign, 0, 0)};
  else dirs = {Vec3(-wake_sign, 0, 0)};
  std::vector<double> radii(n_radii), values(n_radii);
  for (int i = 0; i < n_radii; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (n_radii - 1));
    double acc = 0.0;
    for (const Vec3& d : dirs) acc += magnitude_at(r * d);
    radii[i] = r;
    values[i] = acc / static_cast<double>(dirs.size());
  }
  return fit_power_law(radii, values);
}

DecayReport fit_field_decay(const RealField& f, DecayDirection dir, double r_min, double r_max, int n_radii,
                            double wake_sign, int n_directions) {
  if (r_max > f.grid().box_half_length)
    throw ValidationError("decay fit radius exceeds the box half-length");
  auto mag = [&f](const Vec3& x) {
    double s = 0.0;
    for (int c = 0; c < f.components(); ++c) {
      const double v = interpolate_tricubic(f, c, 0, x);
      s += v * v;
    }
    return std::sqrt(s);
  };
  return fit_field_decay(mag, dir, r_min, r_max, n_radii, wake_sign, n_directions);
}

}  // namespace tpflow
