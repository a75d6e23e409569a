#include "tpflow/picard.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace tpflow {

NormFlavor parse_norm_flavor(const std::string& s) {
  if (s == "stokes_I0") return NormFlavor::stokes_I0;
  if (s == "oseen_Ikappa") return NormFlavor::oseen_Ikappa;
  if (s == "oseen_int") return NormFlavor::oseen_int;
  throw ValidationError("unknown norm_flavor '" + s + "' (expected stokes_I0, oseen_Ikappa or oseen_int)");
}

std::string to_string(NormFlavor f) {
  switch (f) {
    case NormFlavor::stokes_I0: return "stokes_I0";
    case NormFlavor::oseen_Ikappa: return "oseen_Ikappa";
    case NormFlavor::oseen_int: return "oseen_int";
  }
  return "?";
}

void NormParams::validate(NormFlavor flavor) const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("norm p must be in (1, inf)");
  if (!(q >= 1.0) || !std::isfinite(q)) throw ValidationError("norm q must be finite and >= 1");
  if (time_samples < 1) throw ValidationError("time_samples must be >= 1");
  if (flavor == NormFlavor::oseen_Ikappa && !(delta > 0.0 && delta < 0.25))
    throw ValidationError("delta must lie in (0, 1/4) for oseen_Ikappa");
  if (flavor == NormFlavor::oseen_int) {
    if (!(s > 1.0 && s < 4.0 / 3.0)) throw ValidationError("s must lie in (1, 4/3) for oseen_int");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1) for oseen_int");
  }
}

nlohmann::ordered_json NormParams::to_json() const {
  return {{"p", p}, {"q", q}, {"delta", delta}, {"s", s}, {"time_samples", time_samples}};
}

double CompositeNorm::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  throw ValidationError("unknown norm term '" + name + "'");
}

nlohmann::ordered_json CompositeNorm::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  nlohmann::ordered_json t;
  for (const auto& [k, v] : terms) t[k] = v;
  j["terms"] = t;
  return j;
}

namespace {

double spatial_lr(const SpaceTimeGrid& g, const RealField& f, int layer, double r) {
  const double h3 = std::pow(g.spacing(), 3);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.layer_size(); ++i) {
    double m2 = 0.0;
    for (int c = 0; c < f.components(); ++c) m2 += f(c, layer, i) * f(c, layer, i);
    acc += std::pow(std::sqrt(m2), r);
  }
  return std::pow(acc * h3, 1.0 / r);
}

// Spatial H^2_r pieces of a steady field: ||v||, ||grad v||, ||grad^2 v||.
std::array<double, 3> h2_pieces(const RealField& v, double r) {
  const SpectralField s = forward_transform(v);
  const RealField gr = inverse_transform(gradient(s));
  RealField hess(v.grid(), 6 * v.components(), 1);
  int slot = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      std::array<int, 3> o{0, 0, 0};
      ++o[a];
      ++o[b];
      const RealField d = inverse_transform(partial(s, o));
      // Off-diagonal entries appear twice in the Frobenius norm.
      const double w = a == b ? 1.0 : std::sqrt(2.0);
      for (int c = 0; c < v.components(); ++c) {
        auto src = d.component(c);
        auto dst = hess.component(slot++);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = w * src[i];
      }
    }
  return {spatial_lr(v.grid(), v, 0, r), spatial_lr(v.grid(), gr, 0, r), spatial_lr(v.grid(), hess, 0, r)};
}

RealField layer_as_steady(const RealField& f, int m) {
  RealField out = RealField::steady(f.grid(), f.components());
  for (int c = 0; c < f.components(); ++c) std::ranges::copy(f.layer(c, m), out.layer(c, 0).begin());
  return out;
}

// L_p over the normalized time measure of per-sample values.
double lp_mean(const std::vector<double>& vals, double p) {
  double acc = 0.0;
  for (double v : vals) acc += std::pow(v, p);
  return std::pow(acc / vals.size(), 1.0 / p);
}

RealField time_samples_of(const RealField& f, int samples) {
  return f.is_steady() ? f : resample_time(f, std::max(samples, f.layers()));
}

RealField spatial_gradient(const RealField& f) { return inverse_transform(gradient(forward_transform(f))); }

RealField hessian(const RealField& f) {
  const SpectralField s = forward_transform(f);
  RealField out(f.grid(), 9 * f.components(), f.layers());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      std::array<int, 3> o{0, 0, 0};
      ++o[a];
      ++o[b];
      const RealField d = inverse_transform(partial(s, o));
      for (int c = 0; c < f.components(); ++c)
        std::ranges::copy(d.component(c), out.component(9 * c + 3 * a + b).begin());
    }
  return out;
}

RealField time_derivative_field(const RealField& f) {
  if (f.is_steady()) return RealField(f.grid(), f.components(), 1);
  return inverse_transform(time_derivative(forward_transform(f)));
}

double wake_sign_of(const SpaceTimeGrid& g) { return g.kappa > 0.0 ? -1.0 : 1.0; }

}  // namespace

double lebesgue_space(const RealField& f, double r) {
  if (!f.is_steady()) throw ValidationError("lebesgue_space expects a steady field");
  return spatial_lr(f.grid(), f, 0, r);
}

double lebesgue_time_space(const RealField& f, double p, double r, int samples) {
  if (f.is_steady()) return spatial_lr(f.grid(), f, 0, r);
  const RealField s = time_samples_of(f, samples);
  std::vector<double> vals(s.layers());
  for (int m = 0; m < s.layers(); ++m) vals[m] = spatial_lr(f.grid(), s, m, r);
  return lp_mean(vals, p);
}

double lebesgue_time_h2(const RealField& v, double p, double r, int samples) {
  const RealField s = time_samples_of(v, samples);
  std::vector<double> vals(s.layers());
  for (int m = 0; m < s.layers(); ++m) {
    const auto pieces = h2_pieces(layer_as_steady(s, m), r);
    vals[m] = pieces[0] + pieces[1] + pieces[2];
  }
  return lp_mean(vals, p);
}

CompositeNorm composite_norm(const RealField& v, const RealField& q, NormFlavor flavor, const NormParams& np) {
  np.validate(flavor);
  if (v.components() != 3 || q.components() != 1) throw ValidationError("composite_norm expects (velocity, pressure)");
  const SpaceTimeGrid& g = v.grid();
  const double kappa = std::abs(g.kappa);
  const int ns = np.time_samples;
  CompositeNorm out;
  auto add = [&](const std::string& name, double value) {
    out.terms.emplace_back(name, value);
    out.total += value;
  };
  const RealField grad_q = spatial_gradient(q);
  if (flavor == NormFlavor::stokes_I0 || flavor == NormFlavor::oseen_Ikappa) {
    add("dt_v", lebesgue_time_space(time_derivative_field(v), np.p, np.q, ns));
    add("v_H2", lebesgue_time_h2(v, np.p, np.q, ns));
    add("grad_q", lebesgue_time_space(grad_q, np.p, np.q, ns));
    const RealField grad_v = spatial_gradient(v);
    if (flavor == NormFlavor::stokes_I0) {
      add("v_osc_p1", weighted_osc(v, np.p, 1.0, ns).value);
      add("grad_v_osc_p2", weighted_osc(grad_v, np.p, 2.0, ns).value);
    } else {
      const double kd = std::pow(kappa, np.delta);
      const double ws = wake_sign_of(g);
      const RealField vS = v.is_steady() ? v : project_steady(v);
      add("vS_wake", kd * weighted_sup(vS, 1.0, np.delta, ws).value);
      add("grad_vS_wake", kd * weighted_sup(spatial_gradient(vS), 1.5, 0.5 + np.delta, ws).value);
      if (!v.is_steady()) {
        add("vperp_osc", weighted_osc(project_oscillatory(v), np.p, 1.0 + np.delta, ns).value);
        add("grad_vperp_osc", weighted_osc(project_oscillatory(grad_v), np.p, 2.0 + np.delta, ns).value);
      } else {
        add("vperp_osc", 0.0);
        add("grad_vperp_osc", 0.0);
      }
    }
    return out;
  }
  // oseen_int
  const RealField vS = v.is_steady() ? v : project_steady(v);
  const RealField gS = spatial_gradient(vS);
  const RealField hS = hessian(vS);
  RealField d1S(g, 3, 1);
  for (int i = 0; i < 3; ++i) std::ranges::copy(gS.component(3 * i), d1S.component(i).begin());
  const double s = np.s;
  add("hess_vS_s", lebesgue_space(hS, s));
  add("grad_vS", std::pow(kappa, 0.25) * lebesgue_space(gS, 4.0 * s / (4.0 - s)));
  add("vS", std::sqrt(kappa) * lebesgue_space(vS, 2.0 * s / (2.0 - s)));
  add("d1_vS", kappa * lebesgue_space(d1S, s));
  add("hess_vS_q", lebesgue_space(hS, np.q));
  const RealField vP = v.is_steady() ? RealField(g, 3, 1) : project_oscillatory(v);
  const RealField dtP = time_derivative_field(vP);
  for (double r : {s, np.q}) {
    const std::string tag = r == s ? "_s" : "_q";
    add("dt_vperp" + tag, lebesgue_time_space(dtP, np.p, r, ns));
    add("vperp_H2" + tag, lebesgue_time_h2(vP, np.p, r, ns));
    add("grad_q" + tag, lebesgue_time_space(grad_q, np.p, r, ns));
  }
  return out;
}

RealField divergence_potential(const RealField& f) {
  if (f.components() != 3) throw ValidationError("divergence_potential expects a 3-vector field");
  const SpaceTimeGrid& g = f.grid();
  SpectralField s = forward_transform(f);
  const int n = g.n_space;
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < s.layers(); ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int d = 0; d < n; ++d) {
            const double xi2 = std::pow(g.wavenumber(g.space_mode(a)), 2) + std::pow(g.wavenumber(g.space_mode(b)), 2) +
                               std::pow(g.wavenumber(g.space_mode(d)), 2);
            cplx& v = s(c, k, g.flat(a, b, d));
            v = xi2 > 0.0 ? -v / xi2 : cplx(0.0);
          }
  return inverse_transform(gradient(s));
}

double data_kappa_power(NormFlavor flavor, double kappa, const NormParams& np) {
  switch (flavor) {
    case NormFlavor::stokes_I0: return 1.0;
    case NormFlavor::oseen_Ikappa: return std::pow(std::abs(kappa), 2.0 * np.delta);
    case NormFlavor::oseen_int: return std::pow(std::abs(kappa), 1.0 / (1.0 + np.delta));
  }
  return 1.0;
}

double solution_kappa_power(NormFlavor flavor, double kappa, const NormParams& np) {
  switch (flavor) {
    case NormFlavor::stokes_I0: return 1.0;
    case NormFlavor::oseen_Ikappa: return std::pow(std::abs(kappa), 2.0 * np.delta);
    case NormFlavor::oseen_int: return std::sqrt(std::abs(kappa));
  }
  return 1.0;
}

CompositeNorm data_norm(const RealField& f, NormFlavor flavor, const NormParams& np) {
  np.validate(flavor);
  if (f.components() != 3) throw ValidationError("data_norm expects a 3-vector forcing");
  CompositeNorm out;
  auto add = [&](const std::string& name, double value) {
    out.terms.emplace_back(name, value);
    out.total += value;
  };
  const int ns = np.time_samples;
  if (flavor == NormFlavor::oseen_int) {
    add("f_s", lebesgue_time_space(f, np.p, np.s, ns));
    add("f_q", lebesgue_time_space(f, np.p, np.q, ns));
    return out;
  }
  const RealField F = divergence_potential(f);
  const RealField fS = f.is_steady() ? f : project_steady(f);
  const RealField FS = F.is_steady() ? F : project_steady(F);
  const RealField fP = f.is_steady() ? RealField(f.grid(), 3, 1) : project_oscillatory(f);
  const RealField FP = F.is_steady() ? RealField(f.grid(), 9, 1) : project_oscillatory(F);
  if (flavor == NormFlavor::stokes_I0) {
    add("fS_3", weighted_sup(fS, 3.0, 0.0).value);
    add("FS_2", weighted_sup(FS, 2.0, 0.0).value);
    add("fperp_p2", weighted_osc(fP, np.p, 2.0, ns).value);
    add("Fperp_p1", weighted_osc(FP, np.p, 1.0, ns).value);
  } else {
    add("fS_wake", weighted_sup(fS, 2.5, 0.5 + 2.0 * np.delta, wake_sign_of(f.grid())).value);
    add("fperp_osc", weighted_osc(fP, np.p, 2.0 + np.delta, ns).value);
    add("Fperp_osc", weighted_osc(FP, np.p, 1.0 + np.delta, ns).value);
  }
  return out;
}

void PicardConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be > 0");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (max_iters < 2) throw ValidationError("max_iters must be >= 2");
  if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
  if (!(eps0 >= 0.0)) throw ValidationError("eps0 must be >= 0");
  norm.validate(norm_flavor);
}

PicardConfig PicardConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> keys = {"rho", "eps", "eps0", "max_iters", "tol", "norm_flavor",
                                             "p", "q", "delta", "s", "time_samples"};
  if (!j.is_object()) throw ValidationError("picard block must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ValidationError("unknown picard key '" + k + "'");
  PicardConfig c;
  try {
    c.rho = j.value("rho", c.rho);
    c.eps = j.value("eps", c.eps);
    c.eps0 = j.value("eps0", c.eps0);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.tol = j.value("tol", c.tol);
    if (j.contains("norm_flavor")) c.norm_flavor = parse_norm_flavor(j.at("norm_flavor").get<std::string>());
    c.norm.p = j.value("p", c.norm.p);
    c.norm.q = j.value("q", c.norm.q);
    c.norm.delta = j.value("delta", c.norm.delta);
    c.norm.s = j.value("s", c.norm.s);
    c.norm.time_samples = j.value("time_samples", c.norm.time_samples);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("picard block: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json PicardConfig::to_json() const {
  nlohmann::ordered_json j;
  j["rho"] = rho;
  j["eps"] = eps;
  j["eps0"] = eps0;
  j["max_iters"] = max_iters;
  j["tol"] = tol;
  j["norm_flavor"] = to_string(norm_flavor);
  const auto nj = norm.to_json();
  for (const auto& [k, v] : nj.items()) j[k] = v;
  return j;
}

double PicardTrace::max_q() const {
  double m = 0.0;
  for (const auto& s : steps)
    if (s.q) m = std::max(m, *s.q);
  return m;
}

std::string PicardTrace::to_csv() const {
  std::ostringstream o;
  o << std::setprecision(12);
  o << "iter,composite_norm,step_norm,q_i,residual,div_rel\n";
  for (const auto& s : steps) {
    o << s.iter << ',' << s.composite_norm << ',' << s.step_norm << ',';
    if (s.q) o << *s.q;
    o << ',' << s.residual << ',' << s.div_rel << '\n';
  }
  return o.str();
}

nlohmann::ordered_json PicardTrace::to_json() const {
  nlohmann::ordered_json j;
  j["converged"] = converged;
  j["diverged"] = diverged;
  j["message"] = message;
  j["iterations"] = steps.size();
  j["data_norm"] = data_norm;
  j["final_composite_norm"] = steps.empty() ? 0.0 : steps.back().composite_norm;
  j["final_residual"] = final_residual;
  j["final_div_rel"] = final_div_rel;
  j["max_q"] = max_q();
  nlohmann::ordered_json qs = nlohmann::ordered_json::array();
  for (const auto& s : steps)
    if (s.q) qs.push_back(*s.q);
  j["q"] = qs;
  return j;
}

namespace {

SpectralField truncated(const RealField& f) {
  SpectralField s = forward_transform(f);
  apply_dealias_mask(s);
  zero_flagged_modes(s);
  return s;
}

RealField right_hand_side(const RealField& f, const FlowState& st, const PerturbationOperators& ops) {
  RealField rhs = f;
  if (!ops.trivial()) rhs += ops.apply_L(st.velocity, st.pressure);
  rhs -= ops.apply_N(st.velocity);
  return rhs;
}

double residual_of(const SpectralField& F, const FlowState& st, const RealField& rhs) {
  SpectralField r = oseen_operator(forward_transform(st.velocity), forward_transform(st.pressure));
  apply_dealias_mask(r);
  zero_flagged_modes(r);
  r -= truncated(rhs);
  const double scale = spectral_l2(F);
  const double d = spectral_l2(r);
  return scale > 0.0 ? d / scale : d;
}

}  // namespace

double picard_residual(const RealField& f, const FlowState& s, const PerturbationOperators& ops) {
  return residual_of(truncated(f), s, right_hand_side(f, s, ops));
}

PicardResult picard_iterate(const RealField& f, const TransformCoefficients& coeffs, const PicardConfig& cfg) {
  cfg.validate();
  if (f.components() != 3) throw ValidationError("forcing must be a 3-vector field");
  const SpaceTimeGrid& g = f.grid();
  if (f.layers() != g.n_time()) throw ValidationError("forcing must carry every time layer");
  if (!coeffs.grid.same_shape(g) || coeffs.grid.kappa != g.kappa || coeffs.grid.viscosity != g.viscosity)
    throw ValidationError("coefficient grid does not match the forcing grid");
  f.require_finite("forcing");
  const PerturbationOperators ops(coeffs);
  const SpectralField F = truncated(f);

  PicardResult res;
  PicardTrace& tr = res.trace;
  tr.data_norm = data_norm(f, cfg.norm_flavor, cfg.norm).total;
  FlowState cur{RealField::space_time(g, 3), RealField::space_time(g, 1)};
  std::optional<double> prev_step;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const RealField rhs = right_hand_side(f, cur, ops);
    PicardStep st;
    st.iter = it;
    st.residual = residual_of(F, cur, rhs);
    LinearSolveReport rep;
    const SpectralFlow sol = solve_linear_spectral(truncated(rhs), &rep);
    FlowState next{inverse_transform(sol.velocity), inverse_transform(sol.pressure)};
    st.div_rel = relative_divergence(sol.velocity);
    RealField dv = next.velocity, dp = next.pressure;
    dv -= cur.velocity;
    dp -= cur.pressure;
    st.step_norm = composite_norm(dv, dp, cfg.norm_flavor, cfg.norm).total;
    st.composite_norm = composite_norm(next.velocity, next.pressure, cfg.norm_flavor, cfg.norm).total;
    if (prev_step && *prev_step > 0.0) st.q = st.step_norm / *prev_step;
    prev_step = st.step_norm;
    tr.steps.push_back(st);
    cur = std::move(next);
    if (!std::isfinite(st.composite_norm) || st.composite_norm > 10.0 * cfg.rho) {
      tr.diverged = true;
      std::ostringstream m;
      m << "composite norm " << st.composite_norm << " left the ball 10 rho = " << 10.0 * cfg.rho << " at iteration "
        << it;
      tr.message = m.str();
      break;
    }
    if (st.step_norm <= cfg.tol * st.composite_norm || st.composite_norm == 0.0) {
      tr.converged = true;
      tr.message = "relative step below tol after " + std::to_string(it) + " iterations";
      break;
    }
  }
  if (!tr.converged && !tr.diverged) tr.message = "max_iters reached without meeting tol";
  tr.final_div_rel = relative_divergence(forward_transform(cur.velocity));
  tr.final_residual = std::isfinite(tr.steps.back().composite_norm) ? residual_of(F, cur, right_hand_side(f, cur, ops))
                                                                     : std::numeric_limits<double>::infinity();
  res.state = std::move(cur);
  return res;
}

PicardResult picard_iterate(const RealField& f, const std::optional<OscillationSpec>& spec, const PicardConfig& cfg) {
  const SpaceTimeGrid& g = f.grid();
  if (!spec) return picard_iterate(f, zero_coefficients(g), cfg);
  OscillationSpec s = *spec;
  if (cfg.eps0 > 0.0) s.amplitude = cfg.eps0;
  return picard_iterate(f, assemble_coefficients(s, g.kappa, g), cfg);
}

RealField localized_forcing(const SpaceTimeGrid& g) {
  g.validate();
  RealField f = RealField::space_time(g, 3);
  const int n = g.n_space;
  const double sigma = 0.7;
  for (int m = 0; m < g.n_time(); ++m) {
    const double wt = g.omega() * g.time(m);
    const double c = std::cos(wt), s = std::sin(wt);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
          const Vec3 x = g.point(a, b, d);
          const double gauss = std::exp(-x.squaredNorm() / (2.0 * sigma * sigma));
          const Vec3 v = Vec3(x(2), 0.0, -x(0)) + c * Vec3(0.0, x(1), 0.0) + s * Vec3(x(0) * x(2), 0.0, x(2));
          for (int i = 0; i < 3; ++i) f(i, m, g.flat(a, b, d)) = gauss * v(i);
        }
  }
  return f;
}

std::string SweepTable::to_csv() const {
  std::ostringstream o;
  o << std::setprecision(12);
  o << "kappa,eps,data_target,data_norm,solution_norm,ratio,converged,diverged,iterations,max_q\n";
  for (const auto& r : rows)
    o << r.kappa << ',' << r.eps << ',' << r.data_target << ',' << r.data_norm << ',' << r.solution_norm << ','
      << r.ratio << ',' << (r.converged ? 1 : 0) << ',' << (r.diverged ? 1 : 0) << ',' << r.iterations << ','
      << r.max_q << '\n';
  return o.str();
}

nlohmann::ordered_json SweepTable::to_json() const {
  nlohmann::ordered_json j;
  j["flavor"] = to_string(flavor);
  nlohmann::ordered_json rs = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    rs.push_back({{"kappa", r.kappa},
                  {"eps", r.eps},
                  {"data_target", r.data_target},
                  {"data_norm", r.data_norm},
                  {"solution_norm", r.solution_norm},
                  {"ratio", r.ratio},
                  {"converged", r.converged},
                  {"diverged", r.diverged},
                  {"iterations", r.iterations},
                  {"max_q", r.max_q}});
  j["rows"] = rs;
  return j;
}

SweepTable smallness_sweep(NormFlavor flavor, const std::vector<double>& kappas, const std::vector<double>& epss,
                           const std::optional<OscillationSpec>& spec, const SpaceTimeGrid& g,
                           const PicardConfig& cfg) {
  if (kappas.empty() || epss.empty()) throw ValidationError("sweep needs non-empty kappa and eps lists");
  for (double e : epss)
    if (!(e > 0.0)) throw ValidationError("sweep eps values must be > 0");
  if (flavor != NormFlavor::stokes_I0)
    for (double k : kappas)
      if (k == 0.0) throw ValidationError("flavor " + to_string(flavor) + " needs kappa != 0");
  SweepTable table;
  table.flavor = flavor;
  for (double kappa : kappas) {
    SpaceTimeGrid gk = g;
    gk.kappa = kappa;
    std::optional<TransformCoefficients> coeffs;
    if (spec) {
      OscillationSpec s = *spec;
      if (cfg.eps0 > 0.0) s.amplitude = cfg.eps0;
      coeffs = assemble_coefficients(s, kappa, gk);
    } else {
      coeffs = zero_coefficients(gk);
    }
    const RealField shape = localized_forcing(gk);
    PicardConfig c = cfg;
    c.norm_flavor = flavor;
    const double base = data_norm(shape, flavor, c.norm).total;
    for (double eps : epss) {
      SweepRow row;
      row.kappa = kappa;
      row.eps = eps;
      row.data_target = eps * eps * data_kappa_power(flavor, kappa, c.norm);
      RealField f = shape;
      f *= row.data_target / base;
      c.eps = eps;
      c.rho = eps * solution_kappa_power(flavor, kappa, c.norm);
      const PicardResult r = picard_iterate(f, *coeffs, c);
      row.data_norm = r.trace.data_norm;
      row.solution_norm = r.trace.steps.back().composite_norm;
      row.ratio = row.solution_norm / c.rho;
      row.converged = r.trace.converged;
      row.diverged = r.trace.diverged;
      row.iterations = static_cast<int>(r.trace.steps.size());
      row.max_q = r.trace.max_q();
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace tpflow
