#include "cli.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/fundamental.hpp"
#include "tpflow/norms.hpp"
#include "tpflow/operators.hpp"
#include "tpflow/parallel.hpp"
#include "tpflow/picard.hpp"
#include "tpflow/solver.hpp"
#include "tpflow/symbols.hpp"
#include "tpflow/tpf_io.hpp"
#include "tpflow/transform.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace tpflow::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct Context {
  json cfg;
  fs::path out;
  std::uint64_t seed = 0;
  bool verbose = false;
  std::vector<fs::path> written;

  void log(const std::string& msg) const {
    if (verbose) std::cerr << "[tpflow] " << msg << '\n';
  }
  void write(const std::string& name, const std::string& contents) {
    write_file_atomic(out / name, contents);
    written.push_back(out / name);
  }
  void write_json(const std::string& name, const ojson& j) { write(name, j.dump(2) + "\n"); }
  void write_field(const std::string& name, const RealField& f) {
    write_tpf(out / name, f);
    written.push_back(out / name);
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("key '" + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError("missing key '" + key + "' in " + where);
  return get<T>(j, key, T{});
}

Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(what + " must be a 3-vector");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception&) {
    throw ValidationError(what + " must hold numbers");
  }
}

// {box_half_length, n_space | spacing, period, n_time_modes, viscosity, kappa}
SpaceTimeGrid parse_grid(const json& j) {
  check_keys(j, {"box_half_length", "n_space", "spacing", "period", "n_time_modes", "viscosity", "kappa"}, "grid");
  SpaceTimeGrid g;
  g.box_half_length = get(j, "box_half_length", g.box_half_length);
  if (j.contains("n_space") && j.contains("spacing")) throw ValidationError("grid: give n_space or spacing, not both");
  if (j.contains("spacing")) {
    const double h = get(j, "spacing", 0.0);
    if (!(h > 0.0)) throw ValidationError("grid.spacing must be > 0");
    g.n_space = static_cast<int>(std::lround(2.0 * g.box_half_length / h));
  } else {
    g.n_space = get(j, "n_space", g.n_space);
  }
  g.period = get(j, "period", g.period);
  g.n_time_modes = get(j, "n_time_modes", g.n_time_modes);
  g.viscosity = get(j, "viscosity", g.viscosity);
  g.kappa = get(j, "kappa", g.kappa);
  g.validate();
  return g;
}

ojson grid_json(const SpaceTimeGrid& g) {
  return {{"box_half_length", g.box_half_length}, {"n_space", g.n_space},     {"period", g.period},
          {"n_time_modes", g.n_time_modes},       {"viscosity", g.viscosity}, {"kappa", g.kappa}};
}

std::optional<OscillationSpec> parse_spec(const json& cfg) {
  if (!cfg.contains("spec") || cfg.at("spec").is_null()) return std::nullopt;
  OscillationSpec s = OscillationSpec::from_json(cfg.at("spec"));
  s.validate();
  return s;
}

std::vector<double> log_radii(double r0, double r1, int n) {
  if (!(r0 > 0.0 && r1 > r0) || n < 2) throw ValidationError("radii need 0 < r_min < r_max and n_radii >= 2");
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = r0 * std::pow(r1 / r0, static_cast<double>(i) / (n - 1));
  return r;
}

RealField gaussian_field(const SpaceTimeGrid& g, int comps, std::uint64_t seed) {
  RealField f = RealField::space_time(g, comps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.values()) v = nd(rng);
  return f;
}

// Sum of random low Fourier modes (|j| <= 3 per axis, all time modes);
// solenoidal via the curl of such a potential.
RealField random_modes(const SpaceTimeGrid& g, int comps, std::uint64_t seed, bool solenoidal) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mode(-3, 3), tmode(-g.n_time_modes, g.n_time_modes);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * pi);
  RealField f = RealField::space_time(g, comps);
  const int n = g.n_space;
  for (int c = 0; c < comps; ++c)
    for (int term = 0; term < 6; ++term) {
      const int j1 = mode(rng), j2 = mode(rng), j3 = mode(rng), k = tmode(rng);
      const double a = amp(rng), ph = phase(rng);
      const Vec3 xi(g.wavenumber(j1), g.wavenumber(j2), g.wavenumber(j3));
      for (int m = 0; m < g.n_time(); ++m)
        for (int i1 = 0; i1 < n; ++i1)
          for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3)
              f(c, m, g.flat(i1, i2, i3)) +=
                  a * std::cos(xi.dot(g.point(i1, i2, i3)) + k * g.omega() * g.time(m) + ph);
    }
  if (!solenoidal) return f;
  if (comps != 3) throw ValidationError("solenoidal fields need 3 components");
  return inverse_transform(curl(forward_transform(f)));
}

// Smooth solenoidal reference-frame field with unit wavelength 2L.
RealField solenoidal_probe(const SpaceTimeGrid& g) {
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
          v(0, m, p) = std::sin(k * y(1) + t) * std::cos(k * y(2));
          v(1, m, p) = std::cos(k * y(0) - t) + 0.3 * std::sin(k * y(2));
          v(2, m, p) = std::sin(k * (y(0) + y(1))) * std::cos(t);
        }
  return v;
}

double rel(const RealField& a, const RealField& b) {
  RealField d = a;
  d -= b;
  const double s = b.l2_norm();
  return s > 0.0 ? d.l2_norm() / s : d.l2_norm();
}

double order_of(double coarse, double fine, double ratio = 2.0) {
  return std::log(coarse / fine) / std::log(ratio);
}

// ---------------------------------------------------------------- solve-linear

std::string cmd_solve_linear(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "grid", "forcing", "roundtrip_samples", "write_fields"},
             "solve-linear config");
  const SpaceTimeGrid g = parse_grid(require<json>(c, "grid", "solve-linear config"));
  const json fj = get<json>(c, "forcing", json::object());
  check_keys(fj, {"kind", "smoothness", "sharpness"}, "forcing");
  const std::string kind = get<std::string>(fj, "kind", "manufactured");
  ManufacturedCase mc;
  ojson forcing{{"kind", kind}};
  if (kind == "manufactured") {
    const double sm = get(fj, "smoothness", 0.6);
    if (!(sm > 0.0)) throw ValidationError("forcing.smoothness must be > 0");
    mc = manufactured_case(ctx.seed, g, sm);
    forcing["smoothness"] = sm;
    forcing["seed"] = ctx.seed;
  } else if (kind == "analytic") {
    const double sh = get(fj, "sharpness", 1.0);
    if (!(sh > 0.0)) throw ValidationError("forcing.sharpness must be > 0");
    mc = analytic_manufactured_case(g, sh);
    forcing["sharpness"] = sh;
  } else {
    throw ValidationError("forcing.kind must be 'manufactured' or 'analytic', got '" + kind + "'");
  }
  ctx.log("solving on " + std::to_string(g.n_space) + "^3 x " + std::to_string(g.n_time()));
  LinearSolveReport rep;
  const FlowState s = solve_linear_tp(mc.forcing, &rep);
  ojson out;
  out["grid"] = grid_json(g);
  out["forcing"] = forcing;
  ojson r = rep.to_json();
  r.erase("wall_time");
  out["report"] = r;
  out["velocity_error_rel"] = rel(s.velocity, mc.velocity);
  out["pressure_error_rel"] = rel(s.pressure, mc.pressure);
  out["divergence_rel"] = relative_divergence(forward_transform(s.velocity));

  const int samples = get(c, "roundtrip_samples", 0);
  if (samples < 0) throw ValidationError("roundtrip_samples must be >= 0");
  if (samples > 0) {
    double rt = 0.0, pv = 0.0;
    for (int i = 0; i < samples; ++i) {
      const RealField f = gaussian_field(g, 1, ctx.seed + 1000 + i);
      const SpectralField F = forward_transform(f);
      rt = std::max(rt, rel(inverse_transform(F), f));
      pv = std::max(pv, std::abs(spectral_l2(F) / f.l2_norm() - 1.0));
    }
    out["roundtrip"] = {{"samples", samples}, {"max_roundtrip_error", rt}, {"max_parseval_error", pv}};
  }
  ctx.write_json("solve_linear.json", out);
  if (get(c, "write_fields", false)) {
    ctx.write_field("velocity.tpf", s.velocity);
    ctx.write_field("pressure.tpf", s.pressure);
    ctx.write_field("forcing.tpf", mc.forcing);
  }
  return "solve-linear: residual " + num(rep.residual_rel) + ", velocity error " +
         num(out["velocity_error_rel"].get<double>());
}

// ---------------------------------------------------------------- fundsol

std::vector<Vec3> sample_points(const json& j) {
  std::vector<Vec3> pts;
  if (j.contains("points"))
    for (const auto& p : j.at("points")) pts.push_back(vec3(p, "points entry"));
  if (j.contains("rays")) {
    const json& r = j.at("rays");
    check_keys(r, {"r_min", "r_max", "n_radii", "directions"}, "rays");
    const auto radii = log_radii(require<double>(r, "r_min", "rays"), require<double>(r, "r_max", "rays"),
                                 require<int>(r, "n_radii", "rays"));
    for (const auto& d : require<json>(r, "directions", "rays")) {
      const Vec3 dir = vec3(d, "rays.directions entry");
      if (dir.norm() == 0.0) throw ValidationError("rays.directions entries must be nonzero");
      for (double rad : radii) pts.push_back(rad * dir.normalized());
    }
  }
  if (pts.empty()) throw ValidationError("no sample points: give 'points' or 'rays'");
  return pts;
}

KernelOptions kernel_options(const json& c) {
  KernelOptions o;
  o.time_samples = get(c, "time_samples", o.time_samples);
  if (o.time_samples < 8) throw ValidationError("time_samples must be >= 8");
  return o;
}

std::string fundsol_tp(Context& ctx, const SpaceTimeGrid& g) {
  const auto pts = sample_points(ctx.cfg);
  ctx.log("evaluating the oscillatory kernel at " + std::to_string(pts.size()) + " points");
  const auto s = eval_tp_kernel(pts, g, 1, kernel_options(ctx.cfg));
  std::ostringstream csv;
  csv << "x1,x2,x3,r,norm_m0,norm_m1,flags\n";
  int flagged = 0;
  for (const auto& k : s) {
    csv << num(k.x(0)) << ',' << num(k.x(1)) << ',' << num(k.x(2)) << ',' << num(k.r) << ','
        << num(k.norms[0][1]) << ',' << num(k.norms[1][1]) << ',' << (k.near_boundary ? "near_boundary" : "")
        << '\n';
    flagged += k.near_boundary;
  }
  ctx.write("fundsol.csv", csv.str());
  double tm = 0.0;
  for (const auto& k : s) tm = std::max(tm, k.time_mean_max);
  ctx.write_json("fundsol.json", {{"mode", "tp_kernel"},
                                  {"grid", grid_json(g)},
                                  {"n_points", s.size()},
                                  {"near_boundary", flagged},
                                  {"time_norm", "L2"},
                                  {"max_time_mean", tm}});
  return "fundsol: " + std::to_string(s.size()) + " kernel samples (" + std::to_string(flagged) + " near boundary)";
}

std::string fundsol_steady(Context& ctx, const SpaceTimeGrid& g) {
  const json& c = ctx.cfg;
  const double mu = g.viscosity, kappa = g.kappa;
  if (kappa == 0.0) throw ValidationError("steady_oseen mode needs grid.kappa != 0");
  const json w = get<json>(c, "wake", json{{"r_min", 10.0}, {"r_max", 1000.0}, {"n_radii", 25}});
  check_keys(w, {"r_min", "r_max", "n_radii"}, "wake");
  const auto radii = log_radii(get(w, "r_min", 10.0), get(w, "r_max", 1000.0), get(w, "n_radii", 25));
  const double ws = kappa > 0.0 ? -1.0 : 1.0;
  std::vector<double> along, against;
  std::ostringstream csv;
  csv << "radius,norm,direction\n";
  for (double r : radii) {
    along.push_back(steady_oseen_kernel(Vec3(ws * r, 0, 0), mu, kappa).norm());
    against.push_back(steady_oseen_kernel(Vec3(-ws * r, 0, 0), mu, kappa).norm());
  }
  for (std::size_t i = 0; i < radii.size(); ++i) csv << num(radii[i]) << ',' << num(along[i]) << ",along_wake\n";
  for (std::size_t i = 0; i < radii.size(); ++i)
    csv << num(radii[i]) << ',' << num(against[i]) << ",against_wake\n";
  ojson out;
  out["mode"] = "steady_oseen";
  out["grid"] = grid_json(g);
  out["wake_direction"] = std::vector<double>{ws, 0.0, 0.0};
  out["along_wake"] = fit_power_law(radii, along).to_json();
  out["against_wake"] = fit_power_law(radii, against).to_json();
  if (c.contains("points")) {
    const auto pts = sample_points(c);
    ctx.log("box evaluation of the steady kernel");
    const auto box = box_steady_kernel(pts, g, kernel_options(c));
    ojson cmp = ojson::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Mat3 ref = steady_oseen_kernel(pts[i], mu, kappa);
      const double e = (box[i] - ref).norm() / ref.norm();
      worst = std::max(worst, e);
      cmp.push_back({{"x", std::vector<double>{pts[i](0), pts[i](1), pts[i](2)}},
                     {"closed_form", ref.norm()},
                     {"box", box[i].norm()},
                     {"rel_diff", e}});
    }
    out["box_comparison"] = cmp;
    out["box_max_rel_diff"] = worst;
  }
  ctx.write("steady_oseen.csv", csv.str());
  ctx.write_json("steady_oseen.json", out);
  return "fundsol: wake slopes " + num(out["along_wake"]["slope"].get<double>()) + " (along), " +
         num(out["against_wake"]["slope"].get<double>()) + " (against)";
}

std::string fundsol_mu_phi(Context& ctx) {
  const json& c = ctx.cfg;
  MuPhiConfig m;
  m.theta = get(c, "theta", m.theta);
  m.period = get(c, "period", m.period);
  m.k_min = get(c, "k_min", m.k_min);
  m.k_max = get(c, "k_max", m.k_max);
  const int nk = get(c, "n_kappa", 20);
  if (nk < 1) throw ValidationError("n_kappa must be >= 1");
  if (!(m.theta > 0.0 && m.period > 0.0)) throw ValidationError("theta and period must be > 0");
  // Interior of (0, sqrt(theta / T)].
  const double kmax = std::sqrt(m.theta / m.period);
  for (int j = 1; j <= nk; ++j) m.kappas.push_back(kmax * j / (nk + 1));
  const MuPhiReport rep = check_mu_phi(m);
  const double s_probe = get(c, "phi_probe", 0.01);
  ojson out;
  out["mode"] = "mu_phi";
  out["kappas"] = m.kappas;
  out["report"] = rep.to_json();
  out["phi_probe"] = {{"s", s_probe},
                      {"phi", phi_function(s_probe)},
                      {"distance_to_limit", std::abs(phi_function(s_probe) - 1.0 / std::sqrt(2.0))}};
  ctx.write_json("mu_phi.json", out);
  return std::string("fundsol: mu/Phi inequalities ") + (rep.passed ? "hold" : "FAIL") + ", C_theta " +
         num(rep.c_theta);
}

std::string cmd_fundsol(Context& ctx) {
  const json& c = ctx.cfg;
  const std::string mode = get<std::string>(c, "mode", "tp_kernel");
  if (mode == "mu_phi") {
    check_keys(c, {"schema_version", "command", "seed", "mode", "theta", "period", "k_min", "k_max", "n_kappa",
                   "phi_probe"},
               "fundsol config");
    return fundsol_mu_phi(ctx);
  }
  check_keys(c, {"schema_version", "command", "seed", "mode", "grid", "points", "rays", "wake", "time_samples"},
             "fundsol config");
  const SpaceTimeGrid g = parse_grid(require<json>(c, "grid", "fundsol config"));
  if (mode == "tp_kernel") return fundsol_tp(ctx, g);
  if (mode == "steady_oseen") return fundsol_steady(ctx, g);
  throw ValidationError("mode must be tp_kernel, steady_oseen or mu_phi, got '" + mode + "'");
}

// ---------------------------------------------------------------- decay-fit

std::string cmd_decay_fit(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "grid", "box_half_lengths", "r_min", "r_max", "n_radii",
                 "direction", "time_samples"},
             "decay-fit config");
  const json gj = require<json>(c, "grid", "decay-fit config");
  if (!gj.contains("spacing")) throw ValidationError("decay-fit grid needs 'spacing' (kept fixed under refinement)");
  std::vector<double> halves = get(c, "box_half_lengths", std::vector<double>{});
  if (halves.empty()) halves.push_back(get(gj, "box_half_length", pi));
  const auto radii = log_radii(get(c, "r_min", 2.0), get(c, "r_max", 20.0), get(c, "n_radii", 12));
  const Vec3 dir = vec3(get<json>(c, "direction", json::array({0.0, 0.6, 0.8})), "direction").normalized();
  std::vector<Vec3> pts;
  for (double r : radii) pts.push_back(r * dir);

  std::ostringstream csv;
  csv << "box_half_length,order,radius,norm,direction\n";
  const std::string dname = num(dir(0)) + " " + num(dir(1)) + " " + num(dir(2));
  ojson fits = ojson::array();
  std::vector<std::array<double, 2>> slopes;
  for (double half : halves) {
    json gh = gj;
    gh["box_half_length"] = half;
    const SpaceTimeGrid g = parse_grid(gh);
    ctx.log("kernel on " + std::to_string(g.n_space) + "^3, L = " + num(half));
    const auto s = eval_tp_kernel(pts, g, 1, kernel_options(c));
    std::array<double, 2> sl{};
    for (int order = 0; order < 2; ++order) {
      const DecayReport d = fit_kernel_decay(s, order, 1);
      sl[order] = d.slope;
      for (std::size_t i = 0; i < s.size(); ++i)
        csv << num(half) << ',' << order << ',' << num(s[i].r) << ',' << num(s[i].norms[order][1]) << ',' << dname
            << '\n';
      fits.push_back({{"box_half_length", half}, {"n_space", g.n_space}, {"order", order}, {"fit", d.to_json()}});
    }
    slopes.push_back(sl);
  }
  ojson out;
  out["direction"] = std::vector<double>{dir(0), dir(1), dir(2)};
  out["time_norm"] = "L2";
  out["fits"] = fits;
  if (slopes.size() > 1) {
    ojson ch = ojson::array();
    for (std::size_t i = 1; i < slopes.size(); ++i)
      ch.push_back({{"from", halves[i - 1]},
                    {"to", halves[i]},
                    {"order0", std::abs(slopes[i][0] - slopes[i - 1][0])},
                    {"order1", std::abs(slopes[i][1] - slopes[i - 1][1])}});
    out["slope_change"] = ch;
  }
  ctx.write("decay_fit.csv", csv.str());
  ctx.write_json("decay_fit.json", out);
  return "decay-fit: slopes m=0 " + num(slopes.back()[0]) + ", m=1 " + num(slopes.back()[1]) + " at L = " +
         num(halves.back());
}

// ---------------------------------------------------------------- transform-check

std::string cmd_transform_check(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "spec", "kappa", "grid", "refinement", "chain_rule",
                 "smallness_amplitudes"},
             "transform-check config");
  const auto spec = parse_spec(c);
  if (!spec) throw ValidationError("transform-check needs a 'spec'");
  const double kappa = get(c, "kappa", 0.0);
  const json gj = require<json>(c, "grid", "transform-check config");
  std::vector<int> ns = get(c, "refinement", std::vector<int>{});
  if (ns.empty()) ns.push_back(parse_grid(gj).n_space);
  ojson out;
  out["spec"] = spec->to_json();
  out["kappa"] = kappa;

  ojson levels = ojson::array();
  std::vector<double> comp, lit;
  for (int n : ns) {
    json gn = gj;
    gn.erase("spacing");
    gn["n_space"] = n;
    SpaceTimeGrid g = parse_grid(gn);
    g.kappa = kappa;
    ctx.log("coefficients on " + std::to_string(n) + "^3");
    const auto co = assemble_coefficients(*spec, kappa, g);
    const RealField v = solenoidal_probe(g);
    const auto dc = transform_divergence_check(v, co, WeightForm::component);
    const auto dl = transform_divergence_check(v, co, WeightForm::literal_transpose);
    comp.push_back(dc.relative());
    lit.push_back(dl.relative());
    levels.push_back({{"n_space", n},
                      {"spacing", g.spacing()},
                      {"inverse_identity_error", inverse_identity_error(co)},
                      {"divergence_rel", dc.relative()},
                      {"divergence_rel_literal_transpose", dl.relative()},
                      {"smallness", co.smallness.to_json()}});
  }
  out["levels"] = levels;
  ojson orders = ojson::array();
  for (std::size_t i = 1; i < ns.size(); ++i)
    orders.push_back(order_of(comp[i - 1], comp[i], static_cast<double>(ns[i]) / ns[i - 1]));
  out["divergence_orders"] = orders;

  const json cr = get<json>(c, "chain_rule", json{{"h", {0.1, 0.05}}});
  check_keys(cr, {"h", "points", "times"}, "chain_rule");
  std::vector<double> hs = get(cr, "h", std::vector<double>{0.1, 0.05});
  std::vector<Vec3> pts;
  if (cr.contains("points"))
    for (const auto& p : cr.at("points")) pts.push_back(vec3(p, "chain_rule.points entry"));
  else
    pts = {Vec3(0.3, 0.2, -0.5), Vec3(1.2, 0.4, 0.3), Vec3(-0.8, 1.1, 0.2)};
  const std::vector<double> ts = get(cr, "times", std::vector<double>{0.4, 3.9});
  ojson crs = ojson::array(), cro = ojson::array();
  std::vector<ChainRuleReport> reps;
  for (double h : hs) {
    reps.push_back(chain_rule_check(*spec, kappa, h, pts, ts));
    crs.push_back(reps.back().to_json());
  }
  for (std::size_t i = 1; i < reps.size(); ++i)
    cro.push_back({{"space", order_of(reps[i - 1].space_error, reps[i].space_error, hs[i - 1] / hs[i])},
                   {"time", order_of(reps[i - 1].time_error, reps[i].time_error, hs[i - 1] / hs[i])}});
  out["chain_rule"] = crs;
  out["chain_rule_orders"] = cro;

  const auto amps = get(c, "smallness_amplitudes", std::vector<double>{});
  if (!amps.empty()) {
    SpaceTimeGrid g = parse_grid(gj);
    g.kappa = kappa;
    ojson sm = ojson::array();
    for (double a : amps) {
      OscillationSpec s = *spec;
      s.amplitude = a;
      sm.push_back(assemble_coefficients(s, kappa, g).smallness.to_json());
    }
    out["smallness_sweep"] = sm;
  }
  ctx.write_json("transform_check.json", out);
  std::string ord = orders.empty() ? "n/a" : num(orders.back().get<double>());
  return "transform-check: divergence order " + ord + ", identity error " +
         num(levels.back()["inverse_identity_error"].get<double>());
}

// ---------------------------------------------------------------- operators-check

std::string cmd_operators_check(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "grid", "spec"}, "operators-check config");
  const SpaceTimeGrid g = parse_grid(require<json>(c, "grid", "operators-check config"));
  const auto spec = parse_spec(c);
  const TransformCoefficients co = spec ? assemble_coefficients(*spec, g.kappa, g) : zero_coefficients(g);
  const PerturbationOperators ops(co);
  const PerturbationOperators flat(zero_coefficients(g));
  const std::uint64_t s = ctx.seed;
  const RealField w1 = random_modes(g, 3, s + 1, true), w2 = random_modes(g, 3, s + 2, true);
  const RealField q1 = random_modes(g, 1, s + 3, false), q2 = random_modes(g, 1, s + 4, false);
  const double a = 1.7, b = -0.6;

  ctx.log("linearity of L");
  RealField wc = w1, qc = q1;
  wc *= a;
  qc *= a;
  RealField t = w2, tq = q2;
  t *= b;
  tq *= b;
  wc += t;
  qc += tq;
  RealField lin = ops.apply_L(w1, q1);
  lin *= a;
  RealField l2 = ops.apply_L(w2, q2);
  l2 *= b;
  lin += l2;
  const RealField lc = ops.apply_L(wc, qc);
  const double scale = std::max(lc.max_abs(), 1e-300);
  RealField d = lc;
  d -= lin;
  const double lin_err = d.max_abs() / scale;

  ctx.log("homogeneity of N");
  RealField w3 = w1;
  w3 *= -2.5;
  RealField n3 = flat.apply_N(w3), n1 = flat.apply_N(w1);
  n1 *= 6.25;
  n3 -= n1;
  const double hom_err = n3.max_abs() / std::max(n1.max_abs(), 1e-300);

  ctx.log("divergence identities");
  const NonlinearSplit sp = split_nonlinearity(w1);
  const LParts parts = ops.apply_L_parts(w1, q1);
  ojson pj;
  for (const auto& [name, f] : parts.parts) pj[name] = f.max_abs();

  ojson out;
  out["grid"] = grid_json(g);
  out["spec"] = spec ? spec->to_json() : ojson(nullptr);
  out["seed"] = ctx.seed;
  out["L_linearity_error"] = lin_err;
  out["N_homogeneity_error"] = hom_err;
  out["split"] = sp.to_json();
  out["L_parts_max"] = pj;
  out["L_support_radius"] = spec ? ops.support_radius(spec->support_radius()) : 0.0;
  ctx.write_json("operators_check.json", out);
  return "operators-check: L linearity " + num(lin_err) + ", N homogeneity " + num(hom_err) + ", div identity " +
         num(std::max(sp.identity_error_S, sp.identity_error_perp));
}

// ---------------------------------------------------------------- picard / sweep

PicardConfig picard_block(const json& c) {
  return c.contains("picard") ? PicardConfig::from_json(c.at("picard")) : PicardConfig{};
}

std::string cmd_picard(Context& ctx, int& code) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "grid", "spec", "forcing", "picard", "write_fields"},
             "picard config");
  const SpaceTimeGrid g = parse_grid(require<json>(c, "grid", "picard config"));
  const auto spec = parse_spec(c);
  PicardConfig pc = picard_block(c);
  if (pc.norm_flavor != NormFlavor::stokes_I0 && g.kappa == 0.0)
    throw ValidationError("norm_flavor " + to_string(pc.norm_flavor) + " needs grid.kappa != 0");
  const json fj = get<json>(c, "forcing", json::object());
  check_keys(fj, {"shape", "data_norm"}, "forcing");
  if (get<std::string>(fj, "shape", "localized") != "localized")
    throw ValidationError("forcing.shape must be 'localized'");
  const double target = get(fj, "data_norm", 1e-3);
  if (!(target >= 0.0)) throw ValidationError("forcing.data_norm must be >= 0");
  RealField f = localized_forcing(g);
  f *= target / data_norm(f, pc.norm_flavor, pc.norm).total;
  ctx.log("iterating");
  const PicardResult r = picard_iterate(f, spec, pc);
  ctx.write("picard_trace.csv", r.trace.to_csv());
  ojson out;
  out["grid"] = grid_json(g);
  out["spec"] = spec ? spec->to_json() : ojson(nullptr);
  out["picard"] = pc.to_json();
  out["trace"] = r.trace.to_json();
  if (std::isfinite(r.trace.steps.back().composite_norm))
    out["solution_norm"] = composite_norm(r.state.velocity, r.state.pressure, pc.norm_flavor, pc.norm).to_json();
  ctx.write_json("picard_summary.json", out);
  if (get(c, "write_fields", false)) {
    ctx.write_field("velocity.tpf", r.state.velocity);
    ctx.write_field("pressure.tpf", r.state.pressure);
  }
  if (!r.trace.converged) code = exit_numerical;
  return "picard: " + r.trace.message + ", max q " + num(r.trace.max_q()) + ", residual " +
         num(r.trace.final_residual);
}

std::string cmd_sweep(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "grid", "spec", "flavor", "kappas", "eps", "picard"},
             "sweep config");
  const SpaceTimeGrid g = parse_grid(require<json>(c, "grid", "sweep config"));
  const auto spec = parse_spec(c);
  PicardConfig pc = picard_block(c);
  const NormFlavor fl = parse_norm_flavor(get<std::string>(c, "flavor", to_string(pc.norm_flavor)));
  pc.norm_flavor = fl;
  pc.norm.validate(fl);
  const auto kappas = require<std::vector<double>>(c, "kappas", "sweep config");
  const auto epss = require<std::vector<double>>(c, "eps", "sweep config");
  ctx.log("sweeping " + std::to_string(kappas.size() * epss.size()) + " cases");
  const SweepTable t = smallness_sweep(fl, kappas, epss, spec, g, pc);
  ctx.write("sweep.csv", t.to_csv());
  ctx.write_json("sweep.json", t.to_json());
  int conv = 0;
  for (const auto& r : t.rows) conv += r.converged;
  return "sweep: " + std::to_string(conv) + "/" + std::to_string(t.rows.size()) + " cases converged";
}

// ---------------------------------------------------------------- symbol-bounds

std::string cmd_symbol_bounds(Context& ctx) {
  const json& c = ctx.cfg;
  check_keys(c, {"schema_version", "command", "seed", "sector", "mu", "kappa_max", "n_kappa", "samples",
                 "n_directions", "radius_factor", "xi_min", "xi_max"},
             "symbol-bounds config");
  SectorBoundsConfig b;
  if (c.contains("sector")) {
    const json& s = c.at("sector");
    check_keys(s, {"epsilon", "delta"}, "sector");
    b.sector.epsilon = get(s, "epsilon", b.sector.epsilon);
    b.sector.delta = get(s, "delta", b.sector.delta);
  }
  b.mu = get(c, "mu", b.mu);
  b.kappa_max = get(c, "kappa_max", b.kappa_max);
  b.n_kappa = get(c, "n_kappa", b.n_kappa);
  b.samples = get(c, "samples", b.samples);
  b.n_directions = get(c, "n_directions", b.n_directions);
  b.radius_factor = get(c, "radius_factor", b.radius_factor);
  b.xi_min = get(c, "xi_min", b.xi_min);
  b.xi_max = get(c, "xi_max", b.xi_max);
  b.validate();
  ctx.log("sampling the sector");
  const SectorBoundsReport r = sector_sup_bounds(b);
  ctx.write_json("symbol_bounds.json", r.to_json());
  return "symbol-bounds: sup s0 " + num(r.sup_s0) + ", sup s2 " + num(r.sup_s2) + " over " +
         std::to_string(r.n_samples) + " samples";
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file '" + path + "' must hold a JSON object");
  if (j.contains("schema_version") && j.at("schema_version") != 1)
    throw ValidationError("unsupported schema_version in '" + path + "' (expected 1)");
  return j;
}

}  // namespace

std::string config_command(const std::string& config_path) {
  const json j = load_config(config_path);
  return j.contains("command") ? j.at("command").get<std::string>() : "";
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Time-periodic flow past an oscillating body: spectral workflows", "tpflow"};
  app.require_subcommand(1);
  struct Opts {
    std::string config;
    std::string out = "out";
    int threads = 0;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
  } o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve-linear", "linear time-periodic Oseen solve of a manufactured case"},
      {"fundsol", "oscillatory kernel samples, steady Oseen wake, or mu/Phi bounds"},
      {"decay-fit", "log-log decay slopes of the oscillatory kernel under box refinement"},
      {"transform-check", "coefficient assembly, identity, chain-rule and divergence checks"},
      {"operators-check", "linearity, homogeneity and divergence identities of L and N"},
      {"picard", "fixed-point iteration of the nonlinear problem"},
      {"sweep", "smallness sweep over kappa and eps"},
      {"symbol-bounds", "sector sup bounds of the resolvent symbol"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config file")->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", o.seed, "RNG seed, overrides the config's 'seed'");
    sub->add_flag("--verbose", o.verbose, "progress on stderr");
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_validation;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const unsigned hw = std::thread::hardware_concurrency();
    set_thread_count(o.threads > 0 ? o.threads : static_cast<int>(hw > 0 ? hw : 1));
    Context ctx;
    ctx.cfg = load_config(o.config);
    if (ctx.cfg.contains("command") && ctx.cfg.at("command") != cmd)
      throw ValidationError("config '" + o.config + "' is for '" + ctx.cfg.at("command").get<std::string>() +
                            "', not '" + cmd + "'");
    ctx.out = o.out;
    ctx.verbose = o.verbose;
    ctx.seed = o.seed ? *o.seed : get<std::uint64_t>(ctx.cfg, "seed", 0);
    int code = exit_ok;
    std::string summary;
    if (cmd == "solve-linear") summary = cmd_solve_linear(ctx);
    else if (cmd == "fundsol") summary = cmd_fundsol(ctx);
    else if (cmd == "decay-fit") summary = cmd_decay_fit(ctx);
    else if (cmd == "transform-check") summary = cmd_transform_check(ctx);
    else if (cmd == "operators-check") summary = cmd_operators_check(ctx);
    else if (cmd == "picard") summary = cmd_picard(ctx, code);
    else if (cmd == "sweep") summary = cmd_sweep(ctx);
    else summary = cmd_symbol_bounds(ctx);
    std::cout << summary << " -> " << ctx.out.string() << '\n';
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "tpflow " << cmd << ": validation error: " << e.what() << '\n';
    return exit_validation;
  } catch (const NumericalError& e) {
    std::cerr << "tpflow " << cmd << ": numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tpflow " << cmd << ": " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "tpflow " << cmd << ": " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace tpflow::cli
