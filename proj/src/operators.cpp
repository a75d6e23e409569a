#include "tpflow/operators.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fourier.hpp"
#include "tpflow/parallel.hpp"
#include "tpflow/solver.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace tpflow {

namespace {

constexpr std::array<std::array<int, 2>, 6> kPairs = {{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

std::array<int, 3> order_of(int l, int m) {
  std::array<int, 3> o{0, 0, 0};
  ++o[l];
  ++o[m];
  return o;
}

// Periodic fourth-order centered differences along one axis, all components and layers.
RealField fd_first(const RealField& f, int axis) {
  const SpaceTimeGrid& g = f.grid();
  const int n = g.n_space;
  const double s = 1.0 / (12.0 * g.spacing());
  RealField out(g, f.components(), f.layers());
  for (int c = 0; c < f.components(); ++c)
    for (int m = 0; m < f.layers(); ++m)
      parallel_for(0, g.n_points(), [&](std::size_t p) {
        std::array<int, 3> i = {static_cast<int>(p / (static_cast<std::size_t>(n) * n)),
                                static_cast<int>((p / n) % n), static_cast<int>(p % n)};
        auto at = [&](int d) {
          std::array<int, 3> k = i;
          k[axis] = (k[axis] + d + n) % n;
          return f(c, m, g.flat(k[0], k[1], k[2]));
        };
        out(c, m, p) = s * (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2));
      });
  return out;
}

RealField fd_second(const RealField& f, int axis) {
  const SpaceTimeGrid& g = f.grid();
  const int n = g.n_space;
  const double s = 1.0 / (12.0 * g.spacing() * g.spacing());
  RealField out(g, f.components(), f.layers());
  for (int c = 0; c < f.components(); ++c)
    for (int m = 0; m < f.layers(); ++m)
      parallel_for(0, g.n_points(), [&](std::size_t p) {
        std::array<int, 3> i = {static_cast<int>(p / (static_cast<std::size_t>(n) * n)),
                                static_cast<int>((p / n) % n), static_cast<int>(p % n)};
        auto at = [&](int d) {
          std::array<int, 3> k = i;
          k[axis] = (k[axis] + d + n) % n;
          return f(c, m, g.flat(k[0], k[1], k[2]));
        };
        out(c, m, p) = s * (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2));
      });
  return out;
}

void put(RealField& dst, int offset, const RealField& src) {
  for (int c = 0; c < src.components(); ++c) {
    auto from = src.component(c);
    auto to = dst.component(offset + c);
    std::copy(from.begin(), from.end(), to.begin());
  }
}

Mat3 mat_at(const RealField& f, int base, int m, std::size_t p) {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = f(base + 3 * i + j, m, p);
  return out;
}

Vec3 vec_at(const RealField& f, int base, int m, std::size_t p) {
  return {f(base, m, p), f(base + 1, m, p), f(base + 2, m, p)};
}

void set_vec(RealField& f, int m, std::size_t p, const Vec3& v) {
  for (int i = 0; i < 3; ++i) f(i, m, p) = v(i);
}

// Spectral derivatives of a 3-vector field.
struct VelocityDerivatives {
  RealField grad;  // 3 i + l = d_l w_i
  RealField hess;  // 3 pair + i
  RealField dt;    // empty for steady input
};

VelocityDerivatives velocity_derivatives(const RealField& w, bool with_hessian) {
  VelocityDerivatives d;
  const SpectralField W = forward_transform(w);
  d.grad = inverse_transform(gradient(W));
  if (with_hessian) {
    d.hess = RealField(w.grid(), 18, w.layers());
    for (int p = 0; p < 6; ++p) put(d.hess, 3 * p, inverse_transform(partial(W, order_of(kPairs[p][0], kPairs[p][1]))));
  }
  if (!w.is_steady()) d.dt = inverse_transform(time_derivative(W));
  return d;
}

RealField convective(const RealField& a, const RealField& b) {
  if (a.layers() != b.layers() || !a.grid().same_shape(b.grid()))
    throw ValidationError("convective term: field shape mismatch");
  const RealField gb = inverse_transform(gradient(forward_transform(b)));
  RealField out(b.grid(), 3, b.layers());
  for (int m = 0; m < b.layers(); ++m)
    parallel_for(0, b.grid().n_points(), [&](std::size_t p) {
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += a(l, m, p) * gb(3 * i + l, m, p);
        out(i, m, p) = s;
      }
    });
  return out;
}

RealField outer(const RealField& a, const RealField& b) {
  RealField out(b.grid(), 9, b.layers());
  for (int m = 0; m < b.layers(); ++m)
    parallel_for(0, b.grid().n_points(), [&](std::size_t p) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(3 * i + j, m, p) = a(i, m, p) * b(j, m, p);
    });
  return out;
}

SpectralField row_divergence(const SpectralField& t) {
  SpectralField out(t.grid(), 3, t.layers());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::array<int, 3> o{0, 0, 0};
      o[j] = 1;
      const SpectralField d = partial(component_of(t, 3 * i + j), o);
      auto src = d.component(0);
      auto dst = out.component(i);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  return out;
}

// ||P(div T) - P(N)|| / ||P(N)|| with P the 2/3 truncation.
double identity_error(const RealField& t, const RealField& n) {
  SpectralField lhs = row_divergence(forward_transform(t));
  SpectralField rhs = forward_transform(n);
  apply_dealias_mask(lhs);
  apply_dealias_mask(rhs);
  const double scale = spectral_l2(rhs);
  lhs -= rhs;
  const double d = spectral_l2(lhs);
  return scale > 0.0 ? d / scale : d;
}

}  // namespace

RealField LParts::total() const {
  if (parts.empty()) throw ValidationError("empty operator split");
  RealField out = parts.front().second;
  for (std::size_t i = 1; i < parts.size(); ++i) out += parts[i].second;
  return out;
}

const RealField& LParts::get(const std::string& name) const {
  for (const auto& [k, v] : parts)
    if (k == name) return v;
  throw ValidationError("unknown operator part '" + name + "'");
}

PerturbationOperators::PerturbationOperators(TransformCoefficients coeffs) : c_(std::move(coeffs)) {
  const SpaceTimeGrid& g = c_.grid;
  mu_ = g.viscosity;
  kappa_ = g.kappa;
  if (c_.trivial) return;
  if (std::abs(c_.kappa - g.kappa) > 1e-12 * (1.0 + std::abs(g.kappa)))
    throw ValidationError("coefficients were assembled for kappa " + std::to_string(c_.kappa) +
                          " but the grid has kappa " + std::to_string(g.kappa));
  const int layers = c_.A.layers();
  dB_ = RealField(g, 27, layers);
  dA_ = RealField(g, 27, layers);
  d2B_ = RealField(g, 54, layers);
  for (int l = 0; l < 3; ++l) {
    put(dB_, 9 * l, fd_first(c_.Bm1, l));
    put(dA_, 9 * l, fd_first(c_.A, l));
  }
  for (int p = 0; p < 6; ++p) {
    const int l = kPairs[p][0], m = kPairs[p][1];
    put(d2B_, 9 * p, l == m ? fd_second(c_.Bm1, l) : fd_first(fd_first(c_.Bm1, l), m));
  }
  first_ = RealField(g, 3, layers);
  second_ = RealField(g, 6, layers);
  for (int t = 0; t < layers; ++t)
    parallel_for(0, g.n_points(), [&](std::size_t p) {
      const Mat3 A = mat_at(c_.A, 0, t, p);
      std::array<Mat3, 3> dA;
      for (int l = 0; l < 3; ++l) dA[l] = mat_at(dA_, 9 * l, t, p);
      for (int m = 0; m < 3; ++m) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) {
          s += dA[l](m, l);
          for (int j = 0; j < 3; ++j) s += A(l, j) * dA[l](m, j);
        }
        first_(m, t, p) = s;
      }
      const Mat3 S = A + A.transpose() + A * A.transpose();
      for (int q = 0; q < 6; ++q) {
        const int l = kPairs[q][0], m = kPairs[q][1];
        second_(q, t, p) = (l == m ? 1.0 : 2.0) * S(l, m);
      }
    });
}

double PerturbationOperators::support_radius(double body_support) const {
  return body_support + 2.0 * std::sqrt(3.0) * c_.grid.spacing();
}

void PerturbationOperators::check_input(const RealField& w, const RealField* q) const {
  if (w.components() != 3) throw ValidationError("velocity must have 3 components");
  if (!w.grid().same_shape(c_.grid)) throw ValidationError("velocity grid does not match the coefficient grid");
  if (!c_.trivial && w.layers() != c_.A.layers())
    throw ValidationError("velocity needs every time layer when coefficients are present");
  if (q) {
    if (q->components() != 1) throw ValidationError("pressure must have 1 component");
    if (q->layers() != w.layers() || !q->grid().same_shape(w.grid()))
      throw ValidationError("pressure shape does not match velocity");
  }
}

LParts PerturbationOperators::apply_L_parts(const RealField& w, const RealField& q) const {
  check_input(w, &q);
  static const char* names[] = {"time_derivative", "a0_advection",  "laplacian_B", "second_order_a",
                                "first_order_a",   "kappa",         "pressure"};
  LParts out;
  for (const char* n : names) out.parts.emplace_back(n, RealField(w.grid(), 3, w.layers()));
  if (c_.trivial) return out;

  const VelocityDerivatives d = velocity_derivatives(w, true);
  const RealField gq = inverse_transform(gradient(forward_transform(q)));
  const SpaceTimeGrid& g = w.grid();
  std::array<RealField*, 7> part;
  for (int i = 0; i < 7; ++i) part[i] = &out.parts[i].second;

  for (int t = 0; t < w.layers(); ++t)
    parallel_for(0, g.n_points(), [&](std::size_t p) {
      const Mat3 B = mat_at(c_.Bm1, 0, t, p);
      const Mat3 A = mat_at(c_.A, 0, t, p);
      const Vec3 wv = vec_at(w, 0, t, p);
      const Mat3 G = mat_at(d.grad, 0, t, p);  // G(i, l) = d_l w_i
      std::array<Mat3, 3> dB;
      for (int l = 0; l < 3; ++l) dB[l] = mat_at(dB_, 9 * l, t, p);

      std::array<Vec3, 3> dBw, dV;
      for (int l = 0; l < 3; ++l) {
        dBw[l] = dB[l] * wv + B * G.col(l);
        dV[l] = G.col(l) + dBw[l];
      }
      std::array<Vec3, 6> d2V;
      Vec3 lapBw = Vec3::Zero();
      for (int k = 0; k < 6; ++k) {
        const int l = kPairs[k][0], m = kPairs[k][1];
        const Mat3 d2B = mat_at(d2B_, 9 * k, t, p);
        const Vec3 H = vec_at(d.hess, 3 * k, t, p);
        const Vec3 d2Bw = d2B * wv + dB[l] * G.col(m) + dB[m] * G.col(l) + B * H;
        if (l == m) lapBw += d2Bw;
        d2V[k] = H + d2Bw;
      }

      Vec3 dtBw = mat_at(c_.dtBm1, 0, t, p) * wv;
      if (!w.is_steady()) dtBw += B * vec_at(d.dt, 0, t, p);
      const Vec3 a0 = vec_at(c_.a0, 0, t, p);
      Vec3 adv = Vec3::Zero(), second = Vec3::Zero(), first = Vec3::Zero();
      for (int l = 0; l < 3; ++l) {
        adv += a0(l) * dV[l];
        first += first_(l, t, p) * dV[l];
      }
      for (int k = 0; k < 6; ++k) second += second_(k, t, p) * d2V[k];
      const Vec3 gqv = vec_at(gq, 0, t, p);

      set_vec(*part[0], t, p, -dtBw);
      set_vec(*part[1], t, p, -adv);
      set_vec(*part[2], t, p, mu_ * lapBw);
      set_vec(*part[3], t, p, mu_ * second);
      set_vec(*part[4], t, p, mu_ * first);
      set_vec(*part[5], t, p, kappa_ * dBw[0]);
      set_vec(*part[6], t, p, -(A.transpose() * gqv));
    });
  return out;
}

RealField PerturbationOperators::apply_L(const RealField& w, const RealField& q) const {
  return apply_L_parts(w, q).total();
}

RealField PerturbationOperators::grad_V(const RealField& w, const RealField& grad_w) const {
  RealField out = grad_w;
  if (c_.trivial) return out;
  for (int t = 0; t < w.layers(); ++t)
    parallel_for(0, w.grid().n_points(), [&](std::size_t p) {
      const Mat3 B = mat_at(c_.Bm1, 0, t, p);
      const Vec3 wv = vec_at(w, 0, t, p);
      const Mat3 G = mat_at(grad_w, 0, t, p);
      for (int l = 0; l < 3; ++l) {
        const Vec3 dv = G.col(l) + (mat_at(dB_, 9 * l, t, p) * wv + B * G.col(l));
        for (int i = 0; i < 3; ++i) out(3 * i + l, t, p) = dv(i);
      }
    });
  return out;
}

RealField PerturbationOperators::apply_N(const RealField& w) const {
  check_input(w, nullptr);
  const RealField gw = inverse_transform(gradient(forward_transform(w)));
  const RealField gV = grad_V(w, gw);
  RealField out(w.grid(), 3, w.layers());
  for (int t = 0; t < w.layers(); ++t)
    parallel_for(0, w.grid().n_points(), [&](std::size_t p) {
      Vec3 V = vec_at(w, 0, t, p);
      if (!c_.trivial) {
        V = V + mat_at(c_.Bm1, 0, t, p) * V;
        V = V + mat_at(c_.A, 0, t, p) * V;
      }
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += V(l) * gV(3 * i + l, t, p);
        out(i, t, p) = s;
      }
    });
  return out;
}

OperatorSplit PerturbationOperators::split(const RealField& w, const RealField& q) const {
  OperatorSplit s;
  s.N1 = advective_term(w);
  s.N1_tilde = tensor_square(w);
  s.N2 = apply_N(w);
  s.N2 -= s.N1;
  s.L_parts = apply_L_parts(w, q);
  return s;
}

RealField apply_L(const RealField& w, const RealField& q, const TransformCoefficients& coeffs) {
  return PerturbationOperators(coeffs).apply_L(w, q);
}

RealField apply_N(const RealField& w, const TransformCoefficients& coeffs) {
  return PerturbationOperators(coeffs).apply_N(w);
}

RealField advective_term(const RealField& v) {
  if (v.components() != 3) throw ValidationError("velocity must have 3 components");
  return convective(v, v);
}

RealField tensor_square(const RealField& v) {
  if (v.components() != 3) throw ValidationError("velocity must have 3 components");
  return outer(v, v);
}

RealField tensor_divergence(const RealField& t) {
  if (t.components() != 9) throw ValidationError("tensor must have 9 components");
  return inverse_transform(row_divergence(forward_transform(t)));
}

nlohmann::ordered_json NonlinearSplit::to_json() const {
  nlohmann::ordered_json j;
  j["input_divergence"] = input_divergence;
  j["identity_error_S"] = identity_error_S;
  j["identity_error_perp"] = identity_error_perp;
  j["N1_S_max"] = N1_S.max_abs();
  j["N1_perp_max"] = N1_perp.max_abs();
  j["tildeN1_S_max"] = tildeN1_S.max_abs();
  j["tildeN1_perp_max"] = tildeN1_perp.max_abs();
  return j;
}

NonlinearSplit split_nonlinearity(const RealField& v, double div_tol) {
  if (v.components() != 3) throw ValidationError("velocity must have 3 components");
  SpectralField V = forward_transform(v);
  NonlinearSplit out;
  out.input_divergence = relative_divergence(V);
  if (out.input_divergence > div_tol) {
    std::ostringstream msg;
    msg << "split_nonlinearity needs a divergence-free field: ||div v|| / ||v|| = " << out.input_divergence
        << " > " << div_tol;
    throw ValidationError(msg.str());
  }
  apply_dealias_mask(V);
  const RealField vt = inverse_transform(V);
  const RealField vS = project_steady(vt);

  out.N1_S = convective(vS, vS);
  out.tildeN1_S = outer(vS, vS);
  if (vt.is_steady()) {
    out.N1_perp = RealField(vt.grid(), 3, 1);
    out.tildeN1_perp = RealField(vt.grid(), 9, 1);
  } else {
    const RealField vP = project_oscillatory(vt);
    const RealField vSb = broadcast_steady(vS);
    const RealField pp = convective(vP, vP);
    const RealField tpp = outer(vP, vP);
    out.N1_S += project_steady(pp);
    out.tildeN1_S += project_steady(tpp);
    out.N1_perp = convective(vSb, vP);
    out.N1_perp += convective(vP, vSb);
    out.N1_perp += project_oscillatory(pp);
    out.tildeN1_perp = outer(vSb, vP);
    out.tildeN1_perp += outer(vP, vSb);
    out.tildeN1_perp += project_oscillatory(tpp);
  }
  out.identity_error_S = identity_error(out.tildeN1_S, out.N1_S);
  out.identity_error_perp = identity_error(out.tildeN1_perp, out.N1_perp);
  return out;
}

}  // namespace tpflow
