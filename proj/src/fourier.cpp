#include "tpflow/fourier.hpp"

#include "tpflow/errors.hpp"
#include "tpflow/fft_plan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tpflow {

namespace {

std::vector<int> transform_dims(const SpaceTimeGrid& g, int layers) {
  const int n = g.n_space;
  if (layers == 1) return {n, n, n};
  return {layers, n, n, n};
}

// (-1)^(j1+j2+j3) for the spatial storage index; accounts for the grid origin at -L.
inline double origin_phase(const SpaceTimeGrid& g, std::size_t flat) {
  const std::size_t n = static_cast<std::size_t>(g.n_space);
  const std::size_t i3 = flat % n, i2 = (flat / n) % n, i1 = flat / (n * n);
  return ((i1 + i2 + i3) & 1u) ? -1.0 : 1.0;
}

struct AxisMultipliers {
  std::vector<cplx> m1, m2, m3;
};

AxisMultipliers axis_multipliers(const SpaceTimeGrid& g, std::array<int, 3> order) {
  const int n = g.n_space;
  AxisMultipliers am;
  std::vector<cplx>* out[3] = {&am.m1, &am.m2, &am.m3};
  for (int a = 0; a < 3; ++a) {
    out[a]->resize(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
      if (order[a] == 0) {
        (*out[a])[idx] = 1.0;
      } else if (g.is_nyquist(idx)) {
        (*out[a])[idx] = 0.0;
      } else {
        (*out[a])[idx] = std::pow(cplx(0.0, g.wavenumber(g.space_mode(idx))), order[a]);
      }
    }
  }
  return am;
}

}  // namespace

SpectralField forward_transform(const RealField& u) {
  u.grid().validate();
  u.require_finite("forward_transform");
  const SpaceTimeGrid& g = u.grid();
  if (!(u.is_steady() || u.layers() == g.n_time()))
    throw ValidationError("forward_transform: layer count does not match grid");
  SpectralField s(g, u.components(), u.layers());
  const auto dims = transform_dims(g, u.layers());
  const double h = g.spacing();
  const double scale = std::pow(h / (2.0 * pi), 3) / u.layers();
  const std::size_t ls = g.n_points();
  for (int c = 0; c < u.components(); ++c) {
    auto src = u.component(c);
    auto dst = s.component(c);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    execute_fft(dims, dst.data(), FftDirection::forward);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= scale * origin_phase(g, i % ls);
  }
  return s;
}

RealField inverse_transform(const SpectralField& s, double symmetry_tol) {
  const SpaceTimeGrid& g = s.grid();
  RealField u(g, s.components(), s.layers());
  const auto dims = transform_dims(g, s.layers());
  const double dxi3 = std::pow(g.wavenumber_spacing(), 3);
  const std::size_t ls = g.n_points();
  std::vector<cplx> buf;
  // The imaginary part is judged against the largest real part over all
  // components: a component that vanishes analytically carries roundoff only.
  double max_re = 0.0, max_im = 0.0;
  int worst = 0;
  for (int c = 0; c < s.components(); ++c) {
    auto src = s.component(c);
    buf.assign(src.begin(), src.end());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= dxi3 * origin_phase(g, i % ls);
    execute_fft(dims, buf.data(), FftDirection::backward);
    auto dst = u.component(c);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      dst[i] = buf[i].real();
      max_re = std::max(max_re, std::abs(buf[i].real()));
      if (std::abs(buf[i].imag()) > max_im) {
        max_im = std::abs(buf[i].imag());
        worst = c;
      }
    }
  }
  if (max_im > symmetry_tol * std::max(max_re, 1e-300) && max_im > 1e-300)
    throw ValidationError("inverse_transform: conjugate symmetry violated (component " + std::to_string(worst) +
                          ", relative imaginary part " + std::to_string(max_im / std::max(max_re, 1e-300)) + ")");
  return u;
}

RealField project_steady(const RealField& f) {
  if (f.is_steady()) return f;
  RealField out = RealField::steady(f.grid(), f.components());
  const std::size_t ls = f.layer_size();
  // Summing layers in fixed order keeps results reproducible.
  for (int c = 0; c < f.components(); ++c) {
    auto dst = out.layer(c, 0);
    for (int m = 0; m < f.layers(); ++m) {
      auto src = f.layer(c, m);
      for (std::size_t i = 0; i < ls; ++i) dst[i] += src[i];
    }
    for (double& v : dst) v /= f.layers();
  }
  return out;
}

RealField project_oscillatory(const RealField& f) {
  if (f.is_steady()) return RealField::space_time(f.grid(), f.components());
  RealField out = f;
  const RealField s = project_steady(f);
  for (int c = 0; c < f.components(); ++c) {
    auto mean = s.layer(c, 0);
    for (int m = 0; m < f.layers(); ++m) {
      auto dst = out.layer(c, m);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= mean[i];
    }
  }
  return out;
}

RealField broadcast_steady(const RealField& steady) {
  if (!steady.is_steady()) throw ValidationError("broadcast_steady expects a steady field");
  RealField out = RealField::space_time(steady.grid(), steady.components());
  for (int c = 0; c < steady.components(); ++c) {
    auto src = steady.layer(c, 0);
    for (int m = 0; m < out.layers(); ++m) std::ranges::copy(src, out.layer(c, m).begin());
  }
  return out;
}

SpectralField partial(const SpectralField& s, std::array<int, 3> order) {
  const SpaceTimeGrid& g = s.grid();
  const auto am = axis_multipliers(g, order);
  const int n = g.n_space;
  SpectralField out(g, s.components(), s.layers());
  for (int c = 0; c < s.components(); ++c)
    for (int kidx = 0; kidx < s.layers(); ++kidx) {
      auto src = s.layer(c, kidx);
      auto dst = out.layer(c, kidx);
      std::size_t i = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const cplx ab = am.m1[a] * am.m2[b];
          for (int d = 0; d < n; ++d, ++i) dst[i] = src[i] * ab * am.m3[d];
        }
    }
  return out;
}

SpectralField time_derivative(const SpectralField& s) {
  SpectralField out = s;
  for (int c = 0; c < s.components(); ++c)
    for (int kidx = 0; kidx < s.layers(); ++kidx) {
      const cplx m(0.0, s.grid().omega() * s.mode_of_layer(kidx));
      for (cplx& v : out.layer(c, kidx)) v *= m;
    }
  return out;
}

SpectralField laplacian(const SpectralField& s) {
  SpectralField out = partial(s, {2, 0, 0});
  out += partial(s, {0, 2, 0});
  out += partial(s, {0, 0, 2});
  return out;
}

SpectralField divergence(const SpectralField& v) {
  if (v.components() != 3) throw ValidationError("divergence expects a 3-vector field");
  SpectralField out(v.grid(), 1, v.layers());
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> o{0, 0, 0};
    o[a] = 1;
    const SpectralField d = partial(component_of(v, a), o);
    out += d;
  }
  return out;
}

SpectralField gradient(const SpectralField& s) {
  const int nc = s.components();
  if (nc != 1 && nc != 3) throw ValidationError("gradient expects a scalar or 3-vector field");
  SpectralField out(s.grid(), 3 * nc, s.layers());
  for (int j = 0; j < 3; ++j) {
    std::array<int, 3> o{0, 0, 0};
    o[j] = 1;
    const SpectralField d = partial(s, o);
    for (int i = 0; i < nc; ++i) {
      auto src = d.component(i);
      std::ranges::copy(src, out.component(3 * i + j).begin());
    }
  }
  return out;
}

SpectralField curl(const SpectralField& v) {
  if (v.components() != 3) throw ValidationError("curl expects a 3-vector field");
  const SpectralField gv = gradient(v);  // 3*i + j : d_j v_i
  SpectralField out(v.grid(), 3, v.layers());
  auto set = [&](int c, int i1, int j1, int i2, int j2) {
    auto a = gv.component(3 * i1 + j1);
    auto b = gv.component(3 * i2 + j2);
    auto d = out.component(c);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  };
  set(0, 2, 1, 1, 2);  // d2 v3 - d3 v2
  set(1, 0, 2, 2, 0);  // d3 v1 - d1 v3
  set(2, 1, 0, 0, 1);  // d1 v2 - d2 v1
  return out;
}

void apply_dealias_mask(SpectralField& s) {
  const SpaceTimeGrid& g = s.grid();
  const int n = g.n_space, kc = g.dealias_cutoff();
  std::vector<char> keep(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) keep[idx] = std::abs(g.space_mode(idx)) <= kc;
  for (int c = 0; c < s.components(); ++c)
    for (int kidx = 0; kidx < s.layers(); ++kidx) {
      auto d = s.layer(c, kidx);
      std::size_t i = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int e = 0; e < n; ++e, ++i)
            if (!(keep[a] && keep[b] && keep[e])) d[i] = 0.0;
    }
}

void zero_nyquist(SpectralField& s) {
  const SpaceTimeGrid& g = s.grid();
  const int n = g.n_space;
  for (int c = 0; c < s.components(); ++c)
    for (int kidx = 0; kidx < s.layers(); ++kidx) {
      auto d = s.layer(c, kidx);
      std::size_t i = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int e = 0; e < n; ++e, ++i)
            if (g.is_nyquist(a) || g.is_nyquist(b) || g.is_nyquist(e)) d[i] = 0.0;
    }
}

double spectral_l2(const SpectralField& s) {
  double sum = 0.0;
  for (const cplx& v : s.values()) sum += std::norm(v);
  const double dxi = s.grid().wavenumber_spacing();
  return std::sqrt(sum * std::pow(2.0 * pi * dxi, 3));
}

RealField derivative(const RealField& u, std::array<int, 3> order) {
  return inverse_transform(partial(forward_transform(u), order));
}

RealField resample_time(const RealField& f, int samples) {
  if (samples < 1) throw ValidationError("resample_time: samples must be >= 1");
  if (f.is_steady()) {
    RealField out(f.grid(), f.components(), samples);
    for (int c = 0; c < f.components(); ++c)
      for (int m = 0; m < samples; ++m) std::ranges::copy(f.layer(c, 0), out.layer(c, m).begin());
    return out;
  }
  const int nt = f.layers();
  if (nt % 2 == 0) throw ValidationError("resample_time expects an odd number of time layers");
  const int modes = (nt - 1) / 2;
  // Interpolation weights W[s][m]: value at t_s from samples at t_m (Dirichlet kernel).
  std::vector<double> w(static_cast<std::size_t>(samples) * nt);
  for (int s = 0; s < samples; ++s) {
    const double ts = static_cast<double>(s) / samples;
    for (int m = 0; m < nt; ++m) {
      const double tm = static_cast<double>(m) / nt;
      double acc = 1.0;
      for (int k = 1; k <= modes; ++k) acc += 2.0 * std::cos(2.0 * pi * k * (ts - tm));
      w[static_cast<std::size_t>(s) * nt + m] = acc / nt;
    }
  }
  RealField out(f.grid(), f.components(), samples);
  const std::size_t ls = f.layer_size();
  for (int c = 0; c < f.components(); ++c)
    for (int s = 0; s < samples; ++s) {
      auto dst = out.layer(c, s);
      for (int m = 0; m < nt; ++m) {
        const double wm = w[static_cast<std::size_t>(s) * nt + m];
        auto src = f.layer(c, m);
        for (std::size_t i = 0; i < ls; ++i) dst[i] += wm * src[i];
      }
    }
  return out;
}

RealField component_of(const RealField& f, int c) {
  RealField out(f.grid(), 1, f.layers());
  std::ranges::copy(f.component(c), out.component(0).begin());
  return out;
}

SpectralField component_of(const SpectralField& f, int c) {
  SpectralField out(f.grid(), 1, f.layers());
  std::ranges::copy(f.component(c), out.component(0).begin());
  return out;
}

}  // namespace tpflow
