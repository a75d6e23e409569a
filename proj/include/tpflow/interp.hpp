#pragma once

#include "tpflow/field.hpp"

#include <cmath>

namespace tpflow {

/// Periodic tricubic Lagrange interpolation of one N^3 block (FFT-free,
/// row-major [i1][i2][i3]) at physical position x.
template <typename T>
T interpolate_tricubic(const T* block, const SpaceTimeGrid& g, const Vec3& x) {
  const int n = g.n_space;
  const double h = g.spacing();
  int base[3];
  double w[3][4];
  for (int a = 0; a < 3; ++a) {
    const double s = (x(a) + g.box_half_length) / h;
    const double fl = std::floor(s);
    const double u = s - fl;
    base[a] = static_cast<int>(fl) - 1;
    w[a][0] = -u * (u - 1) * (u - 2) / 6.0;
    w[a][1] = (u + 1) * (u - 1) * (u - 2) / 2.0;
    w[a][2] = -(u + 1) * u * (u - 2) / 2.0;
    w[a][3] = (u + 1) * u * (u - 1) / 6.0;
  }
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  T acc{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double wij = w[0][i] * w[1][j];
      for (int k = 0; k < 4; ++k)
        acc += (wij * w[2][k]) * block[g.flat(wrap(base[0] + i), wrap(base[1] + j), wrap(base[2] + k))];
    }
  return acc;
}

/// Component c, layer m of a real field.
inline double interpolate_tricubic(const RealField& f, int c, int m, const Vec3& x) {
  return interpolate_tricubic(f.layer(c, m).data(), f.grid(), x);
}

}  // namespace tpflow
