#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numbers>

namespace tpflow {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat3c = Eigen::Matrix3cd;

inline constexpr double pi = std::numbers::pi;

/// Discretization of the periodic box [-L, L)^3 times one time period.
///
/// Spatial index i in [0, N) sits at x = -L + i h with h = 2L/N. Spatial mode
/// j in [-N/2, N/2) has wavenumber pi j / L. Time modes k run over {-M..M},
/// sampled at 2M+1 equispaced instants t_m = m T / (2M+1).
struct SpaceTimeGrid {
  double box_half_length = pi;
  int n_space = 16;
  double period = 2.0 * pi;
  int n_time_modes = 1;
  double viscosity = 1.0;
  double kappa = 0.0;

  /// Throws ValidationError naming the offending parameter.
  void validate() const;

  int n_time() const { return 2 * n_time_modes + 1; }
  std::size_t n_points() const {
    const auto n = static_cast<std::size_t>(n_space);
    return n * n * n;
  }
  double spacing() const { return 2.0 * box_half_length / n_space; }
  double coordinate(int i) const { return -box_half_length + i * spacing(); }
  Vec3 point(int i1, int i2, int i3) const {
    return {coordinate(i1), coordinate(i2), coordinate(i3)};
  }
  double time(int m) const { return m * period / n_time(); }
  double omega() const { return 2.0 * pi / period; }
  double wavenumber(int j) const { return pi * j / box_half_length; }
  double wavenumber_spacing() const { return pi / box_half_length; }

  /// Storage index (FFT order) -> signed spatial mode.
  int space_mode(int idx) const { return idx < n_space / 2 ? idx : idx - n_space; }
  int space_index(int j) const { return j >= 0 ? j : j + n_space; }
  /// Storage index (FFT order) -> signed time mode.
  int time_mode(int idx) const { return idx <= n_time_modes ? idx : idx - n_time(); }
  int time_index(int k) const { return k >= 0 ? k : k + n_time(); }
  bool is_nyquist(int idx) const { return idx == n_space / 2; }
  /// Largest |j| kept by the 2/3 rule.
  int dealias_cutoff() const { return (n_space - 1) / 3; }

  std::size_t flat(int i1, int i2, int i3) const {
    const auto n = static_cast<std::size_t>(n_space);
    return (static_cast<std::size_t>(i1) * n + static_cast<std::size_t>(i2)) * n +
           static_cast<std::size_t>(i3);
  }

  bool same_shape(const SpaceTimeGrid& o) const {
    return n_space == o.n_space && n_time_modes == o.n_time_modes &&
           box_half_length == o.box_half_length && period == o.period;
  }
};

}  // namespace tpflow
