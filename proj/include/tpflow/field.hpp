#pragma once

#include "tpflow/grid.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tpflow {

/// Real samples of a scalar (1 component) or vector field on a grid.
///
/// A space-time field has grid.n_time() time layers; a steady (purely
/// spatial) field has a single layer. Storage is [component][layer][i1][i2][i3].
class RealField {
 public:
  RealField() = default;
  RealField(const SpaceTimeGrid& grid, int components, int layers);

  static RealField space_time(const SpaceTimeGrid& grid, int components) {
    return RealField(grid, components, grid.n_time());
  }
  static RealField steady(const SpaceTimeGrid& grid, int components) {
    return RealField(grid, components, 1);
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  int components() const { return components_; }
  int layers() const { return layers_; }
  bool is_steady() const { return layers_ == 1; }
  std::size_t layer_size() const { return grid_.n_points(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::span<double> layer(int c, int m);
  std::span<const double> layer(int c, int m) const;

  double& operator()(int c, int m, std::size_t flat) {
    return data_[(static_cast<std::size_t>(c) * layers_ + m) * layer_size() + flat];
  }
  double operator()(int c, int m, std::size_t flat) const {
    return data_[(static_cast<std::size_t>(c) * layers_ + m) * layer_size() + flat];
  }

  bool conforms(const RealField& o) const {
    return grid_.same_shape(o.grid_) && components_ == o.components_ && layers_ == o.layers_;
  }
  /// Throws ValidationError on NaN/inf.
  void require_finite(const char* what) const;

  RealField& operator+=(const RealField& o);
  RealField& operator-=(const RealField& o);
  RealField& operator*=(double s);
  /// this += a * x
  void axpy(double a, const RealField& x);

  double max_abs() const;
  /// sqrt(mean over time of sum over components of h^3 sum |u|^2).
  double l2_norm() const;

 private:
  SpaceTimeGrid grid_{};
  int components_ = 0;
  int layers_ = 0;
  std::vector<double> data_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double s, RealField a);

/// Complex Fourier coefficients in FFT storage order, [component][k][j1][j2][j3].
///
/// Coefficients follow the continuous conventions: time transform is the
/// normalized mean against exp(-i omega k t); spatial transform carries the
/// 1/(2 pi)^3 forward factor, so coefficient(k, xi) approximates F[u](k, xi).
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const SpaceTimeGrid& grid, int components, int layers);

  static SpectralField space_time(const SpaceTimeGrid& grid, int components) {
    return SpectralField(grid, components, grid.n_time());
  }
  static SpectralField steady(const SpaceTimeGrid& grid, int components) {
    return SpectralField(grid, components, 1);
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  int components() const { return components_; }
  int layers() const { return layers_; }
  bool is_steady() const { return layers_ == 1; }
  std::size_t layer_size() const { return grid_.n_points(); }

  std::span<cplx> values() { return data_; }
  std::span<const cplx> values() const { return data_; }
  std::span<cplx> component(int c);
  std::span<const cplx> component(int c) const;
  std::span<cplx> layer(int c, int kidx);
  std::span<const cplx> layer(int c, int kidx) const;

  cplx& operator()(int c, int kidx, std::size_t flat) {
    return data_[(static_cast<std::size_t>(c) * layers_ + kidx) * layer_size() + flat];
  }
  cplx operator()(int c, int kidx, std::size_t flat) const {
    return data_[(static_cast<std::size_t>(c) * layers_ + kidx) * layer_size() + flat];
  }

  /// Access by signed modes (k, j1, j2, j3). For steady fields k must be 0.
  cplx& coeff(int c, int k, int j1, int j2, int j3);
  cplx coeff(int c, int k, int j1, int j2, int j3) const;

  /// Signed time mode of storage layer kidx (0 for steady fields).
  int mode_of_layer(int kidx) const { return is_steady() ? 0 : grid_.time_mode(kidx); }

  bool conforms(const SpectralField& o) const {
    return grid_.same_shape(o.grid_) && components_ == o.components_ && layers_ == o.layers_;
  }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx s);

  /// Max relative deviation from coeff(-k,-j) = conj(coeff(k,j)).
  double conjugate_asymmetry() const;

 private:
  SpaceTimeGrid grid_{};
  int components_ = 0;
  int layers_ = 0;
  std::vector<cplx> data_;
};

}  // namespace tpflow
