#include "tpflow/field.hpp"

#include "tpflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tpflow {

RealField::RealField(const SpaceTimeGrid& grid, int components, int layers)
    : grid_(grid), components_(components), layers_(layers) {
  if (components < 1 || layers < 1) throw ValidationError("field needs >= 1 component and layer");
  data_.assign(static_cast<std::size_t>(components) * layers * grid.n_points(), 0.0);
}

std::span<double> RealField::component(int c) {
  const std::size_t n = static_cast<std::size_t>(layers_) * layer_size();
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}
std::span<const double> RealField::component(int c) const {
  const std::size_t n = static_cast<std::size_t>(layers_) * layer_size();
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}
std::span<double> RealField::layer(int c, int m) {
  return std::span<double>(data_).subspan(
      (static_cast<std::size_t>(c) * layers_ + m) * layer_size(), layer_size());
}
std::span<const double> RealField::layer(int c, int m) const {
  return std::span<const double>(data_).subspan(
      (static_cast<std::size_t>(c) * layers_ + m) * layer_size(), layer_size());
}

void RealField::require_finite(const char* what) const {
  for (double v : data_)
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite sample");
}

RealField& RealField::operator+=(const RealField& o) {
  if (!conforms(o)) throw ValidationError("field shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}
RealField& RealField::operator-=(const RealField& o) {
  if (!conforms(o)) throw ValidationError("field shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}
RealField& RealField::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}
void RealField::axpy(double a, const RealField& x) {
  if (!conforms(x)) throw ValidationError("field shape mismatch in axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
}

double RealField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double RealField::l2_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  const double h = grid_.spacing();
  return std::sqrt(s * h * h * h / layers_);
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double s, RealField a) { return a *= s; }

SpectralField::SpectralField(const SpaceTimeGrid& grid, int components, int layers)
    : grid_(grid), components_(components), layers_(layers) {
  if (components < 1 || layers < 1) throw ValidationError("field needs >= 1 component and layer");
  data_.assign(static_cast<std::size_t>(components) * layers * grid.n_points(), cplx{});
}

std::span<cplx> SpectralField::component(int c) {
  const std::size_t n = static_cast<std::size_t>(layers_) * layer_size();
  return std::span<cplx>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}
std::span<const cplx> SpectralField::component(int c) const {
  const std::size_t n = static_cast<std::size_t>(layers_) * layer_size();
  return std::span<const cplx>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}
std::span<cplx> SpectralField::layer(int c, int kidx) {
  return std::span<cplx>(data_).subspan(
      (static_cast<std::size_t>(c) * layers_ + kidx) * layer_size(), layer_size());
}
std::span<const cplx> SpectralField::layer(int c, int kidx) const {
  return std::span<const cplx>(data_).subspan(
      (static_cast<std::size_t>(c) * layers_ + kidx) * layer_size(), layer_size());
}

cplx& SpectralField::coeff(int c, int k, int j1, int j2, int j3) {
  const int kidx = is_steady() ? 0 : grid_.time_index(k);
  return (*this)(c, kidx, grid_.flat(grid_.space_index(j1), grid_.space_index(j2), grid_.space_index(j3)));
}
cplx SpectralField::coeff(int c, int k, int j1, int j2, int j3) const {
  const int kidx = is_steady() ? 0 : grid_.time_index(k);
  return (*this)(c, kidx, grid_.flat(grid_.space_index(j1), grid_.space_index(j2), grid_.space_index(j3)));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (!conforms(o)) throw ValidationError("spectral shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (!conforms(o)) throw ValidationError("spectral shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}
SpectralField& SpectralField::operator*=(cplx s) {
  for (cplx& v : data_) v *= s;
  return *this;
}

double SpectralField::conjugate_asymmetry() const {
  const int n = grid_.n_space;
  double worst = 0.0, scale = 0.0;
  for (const cplx& v : data_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  for (int c = 0; c < components_; ++c)
    for (int kidx = 0; kidx < layers_; ++kidx) {
      const int mk = is_steady() ? 0 : (layers_ - kidx) % layers_;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int d = 0; d < n; ++d) {
            const cplx v = (*this)(c, kidx, grid_.flat(a, b, d));
            const cplx w = (*this)(c, mk, grid_.flat((n - a) % n, (n - b) % n, (n - d) % n));
            worst = std::max(worst, std::abs(v - std::conj(w)));
          }
    }
  return worst / scale;
}

}  // namespace tpflow
