#pragma once

#include "tpflow/field.hpp"

#include <array>

namespace tpflow {

/// Space-time (or purely spatial, for steady fields) forward transform.
/// Throws ValidationError on non-finite samples.
SpectralField forward_transform(const RealField& u);

/// Inverse transform. Rejects coefficient sets whose inverse has an imaginary
/// part above symmetry_tol relative to the real part (broken conjugate symmetry).
RealField inverse_transform(const SpectralField& s, double symmetry_tol = 1e-8);

/// Time mean with the normalized measure: the k = 0 mode. Returns a steady field.
RealField project_steady(const RealField& f);
/// f - f_S. Returns a space-time field.
RealField project_oscillatory(const RealField& f);
/// Repeat a steady field over all time layers.
RealField broadcast_steady(const RealField& steady);

/// Multiply every component by prod_a (i xi_a)^order[a]. Multipliers vanish on
/// the Nyquist plane of any differentiated axis.
SpectralField partial(const SpectralField& s, std::array<int, 3> order);
/// Multiply by i omega k.
SpectralField time_derivative(const SpectralField& s);
SpectralField laplacian(const SpectralField& s);
/// 3-vector -> scalar.
SpectralField divergence(const SpectralField& v);
/// Scalar -> 3-vector, or 3-vector -> 9 components with index 3*i + j holding d_j v_i.
SpectralField gradient(const SpectralField& s);
/// 3-vector -> 3-vector.
SpectralField curl(const SpectralField& v);

/// Zero every mode with |j_a| > (N-1)/3 on some axis (Orszag 2/3 rule).
void apply_dealias_mask(SpectralField& s);
/// Zero the Nyquist planes j_a = -N/2.
void zero_nyquist(SpectralField& s);

/// L2 norm consistent with RealField::l2_norm via Parseval.
double spectral_l2(const SpectralField& s);

/// Physical-space convenience: inverse(partial(forward(u), order)).
RealField derivative(const RealField& u, std::array<int, 3> order);

/// Trigonometric interpolation of a space-time field onto `samples` equispaced
/// instants per period. The result has `samples` layers.
RealField resample_time(const RealField& f, int samples);

/// Extract / insert a single component.
RealField component_of(const RealField& f, int c);
SpectralField component_of(const SpectralField& f, int c);

}  // namespace tpflow
