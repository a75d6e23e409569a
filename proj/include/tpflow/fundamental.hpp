#pragma once

#include "tpflow/grid.hpp"
#include "tpflow/norms.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace tpflow {

struct KernelOptions {
  /// Exponents r of the L_r(T) norms.
  std::vector<double> exponents{1.0, 2.0, 3.0};
  /// Samples per period for the time norms (>= 64).
  int time_samples = 64;
  /// Spectral filter exp(-(|xi| / (fraction * xi_max))^order) against truncation ringing.
  double filter_fraction = 0.7;
  int filter_order = 8;
  /// Points beyond this fraction of L are flagged.
  double safety_fraction = 0.9;
};

struct KernelSample {
  Vec3 x = Vec3::Zero();
  double r = 0.0;
  /// norms[m][e]: L_{exponents[e]}(T) norm of the Frobenius norm of d^m Gamma(x, .).
  std::vector<std::vector<double>> norms;
  /// Largest entry of the time mean of Gamma(x, .) (zero up to round-off).
  double time_mean_max = 0.0;
  bool near_boundary = false;
};

/// Purely oscillatory time-periodic Oseen kernel Gamma = F^{-1}[tp symbol] on
/// the grid's box, modes 1 <= |k| <= M, sampled at `points` by tricubic
/// interpolation. order = 1 adds the spatial gradient.
std::vector<KernelSample> eval_tp_kernel(const std::vector<Vec3>& points, const SpaceTimeGrid& g,
                                         int order, const KernelOptions& opt = {});

/// Decay fit of norms[order][exponent_index] against |x| over unflagged samples.
DecayReport fit_kernel_decay(const std::vector<KernelSample>& samples, int order, int exponent_index);

/// Classical steady Oseen tensor for -mu Lap v - kappa d_1 v + grad p = delta e_j
/// (kappa != 0); its wake lies along -sign(kappa) e_1.
Mat3 steady_oseen_kernel(const Vec3& x, double mu, double kappa);
/// Stokeslet (1/(8 pi mu)) (I/|x| + x x^T/|x|^3).
Mat3 stokeslet(const Vec3& x, double mu);

/// Steady kernel from a box IFFT of P/(mu|xi|^2 - i kappa xi_1), scaled by
/// (2 pi)^{-3} so it is directly comparable with steady_oseen_kernel.
std::vector<Mat3> box_steady_kernel(const std::vector<Vec3>& points, const SpaceTimeGrid& g,
                                    const KernelOptions& opt = {});

/// L_q(box x T) norm of the Frobenius norm of Gamma over the whole grid.
double kernel_lq_norm(const SpaceTimeGrid& g, double q, const KernelOptions& opt = {});

/// Phi(s) = s ((1/sqrt 2)(1 + sqrt(1 + s^-4))^{1/2} - 1), evaluated without cancellation.
double phi_function(double s);
/// Square root with nonnegative imaginary part.
cplx sqrt_upper(cplx z);
/// mu(kappa, k) = (kappa/2)^2 + i (2 pi / T) k
cplx mu_kappa_k(double kappa, int k, double period);
/// min of Phi over (0, s_max] on a dense grid (plus the endpoint).
double phi_minimum(double s_max, int samples = 200000);

struct MuPhiConfig {
  double theta = 1.0;
  double period = 2.0 * pi;
  std::vector<double> kappas;
  int k_min = 1;
  int k_max = 1000;
};

struct MuPhiReport {
  double c_theta = 0.0;
  double c_tilde = 0.0;
  double s_max = 0.0;
  /// min over samples of Im sqrt(-mu) - |kappa|/2 - C_theta sqrt(2 pi k/T)
  double margin_imag = 0.0;
  /// min of |mu| - 2 pi k/T and of C~ 2 pi k/T - |mu|
  double margin_lower = 0.0;
  double margin_upper = 0.0;
  /// max |Im sqrt(-mu) - |kappa|/2 - sqrt(2 pi k/T) Phi(s)|, relative
  double identity_error = 0.0;
  long long n_samples = 0;
  bool passed = false;
  double witness_kappa = 0.0;
  int witness_k = 0;
  nlohmann::ordered_json to_json() const;
};

/// Check both mu comparisons over every (kappa, k). Requires T kappa^2 <= theta.
MuPhiReport check_mu_phi(const MuPhiConfig& cfg);

}  // namespace tpflow
