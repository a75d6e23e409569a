#pragma once

#include "tpflow/field.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace tpflow {

struct NormValue {
  double value = 0.0;
  Vec3 argmax = Vec3::Zero();
  /// Max attained on the outermost grid shell; the grid sup is then unreliable.
  bool boundary_attained = false;
  nlohmann::ordered_json to_json() const;
};

/// Wake weight (1 + |x| - s x_1)^beta with s = wake_sign. s = +1 puts the wake
/// on the positive x_1 axis; for the operator d_t - mu Lap - kappa d_1 the wake
/// of a body moving with kappa != 0 lies along -sign(kappa) e_1.
double wake_weight(const Vec3& x, double alpha, double beta, double wake_sign = 1.0);

/// Grid sup of |f(x)| (1+|x|)^alpha (1+|x|-s x_1)^beta over a single-layer field;
/// |.| is the Euclidean norm over components. beta = 0 gives the isotropic norm.
NormValue weighted_sup(const RealField& f, double alpha, double beta, double wake_sign = 1.0);

/// ||f(x, .)||_{L_p(T)} (normalized measure) at every grid point, using at least
/// `samples` equispaced instants from trigonometric interpolation. Returns a
/// single-layer, single-component field.
RealField time_lp_norm(const RealField& f, double p, int samples = 64);

/// sup_x ||f(x, .)||_{L_p(T)} (1+|x|)^alpha.
NormValue weighted_osc(const RealField& f, double p, double alpha, int samples = 64);

struct DecayReport {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // 95% confidence interval of the slope
  double ci_high = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::vector<double> radii;
  std::vector<double> values;
  nlohmann::ordered_json to_json() const;
};

/// Least-squares fit of log(value) = intercept + slope log(r). Needs >= 8
/// positive finite samples (throws ValidationError otherwise).
DecayReport fit_power_law(const std::vector<double>& radii, const std::vector<double>& values);

enum class DecayDirection { isotropic, along_wake, against_wake };
DecayDirection parse_decay_direction(const std::string& s);
std::string to_string(DecayDirection d);

/// Unit directions spread over the sphere (Fibonacci lattice), deterministic.
std::vector<Vec3> sphere_directions(int count);

/// Sample `magnitude` along rays at n log-spaced radii in [r_min, r_max] and fit.
/// Isotropic mode averages over `n_directions` sphere directions per radius;
/// along/against-wake use the ray +/- wake_sign e_1.
DecayReport fit_field_decay(const std::function<double(const Vec3&)>& magnitude, DecayDirection dir,
                            double r_min, double r_max, int n_radii, double wake_sign = 1.0,
                            int n_directions = 32);

/// Field overload: Euclidean magnitude over components of layer 0, tricubic
/// interpolation. Radii must stay inside the box.
DecayReport fit_field_decay(const RealField& f, DecayDirection dir, double r_min, double r_max,
                            int n_radii, double wake_sign = 1.0, int n_directions = 32);

}  // namespace tpflow
