#pragma once

#include "tpflow/field.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace tpflow {

enum class OscillationKind { radial_bump, lateral_sway, custom_harmonic };
OscillationKind parse_oscillation_kind(const std::string& s);
std::string to_string(OscillationKind k);

/// One term c (cos(k w t) - 1) + s sin(k w t) of a custom oscillation.
struct Harmonic {
  int k = 1;
  Vec3 cos_coeff = Vec3::Zero();
  Vec3 sin_coeff = Vec3::Zero();
};

struct VelocitySample {
  double t = 0.0;
  Vec3 v = Vec3::Zero();
};

/// Boundary displacement phi(y, t) = chi(|y|) (alpha(t) y + beta(t)).
///
/// chi is 1 on |y| <= inner * 2b and vanishes for |y| >= 2b, with the C^3
/// transition 1 - (35 s^4 - 84 s^5 + 70 s^6 - 20 s^7). Kinds:
///   radial_bump      alpha = eps0 sin(w t) / b
///   lateral_sway     beta  = eps0 sin(w t) e_2
///   custom_harmonic  beta  = eps0 sum_k harmonic_k(t)
/// With body-velocity samples the periodic drift int_0^t (v_B - kappa e_1) is
/// added to beta; kappa is then the mean of v_B . e_1.
struct OscillationSpec {
  OscillationKind kind = OscillationKind::radial_bump;
  double amplitude = 0.01;
  double b = 1.0;
  double period = 2.0 * pi;
  double cutoff_inner = 0.5;
  std::vector<Harmonic> harmonics;
  std::vector<VelocitySample> vb_samples;

  /// Parses {kind, amplitude, b, period, cutoff: {inner}, harmonics?, vB_samples?};
  /// unknown keys are rejected.
  static OscillationSpec from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  /// Parameter ranges, vB mean direction, and sup |D phi| < 1/2 (Newton safety).
  void validate() const;

  bool has_body_velocity() const { return !vb_samples.empty(); }
  /// Mean of v_B . e_1 over a period (0 without samples).
  double absorbed_kappa() const;

  double cutoff(double r) const;
  double cutoff_derivative(double r) const;
  double support_radius() const { return 2.0 * b; }
  double body_radius() const { return cutoff_inner * 2.0 * b; }

  Vec3 displacement(const Vec3& y, double t) const;
  /// d_t phi
  Vec3 velocity(const Vec3& y, double t) const;
  /// (D phi)_ij = d phi_i / d y_j
  Mat3 jacobian(const Vec3& y, double t) const;
  /// d_t D phi
  Mat3 jacobian_rate(const Vec3& y, double t) const;
  /// Bound on sup_{y,t} ||D phi||_2 from sampled time profiles.
  double jacobian_bound() const;

 private:
  void profiles(double t, double& alpha, Vec3& beta, double& dalpha, Vec3& dbeta) const;
  Vec3 drift(double t) const;
  Vec3 body_velocity(double t) const;
};

/// Phi_t(y) = y + phi(y, t) + t kappa e_1
Vec3 forward_map(const Vec3& y, double t, const OscillationSpec& spec, double kappa);

struct InverseResult {
  Vec3 y = Vec3::Zero();
  /// psi(x, t) = y - x + t kappa e_1
  Vec3 psi = Vec3::Zero();
  int iterations = 0;
};

/// Newton solve of Phi_t(y) = x; throws ConvergenceError after 50 steps.
InverseResult inverse_map(const Vec3& x, double t, const OscillationSpec& spec, double kappa);

/// Coefficients of the change of variables at one reference point.
struct PointCoefficients {
  Vec3 a0 = Vec3::Zero();       // a_l0 = d_t psi_l at Phi_t(y)
  Mat3 A = Mat3::Zero();        // a_lj = d psi_l / d x_j at Phi_t(y)
  double J0 = 0.0;              // det(I + D phi) - 1
  Mat3 weight = Mat3::Identity();  // I + J0 I + J A, maps v to w
  Mat3 Bm1 = Mat3::Zero();      // weight^{-1} - I
  Mat3 dtBm1 = Mat3::Zero();
  double condition = 1.0;
};

enum class CoefficientMethod { finite_difference, analytic };

/// Finite differences of the Newton inverse use step h_fd in space and time;
/// the analytic path uses I + A = (I + D phi)^{-1}. J and d_t B_{-1} are
/// analytic in both. Throws NumericalError if cond(weight) > 1e6.
PointCoefficients coefficients_at(const Vec3& y, double t, const OscillationSpec& spec, double kappa,
                                  CoefficientMethod method, double h_fd);

struct SmallnessReport {
  double eps0 = 0.0;
  /// sup_t ||phi||_{H^3_inf} + sup_t ||d_t phi||_{H^1_inf}
  double phi_norm = 0.0;
  double a_h2 = 0.0;
  double a_dt = 0.0;
  double a0_sup = 0.0;
  double j0_h2 = 0.0;
  double j0_dt = 0.0;
  double b_h2 = 0.0;
  double b_dt = 0.0;
  double max_condition = 1.0;
  double coefficient_total() const { return a_h2 + a_dt + a0_sup + j0_h2 + j0_dt; }
  double inverse_total() const { return b_h2 + b_dt; }
  nlohmann::ordered_json to_json() const;
};

/// Coefficient fields on every time layer of a grid. Matrix fields store
/// component 3 i + j for entry (i, j).
struct TransformCoefficients {
  SpaceTimeGrid grid{};
  double kappa = 0.0;
  bool trivial = true;
  RealField a0;
  RealField A;
  RealField J0;
  RealField Bm1;
  RealField dtBm1;
  SmallnessReport smallness;

  Mat3 matrix(const RealField& f, int m, std::size_t flat) const;
};

/// All-zero coefficients (phi = 0).
TransformCoefficients zero_coefficients(const SpaceTimeGrid& g);

/// Fills every field on the grid's space-time samples; points with |y| >= 2b
/// are exactly zero. Default finite-difference step is h / 4.
TransformCoefficients assemble_coefficients(const OscillationSpec& spec, double kappa, const SpaceTimeGrid& g,
                                            CoefficientMethod method = CoefficientMethod::finite_difference);

/// max over the grid of |(I + J0 I + J A)(I + B_{-1}) - I|.
double inverse_identity_error(const TransformCoefficients& c);

struct ChainRuleReport {
  double h = 0.0;
  double space_error = 0.0;
  double time_error = 0.0;
  int n_points = 0;
  nlohmann::ordered_json to_json() const;
};

/// Compares the transformed derivatives of a fixed smooth test function g(y, t)
/// with centered differences (step h) of f(x, t) = g(y(x, t), t). Coefficients
/// come from finite differences with step h / 4.
ChainRuleReport chain_rule_check(const OscillationSpec& spec, double kappa, double h,
                                 const std::vector<Vec3>& points, const std::vector<double>& times);

/// Weight used to build w from v. `component` is I + J0 I + J A (Piola);
/// `literal_transpose` is I + J0 I + A^T J.
enum class WeightForm { component, literal_transpose };

struct DivergenceReport {
  double max_discrepancy = 0.0;
  double reference = 0.0;  // max |J div_x u|
  double relative() const { return reference > 0.0 ? max_discrepancy / reference : max_discrepancy; }
  nlohmann::ordered_json to_json() const;
};

/// J div_x u (chain rule with spectral derivatives of v) against div_y w with
/// second-order centered differences, over all grid points and layers.
DivergenceReport transform_divergence_check(const RealField& v, const TransformCoefficients& c,
                                            WeightForm form = WeightForm::component);

struct NoslipReport {
  std::vector<Vec3> points;
  std::vector<double> times;
  /// values[i * times.size() + m]
  std::vector<Vec3> values;
  double sup_h = 0.0;
  double sup_dt_phi = 0.0;
  double kappa = 0.0;
  double eps0 = 0.0;
  /// Largest |time mean of h| over the points.
  double max_time_mean = 0.0;
  /// c with sup|h| = (1 + c eps0)(sup|d_t phi| + |kappa|)
  double measured_c = 0.0;
  /// (1 + eps0)(eps0 + |kappa|)
  double bound_context = 0.0;
  nlohmann::ordered_json to_json() const;
};

/// h = (I + J0 I + J A)(d_t phi + kappa e_1) at `points` and n_times instants.
NoslipReport noslip_boundary_data(const OscillationSpec& spec, double kappa, const std::vector<Vec3>& points,
                                  int n_times = 64);

/// Points on the body surface |y| = body_radius (Fibonacci lattice).
std::vector<Vec3> body_surface_points(const OscillationSpec& spec, int n);

}  // namespace tpflow
