#pragma once

#include "tpflow/field.hpp"
#include "tpflow/operators.hpp"
#include "tpflow/solver.hpp"
#include "tpflow/transform.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tpflow {

/// stokes_I0: kappa = 0 pointwise norm; oseen_Ikappa: anisotropic pointwise
/// norm for kappa != 0; oseen_int: homogeneous Sobolev (integrability) norm.
enum class NormFlavor { stokes_I0, oseen_Ikappa, oseen_int };
NormFlavor parse_norm_flavor(const std::string& s);
std::string to_string(NormFlavor f);

struct NormParams {
  double p = 2.0;      // time exponent
  double q = 4.0;      // space exponent
  double delta = 0.1;  // wake exponent, in (0, 1/4) for oseen_Ikappa
  double s = 1.2;      // low space exponent, in (1, 4/3) for oseen_int
  int time_samples = 64;
  void validate(NormFlavor flavor) const;
  nlohmann::ordered_json to_json() const;
};

/// Named terms and their sum.
struct CompositeNorm {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  double term(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

/// (mean over T of ||f(., t)||_{L_r}^p)^{1/p}, normalized time measure, with
/// `samples` trigonometric-interpolation instants. |.| is Euclidean over components.
double lebesgue_time_space(const RealField& f, double p, double r, int samples);
/// Spatial L_r norm of a steady field.
double lebesgue_space(const RealField& f, double r);
/// ||v||_{L_p(T, H^2_r)} = L_p over time of ||v||_r + ||grad v||_r + ||grad^2 v||_r.
double lebesgue_time_h2(const RealField& v, double p, double r, int samples);

/// Discrete analogue of the fixed-point norms. The wake weight follows the
/// grid's kappa (wake on -sign(kappa) e_1).
CompositeNorm composite_norm(const RealField& v, const RealField& q, NormFlavor flavor, const NormParams& np);

/// F = grad Lap^{-1} f (component 3 i + j = d_j Lap^{-1} f_i), so div F = f up to the mean.
RealField divergence_potential(const RealField& f);

/// Smallness norm of the forcing that the flavor's theorem constrains:
///   stokes_I0     <f_S>_3 + <F_S>_2 + <f_perp>_{p,2} + <F_perp>_{p,1}
///   oseen_Ikappa  <f_S>^w_{5/2,1/2+2 delta} + <f_perp>_{p,2+delta} + <F_perp>_{p,1+delta}
///   oseen_int     ||f||_{L_p(L_s)} + ||f||_{L_p(L_q)}
/// with F = divergence_potential(f).
CompositeNorm data_norm(const RealField& f, NormFlavor flavor, const NormParams& np);

/// kappa power multiplying eps^2 in the data bound and eps in the solution bound:
/// (1, 1), (|kappa|^{2 delta}, |kappa|^{2 delta}), (|kappa|^{1/(1+delta)}, |kappa|^{1/2}).
double data_kappa_power(NormFlavor flavor, double kappa, const NormParams& np);
double solution_kappa_power(NormFlavor flavor, double kappa, const NormParams& np);

struct PicardConfig {
  double rho = 1e-2;
  double eps = 0.1;
  double eps0 = 0.0;
  int max_iters = 30;
  double tol = 1e-10;
  NormFlavor norm_flavor = NormFlavor::stokes_I0;
  NormParams norm;
  void validate() const;
  static PicardConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct PicardStep {
  int iter = 0;
  double composite_norm = 0.0;
  double step_norm = 0.0;
  /// step_i / step_{i-1}; absent for the first step.
  std::optional<double> q;
  /// Residual of the previous iterate, measured before this step.
  double residual = 0.0;
  double div_rel = 0.0;
};

struct PicardTrace {
  std::vector<PicardStep> steps;
  bool converged = false;
  bool diverged = false;
  std::string message;
  double final_residual = 0.0;
  double final_div_rel = 0.0;
  double data_norm = 0.0;
  double max_q() const;
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

struct PicardResult {
  FlowState state;
  PicardTrace trace;
};

/// ||P(oseen(u, p) - (f + L(u, p) - N(u)))|| / ||P f||, with P the 2/3
/// truncation and the solver's unresolved modes removed.
double picard_residual(const RealField& f, const FlowState& s, const PerturbationOperators& ops);

/// Iterates (u, p) <- SolveLinear(P(f + L(u, p) - N(u))) from (0, 0). The grid
/// of f fixes kappa and viscosity. Stops on step <= tol * norm (converged),
/// norm > 10 rho (diverged) or max_iters.
PicardResult picard_iterate(const RealField& f, const std::optional<OscillationSpec>& spec,
                            const PicardConfig& cfg);
/// Variant with pre-assembled coefficients.
PicardResult picard_iterate(const RealField& f, const TransformCoefficients& coeffs, const PicardConfig& cfg);

/// Compactly supported, zero-mean forcing shape: a Gaussian (width 0.7) times
/// fixed vector fields with time profiles 1, cos, sin. Invariant under
/// x_2 -> -x_2 (f_1, f_3 even, f_2 odd).
RealField localized_forcing(const SpaceTimeGrid& g);

struct SweepRow {
  double kappa = 0.0;
  double eps = 0.0;
  double data_target = 0.0;
  double data_norm = 0.0;
  double solution_norm = 0.0;
  /// solution_norm / (eps * solution_kappa_power)
  double ratio = 0.0;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double max_q = 0.0;
};

struct SweepTable {
  NormFlavor flavor = NormFlavor::stokes_I0;
  std::vector<SweepRow> rows;
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

/// For every (kappa, eps): scale the localized forcing to data norm
/// eps^2 * data_kappa_power, iterate, and record the outcome. Divergence and
/// non-convergence are table entries, not errors.
SweepTable smallness_sweep(NormFlavor flavor, const std::vector<double>& kappas, const std::vector<double>& epss,
                           const std::optional<OscillationSpec>& spec, const SpaceTimeGrid& g,
                           const PicardConfig& cfg);

}  // namespace tpflow
