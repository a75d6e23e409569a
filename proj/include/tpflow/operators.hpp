#pragma once

#include "tpflow/field.hpp"
#include "tpflow/transform.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace tpflow {

/// Named contributions to L(w, q); they sum to L.
///   time_derivative  -d_t(B w)
///   a0_advection     -sum_l a_l0 d_l V
///   laplacian_B      mu Lap(B w)
///   second_order_a   mu sum [(a_lm + a_ml) + sum_j a_lj a_mj] d_l d_m V
///   first_order_a    mu sum_m [sum_l d_l a_ml + sum_lj a_lj d_l a_mj] d_m V
///   kappa            kappa d_1(B w)
///   pressure         -A^T grad q
/// with B = B_{-1} and V = (I + B) w.
struct LParts {
  std::vector<std::pair<std::string, RealField>> parts;
  RealField total() const;
  const RealField& get(const std::string& name) const;
};

struct OperatorSplit {
  RealField N1;        // w . grad w
  RealField N1_tilde;  // w (x) w, component 3 i + j
  RealField N2;        // N - N1
  LParts L_parts;
};

/// L and N of the transformed problem on a fixed set of coefficients.
///
/// Derivatives of w and q are spectral; derivatives of the coefficient fields
/// are fourth-order centered differences, so L and N2 vanish exactly outside
/// |y| < 2b + 2 sqrt(3) h. Products are pointwise on the grid samples; the
/// 2/3 truncation is applied by the caller that hands the result to a
/// spectral solve.
class PerturbationOperators {
 public:
  explicit PerturbationOperators(TransformCoefficients coeffs);

  const TransformCoefficients& coefficients() const { return c_; }
  bool trivial() const { return c_.trivial; }

  /// Space-time (or steady, for trivial coefficients) 3-vector fields.
  RealField apply_L(const RealField& w, const RealField& q) const;
  LParts apply_L_parts(const RealField& w, const RealField& q) const;
  /// ((I + A) V) . grad V
  RealField apply_N(const RealField& w) const;
  OperatorSplit split(const RealField& w, const RealField& q) const;

  /// Radius outside which L and N2 are exactly zero.
  double support_radius(double body_support) const;

 private:
  void check_input(const RealField& w, const RealField* q) const;
  /// grad V with component 3 i + l = d_l V_i.
  RealField grad_V(const RealField& w, const RealField& grad_w) const;

  TransformCoefficients c_;
  double mu_ = 1.0;
  double kappa_ = 0.0;
  RealField dB_;      // d_l B_ij at 9 l + 3 i + j
  RealField d2B_;     // d_l d_m B_ij at 9 pair(l, m) + 3 i + j, pairs 11 12 13 22 23 33
  RealField dA_;      // d_l a_mj at 9 l + 3 m + j
  RealField first_;   // first-order coefficient of d_m V (3 components)
  RealField second_;  // symmetric second-order coefficient, pair index as d2B_
};

RealField apply_L(const RealField& w, const RealField& q, const TransformCoefficients& coeffs);
RealField apply_N(const RealField& w, const TransformCoefficients& coeffs);

/// v . grad v with spectral gradient, pointwise product.
RealField advective_term(const RealField& v);
/// v (x) v, component 3 i + j = v_i v_j.
RealField tensor_square(const RealField& v);
/// Row divergence of a 9-component tensor: sum_j d_j T_ij.
RealField tensor_divergence(const RealField& t);

struct NonlinearSplit {
  RealField N1_S;         // steady, 3 components
  RealField N1_perp;      // space-time, 3 components
  RealField tildeN1_S;    // steady, 9 components
  RealField tildeN1_perp; // space-time, 9 components
  double input_divergence = 0.0;
  /// ||div tildeN1 - N1|| / ||N1|| after 2/3 truncation of both sides.
  double identity_error_S = 0.0;
  double identity_error_perp = 0.0;
  nlohmann::ordered_json to_json() const;
};

/// Steady / oscillatory split of v . grad v and v (x) v:
///   N1_S = v_S . grad v_S + mean_t(v_perp . grad v_perp)
///   N1_perp = v_S . grad v_perp + v_perp . grad v_S + P_perp(v_perp . grad v_perp)
/// and likewise for the tensors. v is first truncated to the 2/3 band. Throws
/// ValidationError if ||div v|| / ||v|| > div_tol.
NonlinearSplit split_nonlinearity(const RealField& v, double div_tol = 1e-10);

}  // namespace tpflow
