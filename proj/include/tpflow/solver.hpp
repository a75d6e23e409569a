#pragma once

#include "tpflow/field.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace tpflow {

/// Velocity (3 components) and pressure (1 component) in physical space.
struct FlowState {
  RealField velocity;
  RealField pressure;
};

struct SpectralFlow {
  SpectralField velocity;
  SpectralField pressure;
};

struct LinearSolveReport {
  double residual_rel = 0.0;
  /// The (k=0, xi=0) mode and the spatial Nyquist planes carry no solution;
  /// the forcing there is dropped and its size reported in flagged_rel.
  std::string zero_mode_policy = "project_out";
  long long modes_solved = 0;
  long long modes_flagged = 0;
  double flagged_rel = 0.0;
  double wall_time = 0.0;
  /// wall_time is left out so serialized reports are reproducible.
  nlohmann::ordered_json to_json() const;
};

/// d_t v - mu Lap v - kappa d_1 v + grad p, evaluated in coefficient space.
SpectralField oseen_operator(const SpectralField& v, const SpectralField& p);

/// Mode-by-mode multiplier solve of d_t v - mu Lap v - kappa d_1 v + grad p = f,
/// div v = 0. Pressure has zero spatial mean in every time mode.
SpectralFlow solve_linear_spectral(const SpectralField& f, LinearSolveReport* report = nullptr);
FlowState solve_linear_tp(const RealField& f, LinearSolveReport* report = nullptr);

/// Spectral divergence of a physical 3-vector field.
RealField divergence(const RealField& v);

/// ||div v|| / ||v|| via Parseval (0 for v = 0).
double relative_divergence(const SpectralField& v);

/// Zero the modes the solver cannot represent: (k=0, xi=0) and Nyquist planes.
void zero_flagged_modes(SpectralField& s);

struct ManufacturedCase {
  RealField velocity;
  RealField pressure;
  RealField forcing;
};

/// Deterministic band-limited case: v* = curl A with A's spectrum decaying like
/// exp(-smoothness |j|), a random pressure with zero spatial mean per time mode,
/// and the matching forcing. Modes are drawn in signed-mode order over a band
/// that only depends on `smoothness`, so grids of different size share a field
/// whenever both resolve that band.
ManufacturedCase manufactured_case(std::uint64_t seed, const SpaceTimeGrid& g, double smoothness);

/// Closed-form smooth periodic case (products of exp(a sin) profiles), with
/// forcing evaluated pointwise from exact derivatives. Its spectrum is not
/// band-limited, so solver recovery error measures spectral accuracy.
ManufacturedCase analytic_manufactured_case(const SpaceTimeGrid& g, double sharpness);

}  // namespace tpflow
