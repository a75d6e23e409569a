#include "tpflow/grid.hpp"

#include "tpflow/errors.hpp"

#include <cmath>

namespace tpflow {

void SpaceTimeGrid::validate() const {
  if (!(box_half_length > 0.0) || !std::isfinite(box_half_length))
    throw ValidationError("grid.box_half_length must be > 0");
  if (n_space < 8 || n_space % 2 != 0)
    throw ValidationError("grid.n_space must be even and >= 8");
  if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("grid.period must be > 0");
  if (n_time_modes < 1) throw ValidationError("grid.n_time_modes must be >= 1");
  if (!(viscosity > 0.0) || !std::isfinite(viscosity))
    throw ValidationError("grid.viscosity must be > 0");
  if (!std::isfinite(kappa)) throw ValidationError("grid.kappa must be finite");
}

}  // namespace tpflow
