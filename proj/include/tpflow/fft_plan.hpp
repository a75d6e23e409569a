#pragma once

#include "tpflow/grid.hpp"

#include <vector>

namespace tpflow {

enum class FftDirection { forward, backward };

/// In-place unnormalized complex FFT over a row-major array with the given
/// dimensions. Plans are cached per (dims, direction) and created with
/// FFTW_ESTIMATE so results are reproducible run to run.
void execute_fft(const std::vector<int>& dims, cplx* data, FftDirection dir);

}  // namespace tpflow
