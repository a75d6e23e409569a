#include "tpflow/fft_plan.hpp"

#include "tpflow/errors.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace tpflow {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void execute_fft(const std::vector<int>& dims, cplx* data, FftDirection dir) {
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  auto* ptr = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan = nullptr;
  {
    PlanCache& pc = cache();
    std::lock_guard lock(pc.mutex);
    auto key = std::make_pair(dims, sign);
    auto it = pc.plans.find(key);
    if (it == pc.plans.end()) {
      plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr, sign,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
      if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
      pc.plans.emplace(std::move(key), plan);
    } else {
      plan = it->second;
    }
  }
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace tpflow
