#pragma once

// Thin FFTW wrapper. Plans are created once per length (guarded, since the
// FFTW planner is not reentrant) and executed through the new-array interface,
// which is safe to call concurrently.

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>

namespace amp_sheet::detail {

class FftPlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;   // X_k = sum_j x_j e^{-2 pi i j k / n}
    fftw_plan backward = nullptr;  // x_j = sum_k X_k e^{+2 pi i j k / n}
  };

  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  const Plans& plans(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_complex* b = fftw_alloc_complex(static_cast<size_t>(n));
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.forward = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
    return plans_.emplace(n, p).first->second;
  }

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<int, Plans> plans_;
};

inline fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

/// Unnormalized forward DFT, out-of-place. Both spans must have the same length.
inline void dft_forward(std::span<std::complex<double>> in, std::span<std::complex<double>> out) {
  const auto& p = FftPlanCache::instance().plans(static_cast<int>(in.size()));
  fftw_execute_dft(p.forward, as_fftw(in.data()), as_fftw(out.data()));
}

/// Unnormalized backward DFT, out-of-place.
inline void dft_backward(std::span<std::complex<double>> in, std::span<std::complex<double>> out) {
  const auto& p = FftPlanCache::instance().plans(static_cast<int>(in.size()));
  fftw_execute_dft(p.backward, as_fftw(in.data()), as_fftw(out.data()));
}

}  // namespace amp_sheet::detail
