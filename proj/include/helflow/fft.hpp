#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace helflow {

// Cached 1-D complex-to-complex FFTW plans, one pair per transform length.
// Plans are created with FFTW_ESTIMATE so the planner never time-measures:
// results are bit-reproducible across runs on the same machine.
class Dft {
 public:
  static void forward(std::complex<double>* a, int n) { run(a, n, FFTW_FORWARD); }

  static void inverse(std::complex<double>* a, int n) {
    run(a, n, FFTW_BACKWARD);
    const double s = 1.0 / double(n);
    for (int i = 0; i < n; ++i) a[i] *= s;
  }

 private:
  struct Plan {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    int n = 0;
    ~Plan() {
      if (fwd) fftw_destroy_plan(fwd);
      if (bwd) fftw_destroy_plan(bwd);
      if (buf) fftw_free(buf);
    }
  };

  static void run(std::complex<double>* a, int n, int sign) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Plan>> cache;
    Plan* p = nullptr;
    {
      std::lock_guard<std::mutex> lock(mu);
      auto& slot = cache[n];
      if (!slot) {
        slot = std::make_unique<Plan>();
        slot->n = n;
        slot->buf = fftw_alloc_complex(size_t(n));
        slot->fwd = fftw_plan_dft_1d(n, slot->buf, slot->buf, FFTW_FORWARD,
                                     FFTW_ESTIMATE);
        slot->bwd = fftw_plan_dft_1d(n, slot->buf, slot->buf, FFTW_BACKWARD,
                                     FFTW_ESTIMATE);
      }
      p = slot.get();
      // Serialize the whole transform: the cached buffer is shared state.
      auto* buf = reinterpret_cast<std::complex<double>*>(p->buf);
      for (int i = 0; i < n; ++i) buf[i] = a[i];
      fftw_execute(sign == FFTW_FORWARD ? p->fwd : p->bwd);
      for (int i = 0; i < n; ++i) a[i] = buf[i];
    }
  }
};

}  // namespace helflow
