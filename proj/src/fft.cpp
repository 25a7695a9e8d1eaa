#include "fpm/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace fpm {
namespace {

// FFTW plan creation is not thread-safe; execution via the new-array
// interface is. Plans are cached per (rows, cols, sign) and created with
// FFTW_ESTIMATE so the chosen algorithm depends only on the size, keeping
// results reproducible across runs.
class PlanCache {
public:
  fftw_plan get(int rows, int cols, int sign) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(rows)) << 33) |
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cols)) << 1) |
        (sign == FFTW_FORWARD ? 0u : 1u);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<cdouble> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_2d(rows, cols,
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(fftw_plan plan, const cdouble* in, cdouble* out) {
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

Field2D fft2(const Field2D& f) {
  const int n1 = f.rows(), n2 = f.cols();
  const int c1 = dc_index(n1), c2 = dc_index(n2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n1) * n2);

  std::vector<cdouble> raw(f.size());
  execute(cache().get(n1, n2, FFTW_FORWARD), f.data(), raw.data());

  // Centered output: spectrum sample at standard frequency k lands at
  // index (k + c) mod n per axis.
  Field2D out(n1, n2);
  for (int a1 = 0; a1 < n1; ++a1) {
    const int k1 = (a1 - c1 + n1) % n1;
    for (int a2 = 0; a2 < n2; ++a2) {
      const int k2 = (a2 - c2 + n2) % n2;
      out.at(a1, a2) = raw[static_cast<std::size_t>(k1) * n2 + k2] * scale;
    }
  }
  return out;
}

Field2D ifft2(const Field2D& f) {
  const int n1 = f.rows(), n2 = f.cols();
  const int c1 = dc_index(n1), c2 = dc_index(n2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n1) * n2);

  // Undo the centering, then run the unnormalized inverse transform.
  std::vector<cdouble> raw(f.size());
  for (int k1 = 0; k1 < n1; ++k1) {
    const int a1 = (k1 + c1) % n1;
    for (int k2 = 0; k2 < n2; ++k2) {
      const int a2 = (k2 + c2) % n2;
      raw[static_cast<std::size_t>(k1) * n2 + k2] = f.at(a1, a2);
    }
  }
  Field2D out(n1, n2);
  execute(cache().get(n1, n2, FFTW_BACKWARD), raw.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  return out;
}

}  // namespace fpm
