#include "martsim/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace martsim {

namespace {
int g_workers = 0;
}

void set_worker_count(int workers) { g_workers = workers < 0 ? 0 : workers; }

int worker_count() { return g_workers; }

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

void ensemble_fill(std::span<double> out, const EnsembleFn& fn) {
  const int64_t n = static_cast<int64_t>(out.size());
#ifdef _OPENMP
  if (g_workers != 1) {
    if (g_workers > 0) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(g_workers)
      for (int64_t r = 0; r < n; ++r) out[r] = fn(r);
    } else {
#pragma omp parallel for schedule(dynamic, 16)
      for (int64_t r = 0; r < n; ++r) out[r] = fn(r);
    }
    return;
  }
#endif
  ensemble_fill_serial(out, fn);
}

void ensemble_fill_serial(std::span<double> out, const EnsembleFn& fn) {
  const int64_t n = static_cast<int64_t>(out.size());
  for (int64_t r = 0; r < n; ++r) out[r] = fn(r);
}

void ensemble_fill_rows(std::span<double> out, int64_t rows, int64_t cols, const EnsembleRowFn& fn) {
#ifdef _OPENMP
  if (g_workers != 1) {
    if (g_workers > 0) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(g_workers)
      for (int64_t r = 0; r < rows; ++r) fn(r, out.subspan(static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)));
    } else {
#pragma omp parallel for schedule(dynamic, 8)
      for (int64_t r = 0; r < rows; ++r) fn(r, out.subspan(static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)));
    }
    return;
  }
#endif
  ensemble_fill_rows_serial(out, rows, cols, fn);
}

void ensemble_fill_rows_serial(std::span<double> out, int64_t rows, int64_t cols, const EnsembleRowFn& fn) {
  for (int64_t r = 0; r < rows; ++r)
    fn(r, out.subspan(static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)));
}

}  // namespace martsim
