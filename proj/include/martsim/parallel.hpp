#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace martsim {

// Worker count for the OpenMP ensemble kernels. 0 means the runtime default.
// Output values never depend on this: slots are filled independently and all
// reductions happen afterwards in ascending replicate order.
void set_worker_count(int workers);
int worker_count();
bool openmp_enabled();

using EnsembleFn = std::function<double(int64_t)>;

// out[r] = fn(r). OpenMP-parallel over replicates.
void ensemble_fill(std::span<double> out, const EnsembleFn& fn);

// Serial reference implementation, kept for testing and benchmarking.
void ensemble_fill_serial(std::span<double> out, const EnsembleFn& fn);

using EnsembleRowFn = std::function<void(int64_t, std::span<double>)>;

// Row-major fill: fn(r, row_r) writes cols values for replicate r.
// out.size() must equal rows * cols.
void ensemble_fill_rows(std::span<double> out, int64_t rows, int64_t cols, const EnsembleRowFn& fn);
void ensemble_fill_rows_serial(std::span<double> out, int64_t rows, int64_t cols, const EnsembleRowFn& fn);

}  // namespace martsim
