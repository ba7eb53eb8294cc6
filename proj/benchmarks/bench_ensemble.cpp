// Wall-clock comparison of the OpenMP ensemble kernels against the serial
// reference on representative workloads.

#include <chrono>
#include <cstdio>
#include <vector>

#include "martsim/estimators.hpp"
#include "martsim/parallel.hpp"

using namespace martsim;
using clock_type = std::chrono::steady_clock;

namespace {

double time_of(const char* label, const std::function<void()>& body) {
  const auto t0 = clock_type::now();
  body();
  const auto t1 = clock_type::now();
  const double s = std::chrono::duration<double>(t1 - t0).count();
  std::printf("  %-28s %8.3f s\n", label, s);
  return s;
}

}  // namespace

int main() {
  const auto normal = InnovationSpec::standard_normal();
  const auto model = ProcessModel::iterated_function(IrfKernel::ContractingSine, 0.5, normal);
  const int64_t reps = 20'000;

  auto coupled_kernel = [&](int64_t r) {
    CoupledWindow w(model, Coupling::ReplaceIndexZero, 42, static_cast<uint64_t>(r));
    const auto [a, b] = w.g_values(6);
    return std::abs(a - b);
  };

  std::vector<double> serial_out(static_cast<std::size_t>(reps));
  std::vector<double> parallel_out(static_cast<std::size_t>(reps));

  std::printf("coupled trajectory ensemble, %lld replicates\n", static_cast<long long>(reps));
  const double ts = time_of("serial reference", [&] { ensemble_fill_serial(serial_out, coupled_kernel); });
  const double tp = time_of("openmp ensemble_fill", [&] { ensemble_fill(parallel_out, coupled_kernel); });
  std::printf("  identical results: %s\n", serial_out == parallel_out ? "yes" : "NO");
  std::printf("  speedup: %.2fx (openmp %s)\n", ts / tp, openmp_enabled() ? "on" : "off");

  const auto lin = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), normal);
  auto h_kernel = [&](int64_t r) {
    CoupledWindow w(lin, Coupling::ReplaceIndexZero, 7, static_cast<uint64_t>(r));
    const auto [o, c] = w.h_values(0, 4, 128);
    return std::abs(o.value - c.value);
  };
  const int64_t h_reps = 4'000;
  std::vector<double> hs(static_cast<std::size_t>(h_reps)), hp(static_cast<std::size_t>(h_reps));
  std::printf("\nshared-future conditional means, %lld replicates\n", static_cast<long long>(h_reps));
  const double hs_t = time_of("serial reference", [&] { ensemble_fill_serial(hs, h_kernel); });
  const double hp_t = time_of("openmp ensemble_fill", [&] { ensemble_fill(hp, h_kernel); });
  std::printf("  identical results: %s\n", hs == hp ? "yes" : "NO");
  std::printf("  speedup: %.2fx\n", hs_t / hp_t);
  return 0;
}
