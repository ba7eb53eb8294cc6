#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "martsim/parallel.hpp"
#include "martsim/rng.hpp"

using namespace martsim;

namespace {
double replicate_value(int64_t r) {
  // deterministic per-replicate work with its own derived stream
  InnovationStream s(InnovationSpec::standard_normal(), derive_key(123, static_cast<uint64_t>(r)));
  double acc = 0.0;
  for (int64_t i = 0; i < 50; ++i) acc += s.at(i) * s.at(i);
  return acc;
}
}  // namespace

TEST_CASE("parallel fill is bit-identical to the serial reference at any worker count") {
  const std::size_t n = 4096;
  std::vector<double> ref(n);
  ensemble_fill_serial(ref, replicate_value);

  for (int workers : {0, 1, 2, 3, 4}) {
    set_worker_count(workers);
    std::vector<double> out(n, 0.0);
    ensemble_fill(out, replicate_value);
    CHECK(out == ref);
  }
  set_worker_count(0);
}

TEST_CASE("worker count setting round-trips") {
  set_worker_count(3);
  CHECK(worker_count() == 3);
  set_worker_count(0);
  CHECK(worker_count() == 0);
  set_worker_count(-5);
  CHECK(worker_count() == 0);
}
