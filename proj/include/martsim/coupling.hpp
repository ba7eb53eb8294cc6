#pragma once

#include <cstdint>
#include <utility>

#include "martsim/models.hpp"

namespace martsim {

// Monte Carlo estimate of a conditional mean h_m = E[g(. at lag k+m) | history
// up to k], averaged over `inner` draws of the future innovations.
struct ConditionalMeanEstimate {
  double value = 0.0;
  int inner = 0;
  double inner_se = 0.0;  // inner sample sd / sqrt(inner)
};

// A pair of trajectories driven by shared randomness: the original history and
// the coupled one with innovations replaced per the coupling kind. Conditional
// means use common random numbers: both members see the same future draws.
class CoupledWindow {
 public:
  // Streams derived from (seed, replicate); both members share the base
  // stream and the futures pool.
  CoupledWindow(const ProcessModel& model, Coupling coupling, uint64_t seed, uint64_t replicate);

  // Test hook: explicit streams and futures key.
  CoupledWindow(const ProcessModel& model, Coupling coupling, InnovationStream base,
                InnovationStream prime, uint64_t futures_key);

  // (g on the original trajectory, g on the coupled trajectory) at lag k >= 0.
  std::pair<double, double> g_values(int64_t k) const;

  // m-step conditional means at lag k for both members, estimated with the
  // same `inner` future draws (indices k+1..k+m) for each member.
  std::pair<ConditionalMeanEstimate, ConditionalMeanEstimate> h_values(int64_t k, int m,
                                                                       int inner) const;

  const ProcessModel& model() const { return *model_; }
  Coupling coupling() const { return coupling_; }

 private:
  const ProcessModel* model_;
  Coupling coupling_;
  InnovationStream base_;
  InnovationStream prime_;
  uint64_t futures_key_;
};

// Doubling diagnostic for the shared-futures estimator: |h(2m draws) - h(m
// draws)| relative to scale; used to gate nonlinear runs.
struct DoublingDiagnostic {
  double at_inner = 0.0;
  double at_double = 0.0;
  double relative_change = 0.0;
  bool accepted = false;  // relative change < 10%
};
DoublingDiagnostic h_doubling_diagnostic(const CoupledWindow& window, int64_t k, int m, int inner);

}  // namespace martsim
