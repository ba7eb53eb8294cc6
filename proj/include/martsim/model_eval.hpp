#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "martsim/models.hpp"

// Evaluation kernels, templated on the innovation source so tests can inject
// doubles and coupled views share one code path.

namespace martsim {

template <class S>
concept InnovationSource = requires(const S& s, int64_t i) {
  { s.at(i) } -> std::convertible_to<double>;
};

template <InnovationSource S>
double linear_filter_value(std::span<const double> a, const S& src, int64_t t) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * src.at(t - static_cast<int64_t>(i));
  return v;
}

inline double apply_transform(Transform k, double threshold, double x) {
  switch (k) {
    case Transform::AbsoluteValue:
      return std::abs(x);
    case Transform::Tanh:
      return std::tanh(x);
    case Transform::SoftThreshold: {
      const double m = std::abs(x) - threshold;
      return m > 0.0 ? std::copysign(m, x) : 0.0;
    }
  }
  return x;
}

inline double irf_step(IrfKernel k, double rho, double x, double eps) {
  switch (k) {
    case IrfKernel::Ar1:
      return rho * x + eps;
    case IrfKernel::ContractingSine:
      return rho * std::sin(x) + eps;
  }
  return eps;
}

// Raw chain state at time t (before mean centering). The chain always starts
// at the model's fixed origin so repeated queries are consistent.
template <InnovationSource S>
double irf_raw_state(const IrfModel& m, const S& src, int64_t t) {
  double x = m.initial_state;
  for (int64_t u = m.chain_start; u <= t; ++u) x = irf_step(m.kernel, m.rho, x, src.at(u));
  return x;
}

// Raw states eta_lo..eta_hi in one propagation.
template <InnovationSource S>
void irf_raw_states(const IrfModel& m, const S& src, int64_t lo, int64_t hi, std::vector<double>& out) {
  out.clear();
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  double x = m.initial_state;
  for (int64_t u = m.chain_start; u <= hi; ++u) {
    x = irf_step(m.kernel, m.rho, x, src.at(u));
    if (u >= lo) out.push_back(x);
  }
}

// Visit X_t = g(...,eps_{t-1},eps_t) for t = lo..hi; f(t, x).
template <InnovationSource S, class F>
void visit_model_values(const ProcessModel& model, const S& src, int64_t lo, int64_t hi, F&& f) {
  const ModelVariant& v = model.variant();
  if (const auto* lin = std::get_if<LinearIidModel>(&v)) {
    for (int64_t t = lo; t <= hi; ++t) f(t, linear_filter_value(lin->coeffs.simulated(), src, t));
  } else if (const auto* tr = std::get_if<LipschitzTransformModel>(&v)) {
    for (int64_t t = lo; t <= hi; ++t) {
      const double x = linear_filter_value(tr->coeffs.simulated(), src, t);
      f(t, apply_transform(tr->transform, tr->threshold, x) - tr->centering);
    }
  } else if (const auto* irf = std::get_if<IrfModel>(&v)) {
    double x = irf->initial_state;
    for (int64_t u = irf->chain_start; u <= hi; ++u) {
      x = irf_step(irf->kernel, irf->rho, x, src.at(u));
      if (u >= lo) f(u, x - irf->mean_offset);
    }
  } else if (const auto* dep = std::get_if<LinearDependentModel>(&v)) {
    const auto a = dep->coeffs.simulated();
    const int64_t lag = static_cast<int64_t>(a.size()) - 1;
    std::vector<double> eta;
    irf_raw_states(dep->inner, src, lo - lag, hi, eta);
    for (int64_t t = lo; t <= hi; ++t) {
      double val = 0.0;
      for (int64_t i = 0; i <= lag; ++i)
        val += a[static_cast<std::size_t>(i)] * (eta[static_cast<std::size_t>(t - i - (lo - lag))] - dep->inner.mean_offset);
      f(t, val);
    }
  }
}

template <InnovationSource S>
double model_value(const ProcessModel& model, const S& src, int64_t t) {
  double out = 0.0;
  visit_model_values(model, src, t, t, [&](int64_t, double x) { out = x; });
  return out;
}

template <InnovationSource S>
std::vector<double> model_values(const ProcessModel& model, const S& src, int64_t lo, int64_t hi) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  visit_model_values(model, src, lo, hi, [&](int64_t, double x) { out.push_back(x); });
  return out;
}

}  // namespace martsim
