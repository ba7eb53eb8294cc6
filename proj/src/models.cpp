#include "martsim/models.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "martsim/model_eval.hpp"
#include "martsim/stats.hpp"

namespace martsim {

namespace {

constexpr uint64_t kCalibrationSeed = 0x8D5FB1C217A3BE59ull;

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Monte Carlo centering constant E[K(X_0)], 1e6 samples, fixed seed.
double mc_transform_centering(const CoefficientSequence& coeffs, Transform t, double threshold,
                              const InnovationSpec& spec) {
  constexpr int64_t kSamples = 1'000'000;
  double sum = 0.0;
  for (int64_t r = 0; r < kSamples; ++r) {
    InnovationStream stream(spec, derive_key(kCalibrationSeed, 0x11ull + static_cast<uint64_t>(r)));
    SourceView src{.base = &stream};
    sum += apply_transform(t, threshold, linear_filter_value(coeffs.simulated(), src, 0));
  }
  return sum / static_cast<double>(kSamples);
}

// Stationary mean of the chain by a long time average, fixed seed.
double mc_chain_mean(const IrfModel& m, const InnovationSpec& spec) {
  constexpr int64_t kSteps = 1'000'000;
  InnovationStream stream(spec, derive_key(kCalibrationSeed, 0x22ull));
  double x = m.initial_state;
  for (int64_t u = 0; u < m.burn_in; ++u) x = irf_step(m.kernel, m.rho, x, stream.at(u));
  double sum = 0.0;
  for (int64_t u = 0; u < kSteps; ++u) {
    x = irf_step(m.kernel, m.rho, x, stream.at(m.burn_in + u));
    sum += x;
  }
  return sum / static_cast<double>(kSteps);
}

// Least-squares fit of log E|eta_n - eta*_n|^q against n = 1..n_max, where
// the starred chain replaces every innovation at index <= 0.
void calibrate_gmc(IrfModel& m, const InnovationSpec& spec) {
  constexpr long kReps = 2000;
  constexpr int kLagMax = 8;
  if (m.rho == 0.0) {
    m.gmc_c2 = m.gmc_c4 = 1.0;
    m.gmc_r2 = m.gmc_r4 = 0.0;
    return;
  }
  std::vector<double> m2(kLagMax, 0.0), m4(kLagMax, 0.0);
  for (long r = 0; r < kReps; ++r) {
    const uint64_t key = derive_key(kCalibrationSeed, 0x33ull + static_cast<uint64_t>(r));
    InnovationStream base(spec, key, CopyTag::Original);
    InnovationStream prime(spec, key, CopyTag::Prime);
    SourceView orig{.base = &base};
    SourceView star{.base = &base, .prime = &prime, .coupling = Coupling::ReplaceAllPast};
    double xo = m.initial_state, xs = m.initial_state;
    for (int64_t u = m.chain_start; u <= kLagMax; ++u) {
      xo = irf_step(m.kernel, m.rho, xo, orig.at(u));
      xs = irf_step(m.kernel, m.rho, xs, star.at(u));
      if (u >= 1) {
        const double d2 = (xo - xs) * (xo - xs);
        m2[static_cast<std::size_t>(u - 1)] += d2;
        m4[static_cast<std::size_t>(u - 1)] += d2 * d2;
      }
    }
  }
  auto fit = [&](std::vector<double>& moments, double& c, double& rate) {
    std::vector<double> xs, ys;
    for (int n = 1; n <= kLagMax; ++n) {
      const double v = moments[static_cast<std::size_t>(n - 1)] / static_cast<double>(kReps);
      if (v <= 0.0) break;
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(v));
    }
    if (xs.size() < 2) {
      c = 1.0;
      rate = 0.0;
      return;
    }
    const LineFit f = fit_line(xs, ys);
    c = std::exp(f.intercept);
    rate = std::exp(f.slope);
  };
  fit(m2, m.gmc_c2, m.gmc_r2);
  fit(m4, m.gmc_c4, m.gmc_r4);
}

IrfModel make_irf(IrfKernel kernel, double rho, const InnovationSpec& spec, int burn_in,
                  int64_t extra_history) {
  // E(L_eps^q) < 1 needs |rho| < 1 for both catalog kernels.
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("iterated-function: |rho| < 1 required");
  IrfModel m;
  m.kernel = kernel;
  m.rho = rho;
  m.burn_in = burn_in >= 0 ? burn_in : default_burn_in(rho);
  m.chain_start = 1 - m.burn_in - extra_history;
  m.initial_state = 0.0;
  if (kernel == IrfKernel::ContractingSine && !spec.symmetric()) {
    m.mean_offset = mc_chain_mean(m, spec);
  } else {
    m.mean_offset = 0.0;  // sign symmetry (or linearity for ar1) gives mean zero
  }
  calibrate_gmc(m, spec);
  return m;
}

}  // namespace

std::string coupling_name(Coupling c) {
  switch (c) {
    case Coupling::None:
      return "none";
    case Coupling::ReplaceIndexZero:
      return "tilde";
    case Coupling::ReplaceAllPast:
      return "star";
  }
  return "?";
}

std::string transform_name(Transform t) {
  switch (t) {
    case Transform::AbsoluteValue:
      return "absolute-value";
    case Transform::Tanh:
      return "tanh";
    case Transform::SoftThreshold:
      return "soft-threshold";
  }
  return "?";
}

std::string kernel_name(IrfKernel k) {
  switch (k) {
    case IrfKernel::Ar1:
      return "ar1";
    case IrfKernel::ContractingSine:
      return "contracting-sine";
  }
  return "?";
}

int default_burn_in(double rho) {
  const double r = std::abs(rho);
  if (r == 0.0) return 1;
  return static_cast<int>(std::ceil(200.0 / std::log(1.0 / r)));
}

ProcessModel::ProcessModel(InnovationSpec innovations, ModelVariant v)
    : innovations_(innovations), variant_(std::move(v)) {}

ProcessModel ProcessModel::linear_iid(CoefficientSequence coeffs, InnovationSpec innovations) {
  return ProcessModel(innovations, LinearIidModel{std::move(coeffs)});
}

ProcessModel ProcessModel::lipschitz_transform(CoefficientSequence coeffs, Transform transform,
                                               InnovationSpec innovations, double threshold) {
  LipschitzTransformModel m{std::move(coeffs), transform, threshold, 0.0};
  const bool odd = transform != Transform::AbsoluteValue;
  if (odd && innovations.symmetric()) {
    m.centering = 0.0;
  } else if (transform == Transform::AbsoluteValue &&
             innovations.family == InnovationFamily::StandardNormal) {
    // X_0 ~ N(0, s^2) with s^2 = sum a_i^2, so E|X_0| = s sqrt(2/pi)
    double s2 = 0.0;
    for (double a : m.coeffs.simulated()) s2 += a * a;
    m.centering = std::sqrt(s2) * std::sqrt(2.0 / std::numbers::pi);
  } else {
    m.centering = mc_transform_centering(m.coeffs, transform, threshold, innovations);
  }
  return ProcessModel(innovations, std::move(m));
}

ProcessModel ProcessModel::iterated_function(IrfKernel kernel, double rho, InnovationSpec innovations,
                                             int burn_in) {
  return ProcessModel(innovations, make_irf(kernel, rho, innovations, burn_in, 0));
}

ProcessModel ProcessModel::linear_dependent(CoefficientSequence coeffs, IrfKernel kernel, double rho,
                                            InnovationSpec innovations, int burn_in) {
  const int64_t lag = coeffs.lag();
  LinearDependentModel m{std::move(coeffs), make_irf(kernel, rho, innovations, burn_in, lag)};
  return ProcessModel(innovations, std::move(m));
}

void ProcessModel::set_analysis_q(double q) {
  if (q < 1.0) throw std::invalid_argument("analysis q must be >= 1");
  if (q > innovations_.q_max())
    throw std::invalid_argument("analysis q exceeds q_max of " + innovations_.name());
  analysis_q_ = q;
}

const CoefficientSequence* ProcessModel::filter_coefficients() const {
  if (const auto* lin = std::get_if<LinearIidModel>(&variant_)) return &lin->coeffs;
  if (const auto* tr = std::get_if<LipschitzTransformModel>(&variant_)) return &tr->coeffs;
  if (const auto* dep = std::get_if<LinearDependentModel>(&variant_)) return &dep->coeffs;
  return nullptr;
}

const IrfModel* ProcessModel::irf() const {
  if (const auto* m = std::get_if<IrfModel>(&variant_)) return m;
  if (const auto* dep = std::get_if<LinearDependentModel>(&variant_)) return &dep->inner;
  return nullptr;
}

ProcessModel ProcessModel::with_initial_state(double x0) const {
  ProcessModel copy = *this;
  if (auto* m = std::get_if<IrfModel>(&copy.variant_)) {
    m->initial_state = x0;
  } else if (auto* dep = std::get_if<LinearDependentModel>(&copy.variant_)) {
    dep->inner.initial_state = x0;
  } else {
    throw std::invalid_argument("with_initial_state: model has no chain state");
  }
  return copy;
}

std::string ProcessModel::id() const {
  std::string s;
  if (const auto* lin = std::get_if<LinearIidModel>(&variant_)) {
    s = "linear-iid[" + lin->coeffs.describe() + "]";
  } else if (const auto* tr = std::get_if<LipschitzTransformModel>(&variant_)) {
    s = "lipschitz[" + transform_name(tr->transform) + "," + tr->coeffs.describe() + "]";
  } else if (const auto* m = std::get_if<IrfModel>(&variant_)) {
    s = "irf[" + kernel_name(m->kernel) + "(" + fmt_g(m->rho) + ")]";
  } else if (const auto* dep = std::get_if<LinearDependentModel>(&variant_)) {
    s = "linear-dep[" + dep->coeffs.describe() + "," + kernel_name(dep->inner.kernel) + "(" +
        fmt_g(dep->inner.rho) + ")]";
  }
  return s + "+" + innovations_.name();
}

PathResult generate_path(const ProcessModel& model, int64_t n, const InnovationStream& stream) {
  if (n <= 0) throw std::invalid_argument("generate_path: n must be positive");
  SourceView src{.base = &stream};
  PathResult p;
  p.x.reserve(static_cast<std::size_t>(n));
  p.s.reserve(static_cast<std::size_t>(n) + 1);
  p.s.push_back(0.0);
  double s = 0.0;
  visit_model_values(model, src, 1, n, [&](int64_t, double x) {
    p.x.push_back(x);
    s += x;
    p.s.push_back(s);
  });
  return p;
}

std::optional<ThetaValue> analytic_theta(const ProcessModel& model, int64_t n, double q) {
  if (n < 0) throw std::invalid_argument("analytic_theta: lag must be >= 0");
  const double norm = analytic_lq_norm(model.innovations(), q);  // validates q
  if (const auto* lin = std::get_if<LinearIidModel>(&model.variant())) {
    return ThetaValue{std::abs(lin->coeffs.simulated_at(n)) * norm, false};
  }
  if (const auto* tr = std::get_if<LipschitzTransformModel>(&model.variant())) {
    // theta_n <= Lip * |a_n| * ||eps - eps'||_q, Lip = 1 for the catalog
    const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
    return ThetaValue{std::abs(tr->coeffs.simulated_at(n)) * d.value, true};
  }
  if (const auto* m = std::get_if<IrfModel>(&model.variant())) {
    // theta_n <= ||G - G*|| path: (C r^n)^{1/q} from the frozen contraction fit
    if (q <= 2.0 && m->gmc_r2 > 0.0)
      return ThetaValue{std::pow(m->gmc_c2 * std::pow(m->gmc_r2, static_cast<double>(n)), 0.5), true};
    if (q <= 4.0 && m->gmc_r4 > 0.0)
      return ThetaValue{std::pow(m->gmc_c4 * std::pow(m->gmc_r4, static_cast<double>(n)), 0.25), true};
    if (m->rho == 0.0) return ThetaValue{n == 0 ? norm : 0.0, true};
    return std::nullopt;
  }
  return std::nullopt;  // linear-dependent: use the estimator
}

}  // namespace martsim
