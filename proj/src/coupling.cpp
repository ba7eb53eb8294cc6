#include "martsim/coupling.hpp"

#include <cmath>
#include <stdexcept>

#include "martsim/model_eval.hpp"

namespace martsim {

namespace {

constexpr uint64_t kTagBase = 0xB45Eull;
constexpr uint64_t kTagFutures = 0xF07Dull;

ConditionalMeanEstimate finish(double sum, double sumsq, int inner) {
  ConditionalMeanEstimate e;
  e.inner = inner;
  e.value = sum / inner;
  const double var = (sumsq - sum * sum / inner) / (inner - 1);
  e.inner_se = var > 0.0 ? std::sqrt(var / inner) : 0.0;
  return e;
}

}  // namespace

CoupledWindow::CoupledWindow(const ProcessModel& model, Coupling coupling, uint64_t seed,
                             uint64_t replicate)
    : model_(&model),
      coupling_(coupling),
      base_(model.innovations(), derive_key(derive_key(seed, kTagBase), replicate), CopyTag::Original),
      prime_(model.innovations(), derive_key(derive_key(seed, kTagBase), replicate), CopyTag::Prime),
      futures_key_(derive_key(derive_key(seed, kTagFutures), replicate)) {}

CoupledWindow::CoupledWindow(const ProcessModel& model, Coupling coupling, InnovationStream base,
                             InnovationStream prime, uint64_t futures_key)
    : model_(&model),
      coupling_(coupling),
      base_(std::move(base)),
      prime_(std::move(prime)),
      futures_key_(futures_key) {}

std::pair<double, double> CoupledWindow::g_values(int64_t k) const {
  if (k < 0) throw std::invalid_argument("coupled g: lag must be >= 0");
  SourceView orig{.base = &base_};
  SourceView coup{.base = &base_, .prime = &prime_, .coupling = coupling_};
  return {model_value(*model_, orig, k), model_value(*model_, coup, k)};
}

std::pair<ConditionalMeanEstimate, ConditionalMeanEstimate> CoupledWindow::h_values(int64_t k, int m,
                                                                                    int inner) const {
  if (k < 0) throw std::invalid_argument("coupled h: lag must be >= 0");
  if (m < 1) throw std::invalid_argument("coupled h: horizon m must be >= 1");
  if (inner < 2) throw std::invalid_argument("coupled h: inner sample size must be >= 2");

  const SourceView orig{.base = &base_};
  const SourceView coup{.base = &base_, .prime = &prime_, .coupling = coupling_};

  double so = 0.0, so2 = 0.0, sc = 0.0, sc2 = 0.0;
  auto accumulate = [&](double vo, double vc) {
    so += vo;
    so2 += vo * vo;
    sc += vc;
    sc2 += vc * vc;
  };

  const ModelVariant& v = model_->variant();
  if (const auto* irf = std::get_if<IrfModel>(&v)) {
    const double xo0 = irf_raw_state(*irf, orig, k);
    const double xc0 = irf_raw_state(*irf, coup, k);
    for (int j = 0; j < inner; ++j) {
      InnovationStream fut(model_->innovations(), derive_key(futures_key_, static_cast<uint64_t>(j)));
      double xo = xo0, xc = xc0;
      for (int64_t u = k + 1; u <= k + m; ++u) {
        const double eps = fut.at(u);
        xo = irf_step(irf->kernel, irf->rho, xo, eps);
        xc = irf_step(irf->kernel, irf->rho, xc, eps);
      }
      accumulate(xo - irf->mean_offset, xc - irf->mean_offset);
    }
  } else if (const auto* dep = std::get_if<LinearDependentModel>(&v)) {
    const auto a = dep->coeffs.simulated();
    const int64_t lag = static_cast<int64_t>(a.size()) - 1;
    std::vector<double> wo, wc;  // eta_{k-lag}..eta_k per member
    irf_raw_states(dep->inner, orig, k - lag, k, wo);
    irf_raw_states(dep->inner, coup, k - lag, k, wc);
    std::vector<double> no(static_cast<std::size_t>(m)), nc(static_cast<std::size_t>(m));
    for (int j = 0; j < inner; ++j) {
      InnovationStream fut(model_->innovations(), derive_key(futures_key_, static_cast<uint64_t>(j)));
      double xo = wo.back(), xc = wc.back();
      for (int i = 0; i < m; ++i) {
        const double eps = fut.at(k + 1 + i);
        xo = irf_step(dep->inner.kernel, dep->inner.rho, xo, eps);
        xc = irf_step(dep->inner.kernel, dep->inner.rho, xc, eps);
        no[static_cast<std::size_t>(i)] = xo;
        nc[static_cast<std::size_t>(i)] = xc;
      }
      double vo = 0.0, vc = 0.0;
      for (int64_t l = 0; l <= lag; ++l) {
        const int64_t t = k + m - l;  // eta index entering X_{k+m}
        const double al = a[static_cast<std::size_t>(l)];
        if (t > k) {
          vo += al * (no[static_cast<std::size_t>(t - k - 1)] - dep->inner.mean_offset);
          vc += al * (nc[static_cast<std::size_t>(t - k - 1)] - dep->inner.mean_offset);
        } else {
          vo += al * (wo[static_cast<std::size_t>(t - (k - lag))] - dep->inner.mean_offset);
          vc += al * (wc[static_cast<std::size_t>(t - (k - lag))] - dep->inner.mean_offset);
        }
      }
      accumulate(vo, vc);
    }
  } else {
    // linear window models: evaluate at k+m with the member view plus futures
    for (int j = 0; j < inner; ++j) {
      InnovationStream fut(model_->innovations(), derive_key(futures_key_, static_cast<uint64_t>(j)));
      SourceView vo = orig;
      SourceView vc = coup;
      vo.future = vc.future = &fut;
      vo.future_begin = vc.future_begin = k + 1;
      accumulate(model_value(*model_, vo, k + m), model_value(*model_, vc, k + m));
    }
  }
  return {finish(so, so2, inner), finish(sc, sc2, inner)};
}

DoublingDiagnostic h_doubling_diagnostic(const CoupledWindow& window, int64_t k, int m, int inner) {
  const auto [o1, c1] = window.h_values(k, m, inner);
  const auto [o2, c2] = window.h_values(k, m, 2 * inner);
  DoublingDiagnostic d;
  d.at_inner = o1.value - c1.value;
  d.at_double = o2.value - c2.value;
  const double scale = std::max(std::abs(d.at_inner), std::abs(d.at_double));
  d.relative_change = scale > 1e-300 ? std::abs(d.at_double - d.at_inner) / scale : 0.0;
  d.accepted = d.relative_change < 0.10;
  return d;
}

}  // namespace martsim
