#include "martsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "martsim/martingale.hpp"
#include "martsim/verifier.hpp"

namespace martsim {

namespace {

constexpr double kLilLow = 0.65;   // calibrated on the iid oracle
constexpr double kLilHigh = 1.15;
constexpr double kRateSlack = 0.15;
constexpr double kKsThreshold = 0.05;

uint64_t check_seed(uint64_t seed, const std::string& check) {
  uint64_t key = derive_key(seed, 0xC4EEul);
  for (char ch : check) key = derive_key(key, static_cast<uint64_t>(static_cast<unsigned char>(ch)));
  return key;
}

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

std::string fmt_q(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

std::string passfail(bool ok) { return ok ? "pass" : "fail"; }

double q_prime(double q) { return std::min(2.0, q); }

// Exact or bound theta over the *simulated* process, for bound right sides.
DecaySeries bound_theta(const ProcessModel& model, double q) {
  if (model.is_linear_iid()) {
    return DecaySeries::exact_linear_truncated(*model.filter_coefficients(),
                                               analytic_lq_norm(model.innovations(), q));
  }
  auto s = theta_series_for(model, q, 128);
  if (!s) throw std::runtime_error("no analytic projection-norm route for " + model.id());
  return *s;
}

struct CheckContext {
  const ExperimentConfig& cfg;
  const ProcessModel& model;
  std::string model_id;
  uint64_t seed;
};

// ---------------------------------------------------------------------------
// measures
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_measures(const CheckContext& ctx,
                                    const std::filesystem::path& out_dir,
                                    std::vector<std::string>& files) {
  std::vector<ReportRow> rows;
  ProfileRequest req;
  req.qs = ctx.cfg.q;
  req.max_lag = ctx.cfg.max_lag;
  req.replicates = ctx.cfg.replicates;
  req.inner = ctx.cfg.inner;
  req.seed = ctx.seed;
  const auto profiles = build_profiles(ctx.model, req);

  for (const auto& p : profiles) {
    const std::string fname = "profile_q" + fmt_q(p.q) + ".csv";
    std::ofstream os(out_dir / fname);
    write_profile(os, p);
    files.push_back(fname);

    for (int k = 0; k <= p.max_lag; ++k) {
      // smoothing contraction on both couplings: alpha_k <= 2 beta_{k+1}
      for (auto [ak, bk] : {std::pair{MeasureKind::AlphaTilde, MeasureKind::BetaTilde},
                            std::pair{MeasureKind::AlphaStar, MeasureKind::BetaStar}}) {
        if (k + 1 > p.max_lag) continue;
        const ProfileEntry* alpha = p.find(ak, k);
        const ProfileEntry* beta = p.find(bk, k + 1);
        if (alpha == nullptr || beta == nullptr) continue;
        const double bound = 2.0 * beta->estimate;
        const double slack = 6.0 * std::sqrt(alpha->se * alpha->se + 4.0 * beta->se * beta->se);
        rows.push_back(make_row(ak == MeasureKind::AlphaTilde ? "measures:contraction-tilde"
                                                              : "measures:contraction-star",
                                ctx.model_id, p.q, k, alpha->estimate, alpha->se, bound,
                                passfail(alpha->estimate <= bound + slack), ctx.cfg.seed));
      }
      // sandwich containment of the exact projection norm (linear models)
      if (k >= 1) {
        const ProfileEntry* om = p.find(MeasureKind::Omega, k);
        const ProfileEntry* al = p.find(MeasureKind::AlphaTilde, k - 1);
        const auto exact = analytic_theta(ctx.model, k, p.q);
        if (om != nullptr && al != nullptr && exact && !exact->is_bound) {
          const ThetaBracket b = theta_sandwich(*om, *al);
          const bool ok = b.lower - 3.0 * b.lower_se <= exact->value &&
                          exact->value <= b.upper + 3.0 * b.upper_se;
          rows.push_back(make_row("measures:sandwich", ctx.model_id, p.q, k, b.upper, b.upper_se,
                                  exact->value, passfail(ok), ctx.cfg.seed));
        }
      }
    }
  }

  // shared-futures doubling diagnostic gates the run
  CoupledWindow w(ctx.model, Coupling::ReplaceIndexZero, derive_key(ctx.seed, 0xD0B1ull), 0);
  const auto diag = h_doubling_diagnostic(w, 0, 1, ctx.cfg.inner);
  rows.push_back(make_row("measures:doubling", ctx.model_id, std::nullopt, std::nullopt,
                          diag.relative_change, std::nullopt, 0.10, passfail(diag.accepted),
                          ctx.cfg.seed));
  return rows;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_bounds(const CheckContext& ctx, const std::filesystem::path& out_dir,
                                  std::vector<std::string>& files) {
  std::vector<ReportRow> rows;
  const auto& lengths = ctx.cfg.lengths;

  for (double q : ctx.cfg.q) {
    const DecaySeries theta = bound_theta(ctx.model, q);
    const PathMoments pm = sample_path_moments(ctx.model, lengths, ctx.cfg.replicates,
                                               derive_key(ctx.seed, 0xB0011ull));
    for (std::size_t li = 0; li < pm.lengths.size(); ++li) {
      const int64_t n = pm.lengths[li];
      const LqEstimate s_norm = lq_norm_mc(pm.end_values[li], q);
      const auto sum_bound = rhs_sum_moment(theta, n, q);
      rows.push_back(make_row("bounds:sum-moment", ctx.model_id, q, n, s_norm.estimate, s_norm.se,
                              sum_bound.rhs, passfail(s_norm.estimate <= sum_bound.rhs + 3.0 * s_norm.se),
                              ctx.cfg.seed));
      const LqEstimate max_norm = lq_norm_mc(pm.max_values[li], q);
      const auto max_bound = rhs_max_moment(theta, n, q);
      rows.push_back(make_row("bounds:max-moment", ctx.model_id, q, n, max_norm.estimate, max_norm.se,
                              max_bound.rhs,
                              passfail(max_norm.estimate <= max_bound.rhs + 3.0 * max_norm.se),
                              ctx.cfg.seed));
    }

    if (ctx.model.is_linear_iid() && !ctx.model.filter_coefficients()->tail_sum_exists()) {
      rows.push_back(make_row("bounds:residual-moment", ctx.model_id, q, std::nullopt, std::nullopt,
                              std::nullopt, std::nullopt, "skipped:non-summable-coefficients",
                              ctx.cfg.seed));
    } else if (ctx.model.is_linear_iid()) {
      const auto& coeffs = *ctx.model.filter_coefficients();
      const PathMoments rm = sample_residual_moments(coeffs, ctx.model.innovations(), lengths,
                                                     ctx.cfg.replicates,
                                                     derive_key(ctx.seed, 0xB0012ull));
      for (std::size_t li = 0; li < rm.lengths.size(); ++li) {
        const int64_t n = rm.lengths[li];
        const LqEstimate r_norm = lq_norm_mc(rm.end_values[li], q);
        const auto res_bound = rhs_residual_moment(theta, n, q);
        rows.push_back(make_row("bounds:residual-moment", ctx.model_id, q, n, r_norm.estimate,
                                r_norm.se, res_bound.rhs,
                                passfail(r_norm.estimate <= res_bound.rhs + 3.0 * r_norm.se),
                                ctx.cfg.seed));
        if (q == 2.0 && coeffs.tail_sum_exists()) {
          const double xi = xi_n(coeffs, n) * analytic_lq_norm(ctx.model.innovations(), 2.0);
          rows.push_back(make_row("bounds:residual-identity", ctx.model_id, q, n, r_norm.estimate,
                                  r_norm.se, xi,
                                  passfail(std::abs(r_norm.estimate - xi) <= 3.0 * r_norm.se),
                                  ctx.cfg.seed));
        }
      }
    } else {
      // nested construction at reduced scale
      const int horizon =
          ctx.cfg.horizon >= 0 ? ctx.cfg.horizon : default_nested_horizon(ctx.model, q);
      const int inner = std::min(ctx.cfg.inner, 64);
      const int64_t reps = std::min<int64_t>(ctx.cfg.replicates, 200);
      for (int64_t n : lengths) {
        if (n > 64) {
          rows.push_back(make_row("bounds:residual-moment", ctx.model_id, q, n, std::nullopt,
                                  std::nullopt, std::nullopt, "skipped:nested-cost", ctx.cfg.seed));
          continue;
        }
        std::vector<double> rs(static_cast<std::size_t>(reps));
        const uint64_t root = derive_key(ctx.seed, 0xB0013ull);
        for (int64_t r = 0; r < reps; ++r) {
          InnovationStream stream(ctx.model.innovations(), derive_key(root, static_cast<uint64_t>(r)));
          rs[static_cast<std::size_t>(r)] =
              nested_decomposition(ctx.model, stream, n, q, horizon, inner,
                                   derive_key(root, 0x700ull + static_cast<uint64_t>(r)))
                  .r.back();
        }
        const LqEstimate r_norm = lq_norm_mc(rs, q);
        const auto res_bound = rhs_residual_moment(theta, n, q);
        rows.push_back(make_row("bounds:residual-moment", ctx.model_id, q, n, r_norm.estimate,
                                r_norm.se, res_bound.rhs,
                                passfail(r_norm.estimate <= res_bound.rhs + 3.0 * r_norm.se),
                                ctx.cfg.seed));
      }
    }

    // conditional variance and projection-variance bounds need q > 2
    if (q > 2.0) {
      const auto beta_tilde = beta_tilde_series_for(ctx.model, q, 64);
      const auto alpha_tilde = alpha_tilde_series_for(ctx.model, q, 64);
      const auto beta_star = beta_tilde;  // star couplings share the catalog bounds
      const auto alpha_star = alpha_tilde;
      std::optional<double> c_q;
      std::optional<double> lhs_exact;
      if (ctx.model.is_linear_iid()) {
        c_q = std::abs(ctx.model.filter_coefficients()->simulated_tail_sum(0)) *
              analytic_lq_norm(ctx.model.innovations(), q);
        lhs_exact = 0.0;  // D_k = A_0 eps_k is independent of the past
      } else if (const auto* irf = ctx.model.irf();
                 irf != nullptr && irf->kernel == IrfKernel::Ar1 &&
                 std::holds_alternative<IrfModel>(ctx.model.variant())) {
        c_q = analytic_lq_norm(ctx.model.innovations(), q) / (1.0 - irf->rho);
        lhs_exact = 0.0;  // D_k = eps_k / (1 - rho)
      } else {
        const auto est = estimate_increment_norm(ctx.model, q, std::min(ctx.cfg.inner, 20), 128, 300,
                                                 derive_key(ctx.seed, 0xB0014ull));
        c_q = est.estimate;
      }
      if (beta_tilde && alpha_tilde) {
        for (int k = 1; k <= std::min(ctx.cfg.max_lag, 4); ++k) {
          const auto [cond, proj] = conditional_variance_bounds(*c_q, k, *beta_star, *alpha_star,
                                                                *beta_tilde, *alpha_tilde, q);
          rows.push_back(make_row("bounds:cond-var", ctx.model_id, q, k, lhs_exact, std::nullopt,
                                  cond.rhs,
                                  lhs_exact ? passfail(*lhs_exact <= cond.rhs)
                                            : std::string("skipped:no-lhs-estimator"),
                                  ctx.cfg.seed));
          rows.push_back(make_row("bounds:proj-var", ctx.model_id, q, k, lhs_exact, std::nullopt,
                                  proj.rhs,
                                  lhs_exact ? passfail(*lhs_exact <= proj.rhs)
                                            : std::string("skipped:no-lhs-estimator"),
                                  ctx.cfg.seed));
        }
      }
    }
  }

  // one decomposition export for downstream tooling
  if (!ctx.model.is_linear_iid() || ctx.model.filter_coefficients()->tail_sum_exists()) {
    InnovationStream stream(ctx.model.innovations(), derive_key(ctx.seed, 0xB0015ull));
    const int64_t n = std::min<int64_t>(lengths.back(), 256);
    std::optional<MartingaleDecomposition> dec;
    if (ctx.model.is_linear_iid()) {
      dec = linear_decomposition(*ctx.model.filter_coefficients(), stream, n, ctx.cfg.q.front());
    } else {
      const int horizon = ctx.cfg.horizon >= 0 ? ctx.cfg.horizon
                                               : default_nested_horizon(ctx.model, ctx.cfg.q.front());
      dec = nested_decomposition(ctx.model, stream, std::min<int64_t>(n, 64), ctx.cfg.q.front(),
                                 horizon, std::min(ctx.cfg.inner, 64),
                                 derive_key(ctx.seed, 0xB0016ull));
    }
    std::ofstream os(out_dir / "decomposition.csv");
    dec->write_columns(os);
    files.push_back("decomposition.csv");
  }
  return rows;
}

// ---------------------------------------------------------------------------
// maximal
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_maximal(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  for (double q : ctx.cfg.q) {
    const auto r = verify_maximal_dyadic(ctx.model, q, ctx.cfg.dyadic_levels,
                                         std::min<int64_t>(ctx.cfg.replicates, 4000),
                                         derive_key(ctx.seed, 0x3A0ull));
    rows.push_back(make_row("maximal:dyadic", ctx.model_id, q, int64_t{1} << ctx.cfg.dyadic_levels,
                            r.lhs, r.lhs_se, r.rhs, passfail(r.lhs <= r.rhs + 3.0 * r.lhs_se),
                            ctx.cfg.seed));

    // dyadic exceedance sums on residuals (linear) or the sums themselves
    std::vector<int64_t> scales;
    for (int j = 0; (int64_t{1} << j) <= std::max<int64_t>(ctx.cfg.lengths.back(), 16); ++j)
      scales.push_back(int64_t{1} << j);
    PathMoments pm;
    if (ctx.model.is_linear_iid()) {
      pm = sample_residual_moments(*ctx.model.filter_coefficients(), ctx.model.innovations(), scales,
                                   ctx.cfg.paths, derive_key(ctx.seed, 0x3A1ull));
    } else {
      pm = sample_path_moments(ctx.model, scales, ctx.cfg.paths, derive_key(ctx.seed, 0x3A1ull));
    }
    std::vector<double> norms(pm.lengths.size());
    for (std::size_t j = 0; j < pm.lengths.size(); ++j)
      norms[j] = lq_norm_mc(pm.end_values[j], q).estimate;
    for (double delta : ctx.cfg.deltas) {
      const auto e = verify_exceedance_sum(pm.max_values, norms, q, delta);
      if (e.delta.divergent) {
        rows.push_back(make_row("maximal:exceedance", ctx.model_id, q, std::nullopt, std::nullopt,
                                std::nullopt, std::nullopt, "skipped:divergent-delta", ctx.cfg.seed));
        continue;
      }
      const double slack =
          3.0 * std::sqrt(static_cast<double>(std::max<int64_t>(e.total_count, 1))) /
          static_cast<double>(std::max<int64_t>(e.paths, 1));
      rows.push_back(make_row("maximal:exceedance", ctx.model_id, q,
                              static_cast<int64_t>(std::llround(delta * 1000)), e.mean_count,
                              e.count_se, e.bound, passfail(e.mean_count <= e.bound + slack),
                              ctx.cfg.seed));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// lil
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_lil(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  double sigma = 0.0;
  if (!ctx.model.is_linear_iid()) {
    const int horizon = ctx.cfg.horizon >= 0 ? ctx.cfg.horizon : default_nested_horizon(ctx.model, 2.0);
    sigma = estimate_sigma_nested(ctx.model, horizon, 256, 500, derive_key(ctx.seed, 0x71Aull))
                .estimate;
  }
  const auto lil = lil_experiment(ctx.model, ctx.cfg.lil_length, ctx.cfg.lil_paths, 16,
                                  derive_key(ctx.seed, 0x71Bull), sigma);
  const double scaled = lil.sums.median / lil.sigma;
  rows.push_back(make_row("lil:sums", ctx.model_id, 2.0, ctx.cfg.lil_length, scaled,
                          lil.sums.iqr / lil.sigma, 1.0,
                          passfail(scaled >= kLilLow && scaled <= kLilHigh), ctx.cfg.seed));
  if (lil.has_martingale) {
    const double m_scaled = lil.martingale.median / lil.sigma;
    rows.push_back(make_row("lil:martingale", ctx.model_id, 2.0, ctx.cfg.lil_length, m_scaled,
                            lil.martingale.iqr / lil.sigma, 1.0,
                            passfail(m_scaled >= kLilLow && m_scaled <= kLilHigh), ctx.cfg.seed));
  } else {
    rows.push_back(make_row("lil:martingale", ctx.model_id, 2.0, ctx.cfg.lil_length, std::nullopt,
                            std::nullopt, std::nullopt, "skipped:no-closed-form-martingale",
                            ctx.cfg.seed));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_rates(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  std::vector<int64_t> lengths = ctx.cfg.lengths;
  std::sort(lengths.begin(), lengths.end());
  if (lengths.size() < 5) {
    lengths.clear();
    for (int j = 8; j <= 14; ++j) lengths.push_back(int64_t{1} << j);
  }
  const int64_t paths = std::max<int64_t>(ctx.cfg.paths, 200);

  for (double q : ctx.cfg.q) {
    const DecaySeries theta = bound_theta(ctx.model, q);
    const bool short_range =
        check_summable_projections(theta).verdict == Verdict::HoldsAtHorizon;

    const auto pm = sample_path_moments(ctx.model, lengths, paths, derive_key(ctx.seed, 0x9A7Eull));
    const auto fit = rate_fit(pm.max_values, lengths, ctx.cfg.quantile);
    double theo = 1.0 / q_prime(q);
    if (!short_range && ctx.model.filter_coefficients() != nullptr &&
        ctx.model.filter_coefficients()->kind() == CoefficientSequence::Kind::Polynomial) {
      theo = 1.0 / q_prime(q) + 1.0 - ctx.model.filter_coefficients()->parameter();
    }
    rows.push_back(make_row("rates:sums", ctx.model_id, q, lengths.back(), fit.exponent,
                            fit.residual, theo, passfail(fit.exponent <= theo + kRateSlack),
                            ctx.cfg.seed));

    if (ctx.model.is_linear_iid() && !ctx.model.filter_coefficients()->tail_sum_exists()) {
      rows.push_back(make_row("rates:residuals", ctx.model_id, q, lengths.back(), std::nullopt,
                              std::nullopt, std::nullopt, "skipped:non-summable-coefficients",
                              ctx.cfg.seed));
    } else if (ctx.model.is_linear_iid()) {
      const auto& coeffs = *ctx.model.filter_coefficients();
      const auto rm = sample_residual_moments(coeffs, ctx.model.innovations(), lengths, paths,
                                              derive_key(ctx.seed, 0x9A7Full));
      const auto rfit = rate_fit(rm.max_values, lengths, ctx.cfg.quantile);
      // bounded residuals when the tail sums are square summable, else n^{1/q}
      bool bounded = false;
      switch (coeffs.kind()) {
        case CoefficientSequence::Kind::Explicit:
        case CoefficientSequence::Kind::Geometric:
          bounded = true;
          break;
        case CoefficientSequence::Kind::Polynomial:
          bounded = coeffs.parameter() > 1.5;
          break;
        default:
          bounded = false;
      }
      const double rtheo = bounded ? 0.0 : 1.0 / q;
      rows.push_back(make_row("rates:residuals", ctx.model_id, q, lengths.back(), rfit.exponent,
                              rfit.residual, rtheo, passfail(rfit.exponent <= rtheo + kRateSlack),
                              ctx.cfg.seed));
    } else {
      rows.push_back(make_row("rates:residuals", ctx.model_id, q, lengths.back(), std::nullopt,
                              std::nullopt, std::nullopt, "skipped:closed-form-needed",
                              ctx.cfg.seed));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// clt
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_clt(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  const DecaySeries theta = bound_theta(ctx.model, 2.0);
  if (check_summable_projections(theta).verdict == Verdict::Violated) {
    rows.push_back(make_row("clt:ks", ctx.model_id, 2.0, ctx.cfg.clt_length, std::nullopt,
                            std::nullopt, std::nullopt, "skipped:condition-failed", ctx.cfg.seed));
    return rows;
  }
  double sigma;
  if (ctx.model.is_linear_iid()) {
    sigma = std::abs(ctx.model.filter_coefficients()->simulated_tail_sum(0)) *
            analytic_lq_norm(ctx.model.innovations(), 2.0);
  } else {
    const int horizon = ctx.cfg.horizon >= 0 ? ctx.cfg.horizon : default_nested_horizon(ctx.model, 2.0);
    sigma = estimate_sigma_nested(ctx.model, horizon, 512, 2'000, derive_key(ctx.seed, 0xC17All))
                .estimate;
  }
  if (!(sigma > 0.0)) {
    rows.push_back(make_row("clt:ks", ctx.model_id, 2.0, ctx.cfg.clt_length, std::nullopt,
                            std::nullopt, std::nullopt, "skipped:degenerate-scale", ctx.cfg.seed));
    return rows;
  }
  const auto r = clt_check(ctx.model, ctx.cfg.clt_length, ctx.cfg.clt_paths, sigma,
                           derive_key(ctx.seed, 0xC17Bull));
  rows.push_back(make_row("clt:ks", ctx.model_id, 2.0, ctx.cfg.clt_length, r.ks, std::nullopt,
                          kKsThreshold, passfail(r.pass), ctx.cfg.seed));
  return rows;
}

// ---------------------------------------------------------------------------
// conditions
// ---------------------------------------------------------------------------

std::string verdict_to_row(const ConditionResult& r) {
  switch (r.verdict) {
    case Verdict::HoldsAtHorizon:
      return "pass";
    case Verdict::Violated:
      return "fail";
    case Verdict::Inconclusive:
      return r.note.empty() ? "skipped:inconclusive" : "skipped:" + sanitize(r.note);
  }
  return "skipped:unknown";
}

std::vector<ReportRow> run_conditions(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  auto emit = [&](const std::string& name, std::optional<double> q, const ConditionResult& r) {
    rows.push_back(make_row("condition:" + name, ctx.model_id, q, std::nullopt,
                            std::isfinite(r.margin) ? std::optional<double>(r.margin) : std::nullopt,
                            std::nullopt, std::nullopt, verdict_to_row(r), ctx.cfg.seed));
  };

  for (double q : ctx.cfg.q) {
    const auto theta = theta_series_for(ctx.model, q, 128);
    if (theta) {
      emit(condition_name(ConditionId::SummableProjections), q, check_summable_projections(*theta));
      emit(condition_name(ConditionId::ResidualRateSeries), q, check_residual_rate_series(*theta, q));
      if (q > 2.0) {
        emit(condition_name(ConditionId::LogTailDecay), q, check_log_tail_decay(*theta, q));
        double alpha = 0.0;
        const TailClass cls = theta->tail_sum_class();
        if (cls.kind == TailClass::Kind::PolyLog && cls.t == 0.0)
          alpha = std::min(cls.s, 0.99 / q);
        emit(condition_name(ConditionId::SlowVariationSeries), q,
             check_slow_variation_series(alpha, q, 1, 0.5));
      } else {
        rows.push_back(make_row("condition:" + condition_name(ConditionId::LogTailDecay),
                                ctx.model_id, q, std::nullopt, std::nullopt, std::nullopt,
                                std::nullopt, "skipped:needs-q-above-2", ctx.cfg.seed));
        rows.push_back(make_row("condition:" + condition_name(ConditionId::SlowVariationSeries),
                                ctx.model_id, q, std::nullopt, std::nullopt, std::nullopt,
                                std::nullopt, "skipped:needs-q-above-2", ctx.cfg.seed));
      }
    }
    const auto beta = beta_tilde_series_for(ctx.model, q, 128);
    const auto alpha_series = alpha_tilde_series_for(ctx.model, q, 128);
    if (beta) emit(condition_name(ConditionId::CouplingWeightedSum), q, check_coupling_weighted_sum(*beta));
    if (beta && alpha_series)
      emit(condition_name(ConditionId::PairWeightedSum), q, check_pair_weighted_sum(*beta, *alpha_series));
    if (ctx.model.irf() != nullptr) {
      const auto fit = fit_gmc(ctx.model, q, 8, std::min<int64_t>(ctx.cfg.replicates, 4000),
                               derive_key(ctx.seed, 0xC0D0ull));
      emit(condition_name(ConditionId::GeometricContraction), q, check_geometric_contraction(fit));
    } else {
      rows.push_back(make_row("condition:" + condition_name(ConditionId::GeometricContraction),
                              ctx.model_id, q, std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                              "skipped:no-chain", ctx.cfg.seed));
    }
  }
  if (const auto* coeffs = ctx.model.filter_coefficients()) {
    emit(condition_name(ConditionId::SqrtTailSeries), std::nullopt, check_sqrt_tail_series(*coeffs));
  } else {
    rows.push_back(make_row("condition:" + condition_name(ConditionId::SqrtTailSeries), ctx.model_id,
                            std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                            "skipped:no-filter", ctx.cfg.seed));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// gmc
// ---------------------------------------------------------------------------

std::vector<ReportRow> run_gmc(const CheckContext& ctx) {
  std::vector<ReportRow> rows;
  if (ctx.model.irf() == nullptr) {
    rows.push_back(make_row("gmc:fit", ctx.model_id, std::nullopt, std::nullopt, std::nullopt,
                            std::nullopt, std::nullopt, "skipped:no-chain", ctx.cfg.seed));
    return rows;
  }
  for (double q : ctx.cfg.q) {
    const auto fit = fit_gmc(ctx.model, q, 8, std::min<int64_t>(ctx.cfg.replicates, 10'000),
                             derive_key(ctx.seed, 0x6F17ull));
    const double reference = std::pow(std::abs(ctx.model.irf()->rho), q);
    rows.push_back(make_row("gmc:fit", ctx.model_id, q, fit.n_max, fit.r, fit.residual, reference,
                            passfail(fit.r < 1.0), ctx.cfg.seed));
  }
  return rows;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ProcessModel model = config.build_model();

  RunResult result;
  result.output_dir = config.output;
  std::filesystem::create_directories(result.output_dir);

  for (const std::string& check : known_checks()) {
    if (std::find(config.checks.begin(), config.checks.end(), check) == config.checks.end()) continue;
    CheckContext ctx{config, model, model.id(), check_seed(config.seed, check)};
    std::vector<ReportRow> rows;
    try {
      if (check == "measures") {
        rows = run_measures(ctx, result.output_dir, result.files);
      } else if (check == "bounds") {
        rows = run_bounds(ctx, result.output_dir, result.files);
      } else if (check == "maximal") {
        rows = run_maximal(ctx);
      } else if (check == "lil") {
        rows = run_lil(ctx);
      } else if (check == "rates") {
        rows = run_rates(ctx);
      } else if (check == "clt") {
        rows = run_clt(ctx);
      } else if (check == "conditions") {
        rows = run_conditions(ctx);
      } else if (check == "gmc") {
        rows = run_gmc(ctx);
      }
    } catch (const std::exception& e) {
      rows.push_back(make_row(check, ctx.model_id, std::nullopt, std::nullopt, std::nullopt,
                              std::nullopt, std::nullopt, "skipped:" + sanitize(e.what()),
                              config.seed));
    }
    if (rows.empty()) {
      rows.push_back(make_row(check, ctx.model_id, std::nullopt, std::nullopt, std::nullopt,
                              std::nullopt, std::nullopt, "skipped:no-applicable-rows", config.seed));
    }
    const std::string fname = check + ".csv";
    result.rows += static_cast<int64_t>(rows.size());
    write_report(result.output_dir / fname, std::move(rows));
    result.files.push_back(fname);
  }
  std::sort(result.files.begin(), result.files.end());
  return result;
}

}  // namespace martsim
