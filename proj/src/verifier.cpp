#include "martsim/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "martsim/model_eval.hpp"
#include "martsim/parallel.hpp"
#include "martsim/stats.hpp"

namespace martsim {

namespace {

constexpr uint64_t kTagPaths = 0xF1A7501ull;
constexpr uint64_t kTagLil = 0xF1A7502ull;
constexpr uint64_t kTagClt = 0xF1A7503ull;
constexpr uint64_t kTagSigma = 0xF1A7504ull;

}  // namespace

double RateFunction::operator()(double n) const {
  if (n < 16.0) throw std::invalid_argument("RateFunction: n must be >= 16");
  const double lg = std::log(n);
  const double llg = std::log(lg);
  switch (id) {
    case Id::Marcinkiewicz:
      return std::pow(n, 1.0 / q);
    case Id::IteratedLog:
      return std::sqrt(2.0 * n * llg);
    case Id::SipChi:
      if (q < 4.0) return std::pow(n, 1.0 / q) * std::sqrt(lg);
      return std::pow(n, 0.25) * std::sqrt(lg) * std::pow(llg, 0.25);
    case Id::SipNu:
      return std::pow(n, 1.0 / q) * std::pow(lg, 0.5 + 1.0 / q) * std::pow(llg, 2.0 / q);
    case Id::PolyLog:
      return std::pow(n, gamma) * std::pow(lg, log_pow) * std::pow(llg, loglog_pow);
  }
  return 0.0;
}

RateFunction RateFunction::marcinkiewicz(double q) { return {Id::Marcinkiewicz, q, 0, 0, 0}; }
RateFunction RateFunction::iterated_log() { return {Id::IteratedLog, 2.0, 0, 0, 0}; }
RateFunction RateFunction::sip_chi(double q) {
  if (!(q > 2.0)) throw std::domain_error("sip_chi: q must exceed 2");
  return {Id::SipChi, q, 0, 0, 0};
}
RateFunction RateFunction::sip_nu(double q) {
  if (!(q > 2.0)) throw std::domain_error("sip_nu: q must exceed 2");
  return {Id::SipNu, q, 0, 0, 0};
}
RateFunction RateFunction::poly_log(double gamma, double log_pow, double loglog_pow) {
  return {Id::PolyLog, 2.0, gamma, log_pow, loglog_pow};
}

// ---------------------------------------------------------------------------
// Path ensembles
// ---------------------------------------------------------------------------

namespace {

std::vector<int64_t> sorted_lengths(std::span<const int64_t> lengths) {
  std::vector<int64_t> ls(lengths.begin(), lengths.end());
  std::sort(ls.begin(), ls.end());
  if (ls.empty() || ls.front() < 1) throw std::invalid_argument("path ensemble: lengths must be >= 1");
  return ls;
}

PathMoments collect_moments(std::span<const int64_t> lengths, int64_t replicates,
                            const std::function<void(int64_t, std::span<double>)>& fill) {
  PathMoments pm;
  pm.lengths = sorted_lengths(lengths);
  const int64_t cols = 2 * static_cast<int64_t>(pm.lengths.size());
  std::vector<double> rows(static_cast<std::size_t>(replicates * cols));
  ensemble_fill_rows(rows, replicates, cols, fill);
  pm.end_values.assign(pm.lengths.size(), std::vector<double>(static_cast<std::size_t>(replicates)));
  pm.max_values.assign(pm.lengths.size(), std::vector<double>(static_cast<std::size_t>(replicates)));
  for (int64_t r = 0; r < replicates; ++r) {
    for (std::size_t li = 0; li < pm.lengths.size(); ++li) {
      pm.end_values[li][static_cast<std::size_t>(r)] =
          rows[static_cast<std::size_t>(r * cols) + 2 * li];
      pm.max_values[li][static_cast<std::size_t>(r)] =
          rows[static_cast<std::size_t>(r * cols) + 2 * li + 1];
    }
  }
  return pm;
}

}  // namespace

PathMoments sample_path_moments(const ProcessModel& model, std::span<const int64_t> lengths,
                                int64_t replicates, uint64_t seed) {
  const auto ls = sorted_lengths(lengths);
  const int64_t n_max = ls.back();
  const uint64_t root = derive_key(seed, kTagPaths);
  return collect_moments(ls, replicates, [&](int64_t r, std::span<double> row) {
    InnovationStream stream(model.innovations(), derive_key(root, static_cast<uint64_t>(r)));
    const SourceView src{.base = &stream};
    double s = 0.0, smax = 0.0;
    std::size_t li = 0;
    visit_model_values(model, src, 1, n_max, [&](int64_t t, double x) {
      s += x;
      smax = std::max(smax, std::abs(s));
      while (li < ls.size() && t == ls[li]) {
        row[2 * li] = s;
        row[2 * li + 1] = smax;
        ++li;
      }
    });
  });
}

PathMoments sample_residual_moments(const CoefficientSequence& coeffs, const InnovationSpec& spec,
                                    std::span<const int64_t> lengths, int64_t replicates,
                                    uint64_t seed) {
  if (!coeffs.tail_sum_exists())
    throw std::domain_error("sample_residual_moments: coefficients are not absolutely summable");
  const auto ls = sorted_lengths(lengths);
  const int64_t n_max = ls.back();
  const double a0 = coeffs.simulated_tail_sum(0);
  const auto a = coeffs.simulated();
  const uint64_t root = derive_key(seed, kTagPaths);
  return collect_moments(ls, replicates, [&](int64_t r, std::span<double> row) {
    InnovationStream stream(spec, derive_key(root, static_cast<uint64_t>(r)));
    const SourceView src{.base = &stream};
    double s = 0.0, m = 0.0, rmax = 0.0;
    std::size_t li = 0;
    for (int64_t t = 1; t <= n_max; ++t) {
      s += linear_filter_value(a, src, t);
      m += a0 * stream.at(t);
      const double res = s - m;
      rmax = std::max(rmax, std::abs(res));
      while (li < ls.size() && t == ls[li]) {
        row[2 * li] = res;
        row[2 * li + 1] = rmax;
        ++li;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Dyadic maximal inequality
// ---------------------------------------------------------------------------

double dyadic_block_rhs(const DyadicBlockNorms& blocks) {
  if (blocks.d < 0) throw std::invalid_argument("dyadic_block_rhs: d must be >= 0");
  if (blocks.norms.size() != static_cast<std::size_t>(blocks.d) + 1)
    throw std::invalid_argument("dyadic_block_rhs: need norms for every level 0..d");
  double rhs = 0.0;
  for (int r = 0; r <= blocks.d; ++r) {
    const auto& level = blocks.norms[static_cast<std::size_t>(r)];
    const std::size_t expected = std::size_t{1} << (blocks.d - r);
    if (level.size() != expected)
      throw std::invalid_argument("dyadic_block_rhs: level " + std::to_string(r) + " needs " +
                                  std::to_string(expected) + " blocks");
    double sum = 0.0;
    for (double norm : level) sum += std::pow(norm, blocks.q);
    rhs += std::pow(sum, 1.0 / blocks.q);
  }
  return rhs;
}

MaximalDyadicResult verify_maximal_dyadic(const ProcessModel& model, double q, int d,
                                          int64_t replicates, uint64_t seed) {
  if (d < 0 || d > 20) throw std::invalid_argument("verify_maximal_dyadic: d out of range");
  const int64_t n = int64_t{1} << d;
  const uint64_t root = derive_key(seed, kTagPaths);

  // per replicate: prefix sums at every index (blocks are differences)
  const int64_t cols = n + 1;  // S_1..S_n and max
  std::vector<double> rows(static_cast<std::size_t>(replicates * cols));
  ensemble_fill_rows(rows, replicates, cols, [&](int64_t r, std::span<double> row) {
    InnovationStream stream(model.innovations(), derive_key(root, static_cast<uint64_t>(r)));
    const SourceView src{.base = &stream};
    double s = 0.0, smax = 0.0;
    visit_model_values(model, src, 1, n, [&](int64_t t, double x) {
      s += x;
      smax = std::max(smax, std::abs(s));
      row[static_cast<std::size_t>(t - 1)] = s;
    });
    row[static_cast<std::size_t>(n)] = smax;
  });

  DyadicBlockNorms blocks;
  blocks.d = d;
  blocks.q = q;
  blocks.norms.resize(static_cast<std::size_t>(d) + 1);
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  for (int r = 0; r <= d; ++r) {
    const int64_t block = int64_t{1} << r;
    const int64_t count = n / block;
    auto& level = blocks.norms[static_cast<std::size_t>(r)];
    level.resize(static_cast<std::size_t>(count));
    for (int64_t m = 1; m <= count; ++m) {
      for (int64_t rep = 0; rep < replicates; ++rep) {
        const double hi = rows[static_cast<std::size_t>(rep * cols + m * block - 1)];
        const double lo = m == 1 ? 0.0 : rows[static_cast<std::size_t>(rep * cols + (m - 1) * block - 1)];
        samples[static_cast<std::size_t>(rep)] = hi - lo;
      }
      level[static_cast<std::size_t>(m - 1)] = lq_norm_mc(samples, q).estimate;
    }
  }

  for (int64_t rep = 0; rep < replicates; ++rep)
    samples[static_cast<std::size_t>(rep)] = rows[static_cast<std::size_t>(rep * cols + n)];
  const LqEstimate lhs = lq_norm_mc(samples, q);

  MaximalDyadicResult out;
  out.rhs = dyadic_block_rhs(blocks);
  out.lhs = lhs.estimate;
  out.lhs_se = lhs.se;
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic exceedance sums
// ---------------------------------------------------------------------------

ExceedanceDelta exceedance_delta(std::span<const double> scale_norms, double q) {
  if (scale_norms.empty()) throw std::invalid_argument("exceedance_delta: no scales");
  std::vector<double> summands(scale_norms.size());
  for (std::size_t j = 0; j < scale_norms.size(); ++j) {
    summands[j] = std::pow(std::pow(2.0, -static_cast<double>(j)) * std::pow(scale_norms[j], q),
                           1.0 / (q + 1.0));
  }
  ExceedanceDelta d;
  for (double t : summands) d.value += t;
  const TailModel tail = fit_tail(summands);
  switch (tail.kind) {
    case TailModel::Kind::Geometric:
      if (tail.rate >= 1.0) {
        d.divergent = true;
      } else {
        // fitted tail beyond the horizon: scale r^J / (1 - r)
        d.value += tail_model_value(tail, static_cast<int64_t>(summands.size())) / (1.0 - tail.rate);
      }
      break;
    case TailModel::Kind::Polynomial:
      if (tail.rate <= 1.0) {
        d.divergent = true;
      } else {
        d.value += tail.scale * hurwitz_zeta(tail.rate, static_cast<double>(summands.size()));
      }
      break;
    case TailModel::Kind::Zero:
      break;
    case TailModel::Kind::None:
      // short profiles: the last-summand ratio decides
      if (summands.size() >= 2 && summands.back() >= 0.98 * summands[summands.size() - 2])
        d.divergent = true;
      break;
  }
  return d;
}

ExceedanceResult verify_exceedance_sum(const std::vector<std::vector<double>>& maxima_by_scale,
                                       std::span<const double> scale_norms, double q, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("verify_exceedance_sum: delta must be positive");
  if (maxima_by_scale.size() != scale_norms.size())
    throw std::invalid_argument("verify_exceedance_sum: scales mismatch");
  ExceedanceResult out;
  out.delta = exceedance_delta(scale_norms, q);
  if (out.delta.divergent) return out;
  out.bound = 2.0 * std::pow(delta, -q) * std::pow(out.delta.value, q + 1.0);

  out.paths = maxima_by_scale.empty() ? 0 : static_cast<int64_t>(maxima_by_scale.front().size());
  std::vector<int64_t> counts(static_cast<std::size_t>(out.paths), 0);
  for (std::size_t j = 0; j < maxima_by_scale.size(); ++j) {
    const double threshold = std::pow(2.0, static_cast<double>(j) / q) * delta;
    const auto& maxima = maxima_by_scale[j];
    for (std::size_t p = 0; p < maxima.size(); ++p) {
      if (maxima[p] >= threshold) {
        ++counts[p];
        ++out.total_count;
      }
    }
  }
  if (out.paths > 0) {
    std::vector<double> cd(counts.begin(), counts.end());
    out.mean_count = mean(cd);
    out.count_se = sample_sd(cd) / std::sqrt(static_cast<double>(out.paths));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Law of the iterated logarithm
// ---------------------------------------------------------------------------

LilExperiment lil_experiment(const ProcessModel& model, int64_t n_max, int64_t paths, int64_t n_min,
                             uint64_t seed, double sigma) {
  if (n_max < (int64_t{1} << 16)) throw std::invalid_argument("lil_experiment: n_max must be >= 2^16");
  if (n_min < 16) throw std::invalid_argument("lil_experiment: n_min must be >= 16");
  if (paths < 1) throw std::invalid_argument("lil_experiment: paths must be >= 1");

  const CoefficientSequence* coeffs = model.is_linear_iid() ? model.filter_coefficients() : nullptr;
  const bool has_mart = coeffs != nullptr;
  double a0 = 0.0;
  if (has_mart) a0 = coeffs->simulated_tail_sum(0);
  if (sigma == 0.0) {
    if (!has_mart)
      throw std::invalid_argument("lil_experiment: sigma required for models without a closed form");
    sigma = std::abs(a0) * analytic_lq_norm(model.innovations(), 2.0);
  }

  const uint64_t root = derive_key(seed, kTagLil);
  std::vector<double> rows(static_cast<std::size_t>(paths) * 3);
  ensemble_fill_rows(rows, paths, 3, [&](int64_t p, std::span<double> row) {
    InnovationStream stream(model.innovations(), derive_key(root, static_cast<uint64_t>(p)));
    const SourceView src{.base = &stream};
    double s = 0.0, m = 0.0;
    double stat_pos = 0.0, stat_neg = 0.0, stat_m = 0.0;
    visit_model_values(model, src, 1, n_max, [&](int64_t t, double x) {
      s += x;
      if (has_mart) m += a0 * stream.at(t);
      if (t >= n_min) {
        const double rate = std::sqrt(2.0 * static_cast<double>(t) *
                                      std::log(std::log(static_cast<double>(t))));
        stat_pos = std::max(stat_pos, s / rate);
        stat_neg = std::max(stat_neg, -s / rate);
        if (has_mart) stat_m = std::max(stat_m, m / rate);
      }
    });
    row[0] = stat_pos;
    row[1] = stat_neg;
    row[2] = stat_m;
  });

  LilExperiment out;
  out.sigma = sigma;
  out.n_min = n_min;
  out.n_max = n_max;
  out.paths = paths;
  out.has_martingale = has_mart;
  out.sums.stats.resize(static_cast<std::size_t>(paths));
  out.sums_flipped.stats.resize(static_cast<std::size_t>(paths));
  out.martingale.stats.resize(static_cast<std::size_t>(paths));
  for (int64_t p = 0; p < paths; ++p) {
    out.sums.stats[static_cast<std::size_t>(p)] = rows[static_cast<std::size_t>(3 * p)];
    out.sums_flipped.stats[static_cast<std::size_t>(p)] = rows[static_cast<std::size_t>(3 * p) + 1];
    out.martingale.stats[static_cast<std::size_t>(p)] = rows[static_cast<std::size_t>(3 * p) + 2];
  }
  auto summarize = [](LilSummary& s) {
    s.median = quantile(s.stats, 0.5);
    s.iqr = quantile(s.stats, 0.75) - quantile(s.stats, 0.25);
  };
  summarize(out.sums);
  summarize(out.sums_flipped);
  summarize(out.martingale);
  return out;
}

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

RateFitResult rate_fit(const std::vector<std::vector<double>>& maxima_by_scale,
                       std::span<const int64_t> lengths, double quantile_level) {
  if (maxima_by_scale.size() != lengths.size())
    throw std::invalid_argument("rate_fit: scales mismatch");
  if (lengths.size() < 5) throw std::invalid_argument("rate_fit: need at least 5 dyadic scales");
  if (quantile_level <= 0.0 || quantile_level >= 1.0)
    throw std::invalid_argument("rate_fit: quantile outside (0,1)");

  RateFitResult out;
  out.quantile = quantile_level;
  out.paths = maxima_by_scale.empty() ? 0 : static_cast<int64_t>(maxima_by_scale.front().size());
  if (out.paths < 200) throw std::invalid_argument("rate_fit: need at least 200 paths");

  std::vector<double> lx, ly;
  bool any_positive = false;
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    const double qv = quantile(maxima_by_scale[j], quantile_level);
    if (qv > 0.0) {
      any_positive = true;
      lx.push_back(std::log(static_cast<double>(lengths[j])));
      ly.push_back(std::log(qv));
    }
  }
  if (!any_positive) return out;  // exponent 0 exactly for all-zero paths
  if (lx.size() < 5) throw std::invalid_argument("rate_fit: too few positive quantiles");
  const LineFit f = fit_line(lx, ly);
  out.exponent = f.slope;
  out.intercept = f.intercept;
  out.residual = std::sqrt(f.rss / static_cast<double>(lx.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Distributional check
// ---------------------------------------------------------------------------

CltResult clt_check(const ProcessModel& model, int64_t n, int64_t paths, double sigma, uint64_t seed) {
  if (n < 1024) throw std::invalid_argument("clt_check: n must be >= 1024");
  if (paths < 1000) throw std::invalid_argument("clt_check: paths must be >= 1000");
  if (!(sigma > 0.0)) throw std::domain_error("clt_check: sigma must be positive");

  const uint64_t root = derive_key(seed, kTagClt);
  std::vector<double> zs(static_cast<std::size_t>(paths));
  const double scale = sigma * std::sqrt(static_cast<double>(n));
  ensemble_fill(zs, [&](int64_t p) {
    InnovationStream stream(model.innovations(), derive_key(root, static_cast<uint64_t>(p)));
    const SourceView src{.base = &stream};
    double s = 0.0;
    visit_model_values(model, src, 1, n, [&](int64_t, double x) { s += x; });
    return s / scale;
  });

  CltResult out;
  out.ks = ks_distance_normal(zs);
  out.pass = out.ks <= 0.05;
  out.paths = paths;
  out.sigma = sigma;
  return out;
}

LqEstimate estimate_increment_norm(const ProcessModel& model, double q, int horizon, int inner,
                                   int64_t replicates, uint64_t seed) {
  const uint64_t root = derive_key(seed, kTagSigma);
  std::vector<double> ds(static_cast<std::size_t>(replicates));
  ensemble_fill(ds, [&](int64_t r) {
    InnovationStream stream(model.innovations(), derive_key(root, static_cast<uint64_t>(r)));
    const auto d = nested_decomposition(model, stream, 1, q, horizon, inner,
                                        derive_key(root, 0x9000ull + static_cast<uint64_t>(r)));
    return d.increment(1);
  });
  return lq_norm_mc(ds, q);
}

LqEstimate estimate_sigma_nested(const ProcessModel& model, int horizon, int inner,
                                 int64_t replicates, uint64_t seed) {
  return estimate_increment_norm(model, 2.0, horizon, inner, replicates, seed);
}

}  // namespace martsim
