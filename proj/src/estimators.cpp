#include "martsim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "martsim/model_eval.hpp"
#include "martsim/parallel.hpp"
#include "martsim/stats.hpp"

namespace martsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr uint64_t kTagBetaTilde = 0xE57B01ull;
constexpr uint64_t kTagBetaStar = 0xE57B02ull;
constexpr uint64_t kTagAlphaTilde = 0xE57A01ull;
constexpr uint64_t kTagAlphaStar = 0xE57A02ull;
constexpr uint64_t kTagOmega = 0xE57F00ull;
constexpr uint64_t kTagGmc = 0xE57C00ull;

uint64_t measure_seed(uint64_t seed, uint64_t tag, int lag) {
  return derive_key(derive_key(seed, tag), static_cast<uint64_t>(lag));
}

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// L^q norms
// ---------------------------------------------------------------------------

LqEstimate lq_norm_mc(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("lq_norm_mc: empty sample");
  if (q < 1.0) throw std::invalid_argument("lq_norm_mc: q must be >= 1");
  const double n = static_cast<double>(samples.size());
  double m = 0.0;
  for (double z : samples) m += std::pow(std::abs(z), q);
  m /= n;
  if (m == 0.0) return {0.0, 0.0};
  double var = 0.0;
  for (double z : samples) {
    const double d = std::pow(std::abs(z), q) - m;
    var += d * d;
  }
  var /= (n - 1.0) * n;  // variance of the mean of |z|^q
  LqEstimate e;
  e.estimate = std::pow(m, 1.0 / q);
  e.se = std::pow(m, 1.0 / q - 1.0) * std::sqrt(var) / q;
  return e;
}

LqEstimate estimate_lq_norm(const std::function<double(int64_t)>& sampler, double q, int64_t replicates) {
  if (replicates < 100) throw std::invalid_argument("estimate_lq_norm: need at least 100 replicates");
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  ensemble_fill(samples, sampler);
  return lq_norm_mc(samples, q);
}

// ---------------------------------------------------------------------------
// Profile entries
// ---------------------------------------------------------------------------

std::string measure_kind_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::ThetaExact:
      return "theta-exact";
    case MeasureKind::ThetaSandwich:
      return "theta-sandwich";
    case MeasureKind::Omega:
      return "omega";
    case MeasureKind::AlphaTilde:
      return "alpha-tilde";
    case MeasureKind::AlphaStar:
      return "alpha-star";
    case MeasureKind::BetaTilde:
      return "beta-tilde";
    case MeasureKind::BetaStar:
      return "beta-star";
  }
  return "?";
}

MeasureKind measure_kind_from_name(const std::string& name) {
  for (MeasureKind k : {MeasureKind::ThetaExact, MeasureKind::ThetaSandwich, MeasureKind::Omega,
                        MeasureKind::AlphaTilde, MeasureKind::AlphaStar, MeasureKind::BetaTilde,
                        MeasureKind::BetaStar}) {
    if (measure_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown measure kind: " + name);
}

namespace {

std::vector<double> coupled_g_samples(const ProcessModel& model, int k, int64_t replicates,
                                      Coupling coupling, uint64_t seed) {
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  ensemble_fill(samples, [&](int64_t r) {
    CoupledWindow w(model, coupling, seed, static_cast<uint64_t>(r));
    const auto [orig, coup] = w.g_values(k);
    return std::abs(orig - coup);
  });
  return samples;
}

std::vector<double> coupled_h_samples(const ProcessModel& model, int k, int m, int64_t replicates,
                                      int inner, Coupling coupling, uint64_t seed) {
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  ensemble_fill(samples, [&](int64_t r) {
    CoupledWindow w(model, coupling, seed, static_cast<uint64_t>(r));
    const auto [orig, coup] = w.h_values(k, m, inner);
    return std::abs(orig.value - coup.value);
  });
  return samples;
}

ProfileEntry make_entry(MeasureKind kind, int lag, double q, const LqEstimate& e, int64_t replicates) {
  return ProfileEntry{lag, kind, q, e.estimate, e.se, replicates};
}

}  // namespace

ProfileEntry estimate_beta(const ProcessModel& model, double q, int k, int64_t replicates,
                           Coupling coupling, uint64_t seed) {
  if (k < 0) throw std::invalid_argument("estimate_beta: lag must be >= 0");
  const bool star = coupling == Coupling::ReplaceAllPast;
  const auto samples = coupled_g_samples(model, k, replicates, coupling,
                                         measure_seed(seed, star ? kTagBetaStar : kTagBetaTilde, k));
  return make_entry(star ? MeasureKind::BetaStar : MeasureKind::BetaTilde, k, q, lq_norm_mc(samples, q),
                    replicates);
}

ProfileEntry estimate_alpha(const ProcessModel& model, double q, int k, int64_t replicates, int inner,
                            Coupling coupling, uint64_t seed) {
  if (k < 0) throw std::invalid_argument("estimate_alpha: lag must be >= 0");
  if (inner < 2) throw std::invalid_argument("estimate_alpha: inner must be >= 2");
  const bool star = coupling == Coupling::ReplaceAllPast;
  const auto samples = coupled_h_samples(model, k, 1, replicates, inner, coupling,
                                         measure_seed(seed, star ? kTagAlphaStar : kTagAlphaTilde, k));
  return make_entry(star ? MeasureKind::AlphaStar : MeasureKind::AlphaTilde, k, q,
                    lq_norm_mc(samples, q), replicates);
}

ProfileEntry estimate_omega(const ProcessModel& model, double q, int n, int64_t replicates, int inner,
                            uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate_omega: horizon must be >= 1");
  if (inner < 2) throw std::invalid_argument("estimate_omega: inner must be >= 2");
  const auto samples = coupled_h_samples(model, 0, n, replicates, inner, Coupling::ReplaceIndexZero,
                                         measure_seed(seed, kTagOmega, n));
  return make_entry(MeasureKind::Omega, n, q, lq_norm_mc(samples, q), replicates);
}

ThetaBracket theta_sandwich(const ProfileEntry& omega_n, const ProfileEntry& alpha_prev) {
  if (omega_n.kind != MeasureKind::Omega)
    throw std::invalid_argument("theta_sandwich: first entry must be omega");
  if (alpha_prev.kind != MeasureKind::AlphaTilde && alpha_prev.kind != MeasureKind::AlphaStar)
    throw std::invalid_argument("theta_sandwich: second entry must be an alpha measure");
  if (omega_n.q != alpha_prev.q) throw std::invalid_argument("theta_sandwich: mismatched q");
  ThetaBracket b;
  b.lower = 0.5 * omega_n.estimate;
  b.lower_se = 0.5 * omega_n.se;
  if (alpha_prev.estimate < omega_n.estimate) {
    b.upper = alpha_prev.estimate;
    b.upper_se = alpha_prev.se;
  } else {
    b.upper = omega_n.estimate;
    b.upper_se = omega_n.se;
  }
  return b;
}

const ProfileEntry* DependenceProfile::find(MeasureKind kind, int lag) const {
  for (const auto& e : entries) {
    if (e.kind == kind && e.lag == lag) return &e;
  }
  return nullptr;
}

std::vector<double> DependenceProfile::values(MeasureKind kind) const {
  std::vector<double> v(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (const auto& e : entries) {
    if (e.kind == kind && e.lag >= 0 && e.lag <= max_lag) v[static_cast<std::size_t>(e.lag)] = e.estimate;
  }
  return v;
}

void write_profile(std::ostream& os, const DependenceProfile& profile) {
  os << "lag,kind,q,estimate,se,replicates\n";
  for (const auto& e : profile.entries) {
    os << e.lag << ',' << measure_kind_name(e.kind) << ',' << fmt17(e.q) << ',' << fmt17(e.estimate)
       << ',' << fmt17(e.se) << ',' << e.replicates << '\n';
  }
}

DependenceProfile read_profile(std::istream& is) {
  DependenceProfile p;
  std::string line;
  if (!std::getline(is, line) || line != "lag,kind,q,estimate,se,replicates")
    throw std::runtime_error("profile: bad header");
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ProfileEntry e;
    std::getline(ss, field, ',');
    e.lag = std::stoi(field);
    std::getline(ss, field, ',');
    e.kind = measure_kind_from_name(field);
    std::getline(ss, field, ',');
    e.q = std::stod(field);
    std::getline(ss, field, ',');
    e.estimate = std::stod(field);
    std::getline(ss, field, ',');
    e.se = std::stod(field);
    std::getline(ss, field, ',');
    e.replicates = std::stoll(field);
    if (first) {
      p.q = e.q;
      first = false;
    }
    p.max_lag = std::max(p.max_lag, e.lag);
    p.replicates = std::max(p.replicates, e.replicates);
    p.entries.push_back(e);
  }
  return p;
}

std::vector<DependenceProfile> build_profiles(const ProcessModel& model, const ProfileRequest& request) {
  if (request.qs.empty()) throw std::invalid_argument("build_profiles: empty q list");
  for (double q : request.qs) {
    if (q > model.innovations().q_max())
      throw std::invalid_argument("build_profiles: q exceeds q_max of " + model.innovations().name());
  }
  std::vector<DependenceProfile> out;
  for (double q : request.qs) {
    DependenceProfile p;
    p.q = q;
    p.max_lag = request.max_lag;
    p.replicates = request.replicates;
    p.inner = request.inner;
    p.seed = request.seed;
    out.push_back(std::move(p));
  }

  auto add_for_all_q = [&](MeasureKind kind, int lag, const std::vector<double>& samples) {
    for (std::size_t i = 0; i < request.qs.size(); ++i) {
      out[i].entries.push_back(
          make_entry(kind, lag, request.qs[i], lq_norm_mc(samples, request.qs[i]), request.replicates));
    }
  };

  for (int k = 0; k <= request.max_lag; ++k) {
    if (request.tilde) {
      add_for_all_q(MeasureKind::BetaTilde, k,
                    coupled_g_samples(model, k, request.replicates, Coupling::ReplaceIndexZero,
                                      measure_seed(request.seed, kTagBetaTilde, k)));
      add_for_all_q(MeasureKind::AlphaTilde, k,
                    coupled_h_samples(model, k, 1, request.replicates, request.inner,
                                      Coupling::ReplaceIndexZero,
                                      measure_seed(request.seed, kTagAlphaTilde, k)));
    }
    if (request.star) {
      add_for_all_q(MeasureKind::BetaStar, k,
                    coupled_g_samples(model, k, request.replicates, Coupling::ReplaceAllPast,
                                      measure_seed(request.seed, kTagBetaStar, k)));
      add_for_all_q(MeasureKind::AlphaStar, k,
                    coupled_h_samples(model, k, 1, request.replicates, request.inner,
                                      Coupling::ReplaceAllPast,
                                      measure_seed(request.seed, kTagAlphaStar, k)));
    }
    if (request.omega && k >= 1) {
      add_for_all_q(MeasureKind::Omega, k,
                    coupled_h_samples(model, 0, k, request.replicates, request.inner,
                                      Coupling::ReplaceIndexZero,
                                      measure_seed(request.seed, kTagOmega, k)));
    }
  }

  // exact projection norms and sandwich upper bounds per q
  for (auto& p : out) {
    for (int k = 0; k <= request.max_lag; ++k) {
      if (model.is_linear_iid()) {
        const auto th = analytic_theta(model, k, p.q);
        if (th && !th->is_bound) p.entries.push_back({k, MeasureKind::ThetaExact, p.q, th->value, 0.0, 0});
      }
      if (k >= 1 && request.omega && request.tilde) {
        const ProfileEntry* om = p.find(MeasureKind::Omega, k);
        const ProfileEntry* al = p.find(MeasureKind::AlphaTilde, k - 1);
        if (om != nullptr && al != nullptr) {
          const ThetaBracket b = theta_sandwich(*om, *al);
          p.entries.push_back(
              {k, MeasureKind::ThetaSandwich, p.q, b.upper, b.upper_se, request.replicates});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tail models and decay series
// ---------------------------------------------------------------------------

TailModel fit_tail(std::span<const double> head) {
  TailModel t;
  if (head.size() < 4) return t;
  const std::size_t start = std::max<std::size_t>(1, head.size() / 2);
  std::vector<double> idx, logv;
  bool all_zero = true;
  for (std::size_t i = start; i < head.size(); ++i) {
    if (head[i] > 0.0) {
      all_zero = false;
      idx.push_back(static_cast<double>(i));
      logv.push_back(std::log(head[i]));
    }
  }
  if (all_zero) {
    t.kind = TailModel::Kind::Zero;
    t.fit_start = static_cast<int>(start);
    return t;
  }
  if (idx.size() < 3) return t;

  std::vector<double> logidx(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) logidx[i] = std::log(idx[i]);

  const LineFit geo = fit_line(idx, logv);
  const LineFit poly = fit_line(logidx, logv);
  if (geo.slope < 0.0 && geo.rss <= poly.rss) {
    t.kind = TailModel::Kind::Geometric;
    t.scale = std::exp(geo.intercept);
    t.rate = std::exp(geo.slope);
    t.residual = geo.rss;
  } else {
    t.kind = TailModel::Kind::Polynomial;
    t.scale = std::exp(poly.intercept);
    t.rate = -poly.slope;  // value ~ scale * i^-rate
    t.residual = poly.rss;
  }
  t.fit_start = static_cast<int>(start);
  return t;
}

double tail_model_value(const TailModel& t, int64_t i) {
  switch (t.kind) {
    case TailModel::Kind::None:
    case TailModel::Kind::Zero:
      return 0.0;
    case TailModel::Kind::Geometric:
      return t.scale * std::pow(t.rate, static_cast<double>(i));
    case TailModel::Kind::Polynomial:
      return t.scale * std::pow(static_cast<double>(i), -t.rate);
  }
  return 0.0;
}

DecaySeries::DecaySeries(std::vector<double> head, std::vector<double> head_se, TailModel tail,
                         bool upper_bound)
    : head_(std::move(head)), head_se_(std::move(head_se)), tail_(tail), upper_(upper_bound) {
  if (head_se_.empty()) head_se_.assign(head_.size(), 0.0);
  if (head_se_.size() != head_.size()) throw std::invalid_argument("DecaySeries: se size mismatch");
}

DecaySeries DecaySeries::exact_linear_truncated(const CoefficientSequence& coeffs, double norm,
                                                int shift) {
  std::vector<double> head;
  for (int64_t i = shift; i <= coeffs.lag(); ++i) head.push_back(std::abs(coeffs.simulated_at(i)) * norm);
  if (head.empty()) head.push_back(0.0);
  TailModel zero;
  zero.kind = TailModel::Kind::Zero;
  return DecaySeries(std::move(head), {}, zero, false);
}

DecaySeries DecaySeries::exact_linear_ideal(const CoefficientSequence& coeffs, double norm, int head,
                                            int shift, bool upper_bound) {
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(head));
  for (int i = 0; i < head; ++i) h.push_back(std::abs(coeffs.at(i + shift)) * norm);
  DecaySeries s(std::move(h), {}, TailModel{}, upper_bound);
  s.exact_ = coeffs;
  s.exact_norm_ = norm;
  s.exact_shift_ = shift;
  return s;
}

DecaySeries DecaySeries::from_estimates(std::vector<double> head, std::vector<double> se,
                                        bool upper_bound) {
  // monotone adjustment (pool adjacent violators) before the tail fit
  const std::vector<double> adjusted = isotonic_nonincreasing(head);
  const TailModel tail = fit_tail(adjusted);
  return DecaySeries(std::move(head), std::move(se), tail, upper_bound);
}

bool DecaySeries::horizon_limited() const {
  return !exact_.has_value() && tail_.kind == TailModel::Kind::None;
}

double DecaySeries::at(int64_t i) const {
  if (i < 0) return 0.0;
  if (i < head_size()) return head_[static_cast<std::size_t>(i)];
  if (exact_) return std::abs(exact_->at(i + exact_shift_)) * exact_norm_;
  return tail_model_value(tail_, i);
}

double DecaySeries::se_at(int64_t i) const {
  if (i < 0 || i >= head_size()) return 0.0;
  return head_se_[static_cast<std::size_t>(i)];
}

namespace {

double tail_model_sum_from(const TailModel& t, int64_t j) {
  switch (t.kind) {
    case TailModel::Kind::None:
    case TailModel::Kind::Zero:
      return 0.0;
    case TailModel::Kind::Geometric:
      if (t.rate >= 1.0) return kInf;
      return t.scale * std::pow(t.rate, static_cast<double>(j)) / (1.0 - t.rate);
    case TailModel::Kind::Polynomial:
      if (t.rate <= 1.0) return kInf;
      return t.scale * hurwitz_zeta(t.rate, static_cast<double>(std::max<int64_t>(j, 1)));
  }
  return 0.0;
}

double tail_model_weighted_sum_from(const TailModel& t, int64_t j) {
  switch (t.kind) {
    case TailModel::Kind::None:
    case TailModel::Kind::Zero:
      return 0.0;
    case TailModel::Kind::Geometric: {
      if (t.rate >= 1.0) return kInf;
      const double r = t.rate;
      const double jz = static_cast<double>(j);
      return t.scale * std::pow(r, jz) * (jz * (1.0 - r) + r) / ((1.0 - r) * (1.0 - r));
    }
    case TailModel::Kind::Polynomial:
      if (t.rate <= 2.0) return kInf;
      return t.scale * hurwitz_zeta(t.rate - 1.0, static_cast<double>(std::max<int64_t>(j, 1)));
  }
  return 0.0;
}

}  // namespace

double DecaySeries::sum_from(int64_t m) const {
  if (m < 0) m = 0;
  double s = 0.0;
  for (int64_t i = m; i < head_size(); ++i) s += head_[static_cast<std::size_t>(i)];
  const int64_t j = std::max(m, head_size());
  if (exact_) return s + exact_->abs_sum_from(j + exact_shift_) * exact_norm_;
  return s + tail_model_sum_from(tail_, j);
}

double DecaySeries::partial_sum(int64_t n) const {
  if (n < 0) return 0.0;
  double s = 0.0;
  const int64_t h = std::min(n + 1, head_size());
  for (int64_t i = 0; i < h; ++i) s += head_[static_cast<std::size_t>(i)];
  for (int64_t i = head_size(); i <= n; ++i) s += at(i);
  return s;
}

double DecaySeries::weighted_sum_from(int64_t m) const {
  if (m < 1) m = 1;
  double s = 0.0;
  for (int64_t i = m; i < head_size(); ++i)
    s += static_cast<double>(i) * head_[static_cast<std::size_t>(i)];
  const int64_t j = std::max(m, head_size());
  if (exact_) {
    const TailClass c = tail_sum_class();
    const bool summable =
        c.kind == TailClass::Kind::Zero || c.kind == TailClass::Kind::Geometric ||
        (c.kind == TailClass::Kind::PolyLog && power_log_series_converges(-c.t, -c.s));
    if (!summable) return kInf;
    double tail = 0.0;
    const int64_t cut = j + (1 << 17);
    for (int64_t i = j; i < cut; ++i) tail += static_cast<double>(i) * at(i);
    return s + tail;  // remainder negligible among the summable catalog tails
  }
  return s + tail_model_weighted_sum_from(tail_, j);
}

double DecaySeries::sum_se_from(int64_t m) const {
  if (m < 0) m = 0;
  double v = 0.0;
  for (int64_t i = m; i < head_size(); ++i) {
    const double se = head_se_[static_cast<std::size_t>(i)];
    v += se * se;
  }
  return std::sqrt(v);
}

TailClass DecaySeries::tail_sum_class() const {
  TailClass c;
  if (exact_) {
    using Kind = CoefficientSequence::Kind;
    const double p = exact_->parameter();
    switch (exact_->kind()) {
      case Kind::Explicit:
        c.kind = TailClass::Kind::Zero;
        return c;
      case Kind::Geometric:
        c.kind = TailClass::Kind::Geometric;
        c.rate = std::abs(p);
        return c;
      case Kind::Polynomial:
        if (p > 1.0) {
          c.kind = TailClass::Kind::PolyLog;
          c.t = p - 1.0;
        } else {
          c.kind = TailClass::Kind::Divergent;
        }
        return c;
      case Kind::LogDamped:
      case Kind::DyadicSparse:
        if (p > 1.0) {
          c.kind = TailClass::Kind::PolyLog;
          c.s = p - 1.0;
        } else {
          c.kind = TailClass::Kind::Divergent;
        }
        return c;
    }
  }
  switch (tail_.kind) {
    case TailModel::Kind::Zero:
      c.kind = TailClass::Kind::Zero;
      return c;
    case TailModel::Kind::Geometric:
      if (tail_.rate < 1.0) {
        c.kind = TailClass::Kind::Geometric;
        c.rate = tail_.rate;
      } else {
        c.kind = TailClass::Kind::Divergent;
      }
      return c;
    case TailModel::Kind::Polynomial:
      if (tail_.rate > 1.0) {
        c.kind = TailClass::Kind::PolyLog;
        c.t = tail_.rate - 1.0;
      } else {
        c.kind = TailClass::Kind::Divergent;
      }
      return c;
    case TailModel::Kind::None:
      c.kind = TailClass::Kind::Unknown;
      return c;
  }
  return c;
}

SeriesSums tail_sums(const DecaySeries& series, int64_t m) {
  SeriesSums s;
  s.theta_tail = series.sum_from(m);
  s.lambda = series.partial_sum(m);
  s.theta_se = series.sum_se_from(m);
  s.lambda_se = series.sum_se_from(0);
  s.horizon_limited = series.horizon_limited();
  return s;
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

std::string condition_name(ConditionId id) {
  switch (id) {
    case ConditionId::SummableProjections:
      return "theta-summable";
    case ConditionId::ResidualRateSeries:
      return "residual-rate-series";
    case ConditionId::SlowVariationSeries:
      return "slow-variation-series";
    case ConditionId::LogTailDecay:
      return "log-tail-decay";
    case ConditionId::SqrtTailSeries:
      return "sqrt-tail-series";
    case ConditionId::PairWeightedSum:
      return "pair-weighted-sum";
    case ConditionId::CouplingWeightedSum:
      return "coupling-weighted-sum";
    case ConditionId::GeometricContraction:
      return "geometric-contraction";
  }
  return "?";
}

ConditionId condition_from_name(const std::string& name) {
  for (ConditionId id : {ConditionId::SummableProjections, ConditionId::ResidualRateSeries,
                         ConditionId::SlowVariationSeries, ConditionId::LogTailDecay,
                         ConditionId::SqrtTailSeries, ConditionId::PairWeightedSum,
                         ConditionId::CouplingWeightedSum, ConditionId::GeometricContraction}) {
    if (condition_name(id) == name) return id;
  }
  throw std::invalid_argument("unknown condition: " + name);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::HoldsAtHorizon:
      return "holds-at-horizon";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

// An upper-bound ingredient can certify convergence but never divergence.
ConditionResult resolve(ConditionId id, bool converges_by_class, bool certain_divergence, double margin,
                        bool upper, std::string note) {
  ConditionResult r;
  r.id = id;
  r.margin = margin;
  if (converges_by_class) {
    r.verdict = Verdict::HoldsAtHorizon;
  } else if (certain_divergence && !upper) {
    r.verdict = Verdict::Violated;
  } else {
    r.verdict = Verdict::Inconclusive;
    if (upper && certain_divergence)
      note = note.empty() ? "upper-bound-ingredients" : note + ";upper-bound-ingredients";
  }
  r.note = std::move(note);
  return r;
}

}  // namespace

ConditionResult check_summable_projections(const DecaySeries& theta) {
  const TailClass c = theta.tail_sum_class();
  const bool diverges = c.kind == TailClass::Kind::Divergent;
  const bool unknown = c.kind == TailClass::Kind::Unknown;
  const double total = theta.sum_from(0);
  const double margin = std::isfinite(total) ? total : theta.partial_sum(theta.head_size() - 1);
  return resolve(ConditionId::SummableProjections, !diverges && !unknown && std::isfinite(total),
                 diverges, margin, theta.upper_bound(), unknown ? "horizon-limited" : "");
}

ConditionResult check_residual_rate_series(const DecaySeries& theta, double q) {
  if (q <= 1.0) throw std::invalid_argument("residual-rate-series: q must exceed 1");
  const double e = std::min(1.0, (q + 4.0) / (2.0 * q + 2.0));
  const double w = q / (q + 1.0);
  const TailClass c = theta.tail_sum_class();

  bool converges = false;
  bool certain = false;
  std::string note;
  switch (c.kind) {
    case TailClass::Kind::Zero:
    case TailClass::Kind::Geometric:
      converges = true;
      break;
    case TailClass::Kind::PolyLog:
      converges = power_log_series_converges(-e - c.t * w, -c.s * w);
      certain = !converges;
      break;
    case TailClass::Kind::Divergent:
      certain = true;
      break;
    case TailClass::Kind::Unknown:
      note = "horizon-limited";
      break;
  }
  const int64_t horizon = std::max<int64_t>(theta.head_size() * 4, 1024);
  double margin = 0.0;
  for (int64_t k = 1; k <= horizon; ++k) {
    const double tk = theta.sum_from(k);
    if (!std::isfinite(tk)) {
      margin = kInf;
      break;
    }
    margin += std::pow(static_cast<double>(k), -e) * std::pow(tk, w);
  }
  return resolve(ConditionId::ResidualRateSeries, converges, certain, margin, theta.upper_bound(),
                 std::move(note));
}

ConditionResult check_slow_variation_series(double alpha, double q, int ell_choice, double delta) {
  if (q <= 2.0) throw std::invalid_argument("slow-variation-series: q must exceed 2");
  if (delta <= 0.0) throw std::invalid_argument("slow-variation-series: delta must be positive");
  if (ell_choice != 1 && ell_choice != 2)
    throw std::invalid_argument("slow-variation-series: ell choice must be 1 or 2");
  if (alpha < 0.0 || alpha >= 1.0 / q)
    throw std::invalid_argument("slow-variation-series: alpha must lie in [0, 1/q)");

  const double p = (ell_choice == 1) ? -1.0 : -alpha * q - 1.0;
  const bool converges = power_log_series_converges(p, -(1.0 + delta));

  auto ell = [&](double n) {
    const double lg = std::log(n);
    const double llg = std::log(lg);
    const double log_pow = (ell_choice == 1) ? (1.0 / q - alpha) : (1.0 / q);
    return std::pow(lg, log_pow) * std::pow(llg, (1.0 + delta) / q);
  };
  double margin = 0.0;
  for (int k = 2; k <= 4096; ++k) {
    const double n = std::pow(2.0, static_cast<double>(k));
    margin += std::pow(static_cast<double>(k), -alpha * q) / std::pow(ell(n), q);
  }
  return resolve(ConditionId::SlowVariationSeries, converges, !converges, margin, false, "catalog-ell");
}

ConditionResult check_log_tail_decay(const DecaySeries& theta, double q) {
  const TailClass c = theta.tail_sum_class();
  bool converges = false;
  bool certain = false;
  std::string note;
  switch (c.kind) {
    case TailClass::Kind::Zero:
    case TailClass::Kind::Geometric:
      converges = true;
      break;
    case TailClass::Kind::PolyLog:
      // Theta_n^q log n bounded iff t > 0, or t = 0 and s >= 1/q
      converges = c.t > 0.0 || c.s >= 1.0 / q;
      certain = !converges;
      break;
    case TailClass::Kind::Divergent:
      certain = true;
      break;
    case TailClass::Kind::Unknown:
      note = "horizon-limited";
      break;
  }
  const int64_t horizon = std::max<int64_t>(theta.head_size() * 4, 256);
  double margin = 0.0;
  for (int64_t n = 2; n <= horizon; ++n) {
    const double tn = theta.sum_from(n);
    if (!std::isfinite(tn)) {
      margin = kInf;
      break;
    }
    margin = std::max(margin, std::pow(tn, q) * std::log(static_cast<double>(n)));
  }
  return resolve(ConditionId::LogTailDecay, converges, certain, margin, theta.upper_bound(),
                 std::move(note));
}

ConditionResult check_sqrt_tail_series(const CoefficientSequence& coeffs) {
  using Kind = CoefficientSequence::Kind;
  bool converges = false;
  switch (coeffs.kind()) {
    case Kind::Explicit:
    case Kind::Geometric:
      converges = true;
      break;
    case Kind::Polynomial:
      converges = coeffs.parameter() > 1.5;  // sqrt tail ~ i^{1/2 - beta}
      break;
    case Kind::LogDamped:
    case Kind::DyadicSparse:
      converges = false;  // sqrt tails decay slower than 1/i
      break;
  }
  const int64_t horizon = std::max<int64_t>(4 * (coeffs.lag() + 1), 256);
  double margin = 0.0;
  for (int64_t i = 1; i <= horizon; ++i) margin += std::sqrt(coeffs.sq_sum_from(i));
  return resolve(ConditionId::SqrtTailSeries, converges, !converges, margin, false, "");
}

namespace {

bool weighted_tail_converges(const DecaySeries& series) {
  const TailClass c = series.tail_sum_class();
  // T_m ~ m^-t (log m)^-s means v_k ~ k^{-t-1} (log k)^-s, so k v_k ~ k^-t
  switch (c.kind) {
    case TailClass::Kind::Zero:
    case TailClass::Kind::Geometric:
      return true;
    case TailClass::Kind::PolyLog:
      return power_log_series_converges(-c.t, -c.s);
    default:
      return false;
  }
}

}  // namespace

ConditionResult check_pair_weighted_sum(const DecaySeries& beta, const DecaySeries& alpha) {
  const double beta_part = beta.sum_from(1);
  const double alpha_part = alpha.weighted_sum_from(1);
  const TailClass bc = beta.tail_sum_class();
  const TailClass ac = alpha.tail_sum_class();
  const bool beta_ok = std::isfinite(beta_part) && bc.kind != TailClass::Kind::Unknown &&
                       bc.kind != TailClass::Kind::Divergent;
  const bool alpha_ok = std::isfinite(alpha_part) && weighted_tail_converges(alpha);
  const bool upper = beta.upper_bound() || alpha.upper_bound();
  const bool unknown = bc.kind == TailClass::Kind::Unknown || ac.kind == TailClass::Kind::Unknown;
  const double margin =
      (std::isfinite(beta_part) && std::isfinite(alpha_part)) ? beta_part + alpha_part : kInf;
  return resolve(ConditionId::PairWeightedSum, beta_ok && alpha_ok, !(beta_ok && alpha_ok) && !unknown,
                 margin, upper, unknown ? "horizon-limited" : "");
}

ConditionResult check_coupling_weighted_sum(const DecaySeries& beta) {
  const double value = beta.weighted_sum_from(1);
  const bool converges = std::isfinite(value) && weighted_tail_converges(beta);
  const bool unknown = beta.tail_sum_class().kind == TailClass::Kind::Unknown;
  return resolve(ConditionId::CouplingWeightedSum, converges, !converges && !unknown, value,
                 beta.upper_bound(), unknown ? "horizon-limited" : "");
}

// ---------------------------------------------------------------------------
// Geometric-moment contraction
// ---------------------------------------------------------------------------

GmcFit fit_gmc(const ProcessModel& model, double q, int n_max, int64_t replicates, uint64_t seed) {
  const IrfModel* irf = model.irf();
  if (irf == nullptr)
    throw std::invalid_argument(
        "fit_gmc: model has no innovation chain (iterated-function or linear-dependent required)");
  if (n_max < 4) throw std::invalid_argument("fit_gmc: n_max must be >= 4");
  if (q > model.innovations().q_max()) throw std::invalid_argument("fit_gmc: q exceeds q_max");

  const uint64_t root = derive_key(seed, kTagGmc);
  std::vector<double> rows(static_cast<std::size_t>(replicates * n_max));
  ensemble_fill_rows(rows, replicates, n_max, [&](int64_t r, std::span<double> row) {
    const uint64_t key = derive_key(root, static_cast<uint64_t>(r));
    InnovationStream base(model.innovations(), key, CopyTag::Original);
    InnovationStream prime(model.innovations(), key, CopyTag::Prime);
    const SourceView orig{.base = &base};
    const SourceView star{.base = &base, .prime = &prime, .coupling = Coupling::ReplaceAllPast};
    double xo = irf->initial_state, xs = irf->initial_state;
    for (int64_t u = irf->chain_start; u <= n_max; ++u) {
      xo = irf_step(irf->kernel, irf->rho, xo, orig.at(u));
      xs = irf_step(irf->kernel, irf->rho, xs, star.at(u));
      if (u >= 1) row[static_cast<std::size_t>(u - 1)] = std::pow(std::abs(xo - xs), q);
    }
  });

  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    double m = 0.0;
    for (int64_t r = 0; r < replicates; ++r) m += rows[static_cast<std::size_t>(r * n_max + n - 1)];
    m /= static_cast<double>(replicates);
    if (m > 0.0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() < 2) throw std::runtime_error("fit_gmc: degenerate chain, no positive difference moments");

  const LineFit f = fit_line(xs, ys);
  GmcFit fit;
  fit.c = std::exp(f.intercept);
  fit.r = std::exp(f.slope);
  fit.residual = std::sqrt(f.rss / static_cast<double>(xs.size()));
  fit.n_max = n_max;
  fit.replicates = replicates;
  return fit;
}

ConditionResult check_geometric_contraction(const GmcFit& fit) {
  ConditionResult r;
  r.id = ConditionId::GeometricContraction;
  r.margin = fit.r;
  if (fit.r < 1.0) {
    r.verdict = Verdict::HoldsAtHorizon;
  } else {
    r.verdict = Verdict::Inconclusive;
    r.note = "fitted-ratio-not-contracting";
  }
  return r;
}

// ---------------------------------------------------------------------------
// Analytic ingredient builders
// ---------------------------------------------------------------------------

namespace {

// Head of sum_j |a_j| * base * rate^{k-j}: the convolution bound for the
// linear-dependent variant. Decay follows the slower of the two factors.
DecaySeries convolution_bound_series(const CoefficientSequence& coeffs, double base, double rate,
                                     int head) {
  std::vector<double> h(static_cast<std::size_t>(head), 0.0);
  for (int k = 0; k < head; ++k) {
    double v = 0.0;
    for (int64_t j = 0; j <= std::min<int64_t>(k, coeffs.lag()); ++j)
      v += std::abs(coeffs.simulated_at(j)) * base * std::pow(rate, static_cast<double>(k - j));
    h[static_cast<std::size_t>(k)] = v;
  }
  return DecaySeries::from_estimates(std::move(h), {}, true);
}

double contraction_rate_for(const ProcessModel& model, double q) {
  const IrfModel* irf = model.irf();
  if (q <= 2.0 && irf->gmc_r2 > 0.0) return std::pow(irf->gmc_r2, 0.5);
  if (irf->gmc_r4 > 0.0) return std::pow(irf->gmc_r4, 0.25);
  return std::abs(irf->rho);
}

}  // namespace

std::optional<DecaySeries> theta_series_for(const ProcessModel& model, double q, int head) {
  const double norm = analytic_lq_norm(model.innovations(), q);
  if (const auto* lin = std::get_if<LinearIidModel>(&model.variant())) {
    (void)norm;
    return DecaySeries::exact_linear_ideal(lin->coeffs, norm, head);
  }
  if (const auto* tr = std::get_if<LipschitzTransformModel>(&model.variant())) {
    const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
    return DecaySeries::exact_linear_ideal(tr->coeffs, d.value, head, 0, /*upper_bound=*/true);
  }
  if (std::holds_alternative<IrfModel>(model.variant())) {
    const double rate = contraction_rate_for(model, q);
    const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
    std::vector<double> h(static_cast<std::size_t>(head));
    for (int i = 0; i < head; ++i) h[static_cast<std::size_t>(i)] = d.value * std::pow(rate, i);
    TailModel t;
    t.kind = TailModel::Kind::Geometric;
    t.scale = d.value;
    t.rate = rate;
    return DecaySeries(std::move(h), {}, t, true);
  }
  if (const auto* dep = std::get_if<LinearDependentModel>(&model.variant())) {
    const double rate = contraction_rate_for(model, q);
    const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
    return convolution_bound_series(dep->coeffs, d.value, rate, std::max(head, 128));
  }
  return std::nullopt;
}

std::optional<DecaySeries> beta_tilde_series_for(const ProcessModel& model, double q, int head) {
  const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
  if (const auto* lin = std::get_if<LinearIidModel>(&model.variant())) {
    // exact: the swapped difference is a_k (eps - eps')
    return DecaySeries::exact_linear_ideal(lin->coeffs, d.value, head, 0, !d.exact);
  }
  if (const auto* tr = std::get_if<LipschitzTransformModel>(&model.variant())) {
    return DecaySeries::exact_linear_ideal(tr->coeffs, d.value, head, 0, true);
  }
  if (std::holds_alternative<IrfModel>(model.variant())) {
    const double rate = std::abs(model.irf()->rho);  // pathwise contraction per step
    std::vector<double> h(static_cast<std::size_t>(head));
    for (int i = 0; i < head; ++i) h[static_cast<std::size_t>(i)] = d.value * std::pow(rate, i);
    TailModel t;
    t.kind = TailModel::Kind::Geometric;
    t.scale = d.value;
    t.rate = rate;
    const bool exact = model.irf()->kernel == IrfKernel::Ar1 && d.exact;
    return DecaySeries(std::move(h), {}, t, !exact);
  }
  if (const auto* dep = std::get_if<LinearDependentModel>(&model.variant())) {
    return convolution_bound_series(dep->coeffs, d.value, std::abs(dep->inner.rho), std::max(head, 128));
  }
  return std::nullopt;
}

std::optional<DecaySeries> alpha_tilde_series_for(const ProcessModel& model, double q, int head) {
  const DiffLqNorm d = analytic_diff_lq_norm(model.innovations(), q);
  if (const auto* lin = std::get_if<LinearIidModel>(&model.variant())) {
    // exact: one-step conditional means differ by a_{k+1} (eps - eps')
    return DecaySeries::exact_linear_ideal(lin->coeffs, d.value, head, 1, !d.exact);
  }
  // smoothing contraction bound: alpha_k <= 2 beta_{k+1}
  auto beta = beta_tilde_series_for(model, q, head + 1);
  if (!beta) return std::nullopt;
  std::vector<double> h(static_cast<std::size_t>(head));
  for (int i = 0; i < head; ++i) h[static_cast<std::size_t>(i)] = 2.0 * beta->at(i + 1);
  return DecaySeries::from_estimates(std::move(h), {}, true);
}

DecaySeries theta_series_from_profile(const DependenceProfile& profile) {
  std::vector<double> head(static_cast<std::size_t>(profile.max_lag) + 1, 0.0);
  std::vector<double> se(head.size(), 0.0);
  const ProfileEntry* b0 = profile.find(MeasureKind::BetaTilde, 0);
  if (b0 == nullptr) throw std::invalid_argument("theta_series_from_profile: beta-tilde lag 0 missing");
  head[0] = b0->estimate;
  se[0] = b0->se;
  for (int n = 1; n <= profile.max_lag; ++n) {
    const ProfileEntry* om = profile.find(MeasureKind::Omega, n);
    const ProfileEntry* al = profile.find(MeasureKind::AlphaTilde, n - 1);
    if (om == nullptr || al == nullptr)
      throw std::invalid_argument("theta_series_from_profile: sandwich ingredients missing at lag " +
                                  std::to_string(n));
    const ThetaBracket b = theta_sandwich(*om, *al);
    head[static_cast<std::size_t>(n)] = b.upper;
    se[static_cast<std::size_t>(n)] = b.upper_se;
  }
  return DecaySeries::from_estimates(std::move(head), std::move(se), /*upper_bound=*/true);
}

DecaySeries measure_series_from_profile(const DependenceProfile& profile, MeasureKind kind) {
  std::vector<double> head(static_cast<std::size_t>(profile.max_lag) + 1, 0.0);
  std::vector<double> se(head.size(), 0.0);
  for (int k = 0; k <= profile.max_lag; ++k) {
    const ProfileEntry* e = profile.find(kind, k);
    if (e == nullptr) {
      if (kind == MeasureKind::Omega && k == 0) continue;  // omega starts at 1
      throw std::invalid_argument("measure_series_from_profile: missing " + measure_kind_name(kind) +
                                  " at lag " + std::to_string(k));
    }
    head[static_cast<std::size_t>(k)] = e->estimate;
    se[static_cast<std::size_t>(k)] = e->se;
  }
  return DecaySeries::from_estimates(std::move(head), std::move(se), false);
}

}  // namespace martsim
