#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "martsim/coupling.hpp"
#include "martsim/models.hpp"

namespace martsim {

// ---------------------------------------------------------------------------
// L^q norm estimation
// ---------------------------------------------------------------------------

struct LqEstimate {
  double estimate = 0.0;
  double se = 0.0;  // delta-method standard error
};

// (mean |z|^q)^{1/q} from precomputed samples; (0,0) when all samples vanish.
LqEstimate lq_norm_mc(std::span<const double> samples, double q);

// Sampler form: draws replicate r from the callable. Requires replicates >= 100.
LqEstimate estimate_lq_norm(const std::function<double(int64_t)>& sampler, double q, int64_t replicates);

// ---------------------------------------------------------------------------
// Dependence profiles
// ---------------------------------------------------------------------------

enum class MeasureKind {
  ThetaExact,
  ThetaSandwich,
  Omega,
  AlphaTilde,
  AlphaStar,
  BetaTilde,
  BetaStar,
};
std::string measure_kind_name(MeasureKind k);
MeasureKind measure_kind_from_name(const std::string& name);

struct ProfileEntry {
  int lag = 0;
  MeasureKind kind = MeasureKind::BetaTilde;
  double q = 2.0;
  double estimate = 0.0;
  double se = 0.0;
  int64_t replicates = 0;
};

ProfileEntry estimate_beta(const ProcessModel& model, double q, int k, int64_t replicates,
                           Coupling coupling, uint64_t seed);
ProfileEntry estimate_alpha(const ProcessModel& model, double q, int k, int64_t replicates, int inner,
                            Coupling coupling, uint64_t seed);
ProfileEntry estimate_omega(const ProcessModel& model, double q, int n, int64_t replicates, int inner,
                            uint64_t seed);

// Bracket for the projection norm from the predictive measure and the shifted
// one-step measure: theta_n in [omega_n / 2, min(omega_n, alpha_{n-1})].
struct ThetaBracket {
  double lower = 0.0;
  double upper = 0.0;
  double lower_se = 0.0;
  double upper_se = 0.0;
};
ThetaBracket theta_sandwich(const ProfileEntry& omega_n, const ProfileEntry& alpha_prev);

// Per-lag estimates for one moment order, with Monte Carlo standard errors.
struct DependenceProfile {
  double q = 2.0;
  int max_lag = 0;
  int64_t replicates = 0;
  int inner = 0;
  uint64_t seed = 0;
  std::vector<ProfileEntry> entries;

  const ProfileEntry* find(MeasureKind kind, int lag) const;
  std::vector<double> values(MeasureKind kind) const;  // lag 0..max_lag (omega: 1..max_lag padded at 0)
};

// Columnar text format: lag,kind,q,estimate,se,replicates
void write_profile(std::ostream& os, const DependenceProfile& profile);
DependenceProfile read_profile(std::istream& is);

struct ProfileRequest {
  std::vector<double> qs{2.0};
  int max_lag = 10;
  int64_t replicates = 10'000;
  int inner = 512;
  uint64_t seed = 1;
  bool tilde = true;
  bool star = true;
  bool omega = true;
};

// One profile per q; coupled difference samples are shared across the q list.
std::vector<DependenceProfile> build_profiles(const ProcessModel& model, const ProfileRequest& request);

// ---------------------------------------------------------------------------
// Decay series: per-lag values with an analytic or fitted continuation
// ---------------------------------------------------------------------------

struct TailModel {
  enum class Kind { None, Zero, Geometric, Polynomial };
  Kind kind = Kind::None;
  double scale = 0.0;     // value ~ scale * rate^i (geometric) or scale * i^-rate (polynomial)
  double rate = 0.0;
  double residual = 0.0;
  int fit_start = 0;
};

// Fit on the trailing half of the head values (geometric vs polynomial by
// residual, zeros excluded).
TailModel fit_tail(std::span<const double> head);
double tail_model_value(const TailModel& t, int64_t i);

// Asymptotic class of the tail sums T_m = sum_{i>=m} v_i.
struct TailClass {
  enum class Kind { Zero, Geometric, PolyLog, Divergent, Unknown };
  Kind kind = Kind::Unknown;
  double t = 0.0;  // T_m ~ m^-t (log m)^-s
  double s = 0.0;
  double rate = 0.0;  // geometric ratio
};

// Nonnegative per-lag sequence (theta, omega, alpha, beta, ...) with head
// values, standard errors, provenance, and a continuation beyond the head.
class DecaySeries {
 public:
  DecaySeries(std::vector<double> head, std::vector<double> head_se, TailModel tail, bool upper_bound);

  // |a_i| * norm over the truncated (simulated) sequence; zero tail.
  static DecaySeries exact_linear_truncated(const CoefficientSequence& coeffs, double norm,
                                            int shift = 0);
  // |a_{i+shift}| * norm of the untruncated sequence with analytic tails.
  static DecaySeries exact_linear_ideal(const CoefficientSequence& coeffs, double norm, int head,
                                        int shift = 0, bool upper_bound = false);
  // From per-lag estimates; tail fitted on the isotonic-adjusted head.
  static DecaySeries from_estimates(std::vector<double> head, std::vector<double> se, bool upper_bound);

  int64_t head_size() const { return static_cast<int64_t>(head_.size()); }
  bool upper_bound() const { return upper_; }
  bool horizon_limited() const;
  const TailModel& tail() const { return tail_; }

  double at(int64_t i) const;
  double se_at(int64_t i) const;
  double sum_from(int64_t m) const;        // sum_{i>=m} v_i; +inf when divergent
  double partial_sum(int64_t n) const;     // sum_{i=0..n}; 0 for n < 0
  double weighted_sum_from(int64_t m) const;  // sum_{i>=m} i * v_i
  double sum_se_from(int64_t m) const;     // error propagated over head terms
  TailClass tail_sum_class() const;        // asymptotics of sum_{i>=m}

 private:
  std::vector<double> head_;
  std::vector<double> head_se_;
  TailModel tail_;
  bool upper_ = false;
  std::optional<CoefficientSequence> exact_;  // analytic continuation
  double exact_norm_ = 0.0;
  int exact_shift_ = 0;
};

struct SeriesSums {
  double theta_tail = 0.0;   // Theta_m
  double lambda = 0.0;       // Lambda_m
  double theta_se = 0.0;
  double lambda_se = 0.0;
  bool horizon_limited = false;
};
SeriesSums tail_sums(const DecaySeries& series, int64_t m);

// ---------------------------------------------------------------------------
// Summability conditions
// ---------------------------------------------------------------------------

enum class ConditionId {
  SummableProjections,   // sum theta_i < inf
  ResidualRateSeries,    // sum k^-e Theta_k^{q/(q+1)} < inf, e = min(1, (q+4)/(2q+2))
  SlowVariationSeries,   // sum k^{-alpha q} / ell(2^k)^q < inf, catalog ell
  LogTailDecay,          // Theta_n^q = O(1 / log n)
  SqrtTailSeries,        // sum_i sqrt(sum_{j>=i} a_j^2) < inf
  PairWeightedSum,       // sum (beta_k + k alpha_k) < inf
  CouplingWeightedSum,   // sum k beta_k < inf
  GeometricContraction,  // fitted contraction ratio < 1
};
std::string condition_name(ConditionId id);
ConditionId condition_from_name(const std::string& name);

enum class Verdict { HoldsAtHorizon, Violated, Inconclusive };
std::string verdict_name(Verdict v);

struct ConditionResult {
  ConditionId id = ConditionId::SummableProjections;
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;  // value of the series or its partial sum
  std::string note;
};

ConditionResult check_summable_projections(const DecaySeries& theta);
ConditionResult check_residual_rate_series(const DecaySeries& theta, double q);
// Catalog slowly varying choices: 1 -> (log n)^{1/q - alpha} (log log n)^{(1+delta)/q},
// 2 -> (log n)^{1/q} (log log n)^{(1+delta)/q}.
ConditionResult check_slow_variation_series(double alpha, double q, int ell_choice, double delta);
ConditionResult check_log_tail_decay(const DecaySeries& theta, double q);
ConditionResult check_sqrt_tail_series(const CoefficientSequence& coeffs);
ConditionResult check_pair_weighted_sum(const DecaySeries& beta, const DecaySeries& alpha);
ConditionResult check_coupling_weighted_sum(const DecaySeries& beta);

// ---------------------------------------------------------------------------
// Geometric-moment contraction fit
// ---------------------------------------------------------------------------

struct GmcFit {
  double c = 0.0;
  double r = 0.0;
  double residual = 0.0;
  int n_max = 0;
  int64_t replicates = 0;
};

// Least-squares fit of log E|G(at n) - G*(at n)|^q against n over 1..n_max for
// the innovation chain of an iterated-function or linear-dependent model.
GmcFit fit_gmc(const ProcessModel& model, double q, int n_max, int64_t replicates, uint64_t seed);

ConditionResult check_geometric_contraction(const GmcFit& fit);

// ---------------------------------------------------------------------------
// Analytic ingredient builders (exact for linear-iid, flagged upper bounds
// for the other variants; empty when no analytic route exists)
// ---------------------------------------------------------------------------

std::optional<DecaySeries> theta_series_for(const ProcessModel& model, double q, int head);
std::optional<DecaySeries> beta_tilde_series_for(const ProcessModel& model, double q, int head);
std::optional<DecaySeries> alpha_tilde_series_for(const ProcessModel& model, double q, int head);

// Sandwich-based series from Monte Carlo profiles (upper bounds).
DecaySeries theta_series_from_profile(const DependenceProfile& profile);
DecaySeries measure_series_from_profile(const DependenceProfile& profile, MeasureKind kind);

}  // namespace martsim
