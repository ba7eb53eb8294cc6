#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "martsim/martingale.hpp"

namespace martsim {

// Normalizing rate functions, evaluable for n >= 16 (log log n positive).
struct RateFunction {
  enum class Id { Marcinkiewicz, IteratedLog, SipChi, SipNu, PolyLog };
  Id id = Id::Marcinkiewicz;
  double q = 2.0;
  double gamma = 0.5;
  double log_pow = 0.0;
  double loglog_pow = 0.0;

  double operator()(double n) const;

  static RateFunction marcinkiewicz(double q);  // n^{1/q}
  static RateFunction iterated_log();           // sqrt(2 n log log n)
  // n^{1/q} (log n)^{1/2} for 2 < q < 4, n^{1/4} (log n)^{1/2} (log log n)^{1/4} for q >= 4
  static RateFunction sip_chi(double q);
  // n^{1/q} (log n)^{1/2 + 1/q} (log log n)^{2/q}
  static RateFunction sip_nu(double q);
  static RateFunction poly_log(double gamma, double log_pow, double loglog_pow);
};

// ---------------------------------------------------------------------------
// Path ensembles
// ---------------------------------------------------------------------------

// Per-length samples of the endpoint and the running maximum of a path
// functional, over a replicate ensemble.
struct PathMoments {
  std::vector<int64_t> lengths;
  std::vector<std::vector<double>> end_values;  // [length index][replicate]
  std::vector<std::vector<double>> max_values;  // [length index][replicate], max |.|
};

PathMoments sample_path_moments(const ProcessModel& model, std::span<const int64_t> lengths,
                                int64_t replicates, uint64_t seed);

// Residuals S - M of the closed-form linear construction.
PathMoments sample_residual_moments(const CoefficientSequence& coeffs, const InnovationSpec& spec,
                                    std::span<const int64_t> lengths, int64_t replicates,
                                    uint64_t seed);

// ---------------------------------------------------------------------------
// Dyadic maximal inequality
// ---------------------------------------------------------------------------

struct DyadicBlockNorms {
  int d = 0;
  double q = 2.0;
  std::vector<std::vector<double>> norms;  // norms[r][m], m < 2^{d-r}
};

// sum_r (sum_m ||block||_q^q)^{1/q}; throws when a level or block is missing.
double dyadic_block_rhs(const DyadicBlockNorms& blocks);

struct MaximalDyadicResult {
  double rhs = 0.0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double ratio = 0.0;
};

// Monte Carlo block norms and running maximum on 2^d steps.
MaximalDyadicResult verify_maximal_dyadic(const ProcessModel& model, double q, int d,
                                          int64_t replicates, uint64_t seed);

// ---------------------------------------------------------------------------
// Dyadic exceedance sums
// ---------------------------------------------------------------------------

// Delta_q = sum_j (2^{-j} ||S_{2^j}||_q^q)^{1/(q+1)} with a fitted tail;
// divergent when the summands do not decay.
struct ExceedanceDelta {
  double value = 0.0;
  bool divergent = false;
};
ExceedanceDelta exceedance_delta(std::span<const double> scale_norms, double q);

struct ExceedanceResult {
  ExceedanceDelta delta;
  double bound = 0.0;       // 2 delta^{-q} Delta^{q+1}
  double mean_count = 0.0;  // dyadic scales exceeded per path
  double count_se = 0.0;
  int64_t total_count = 0;
  int64_t paths = 0;
};

// maxima_by_scale[j][p] = max_{k <= 2^j} |path p|; threshold 2^{j/q} * delta.
ExceedanceResult verify_exceedance_sum(const std::vector<std::vector<double>>& maxima_by_scale,
                                       std::span<const double> scale_norms, double q, double delta);

// ---------------------------------------------------------------------------
// Law of the iterated logarithm
// ---------------------------------------------------------------------------

// One-sided per-path statistic max_n path_n / sqrt(2 n log log n); the
// sign-flipped variant (the same statistic on -path) has the same
// distribution, which the two-sidedness checks compare.
struct LilSummary {
  std::vector<double> stats;
  double median = 0.0;
  double iqr = 0.0;
};

struct LilExperiment {
  LilSummary sums;
  LilSummary sums_flipped;  // statistic of -S
  LilSummary martingale;    // closed-form linear oracle when available
  bool has_martingale = false;
  double sigma = 0.0;
  int64_t n_min = 16;
  int64_t n_max = 0;
  int64_t paths = 0;
};

// Requires N >= 2^16 and n_min >= 16. sigma = 0 takes the closed-form scale
// of a linear model (and errors otherwise).
LilExperiment lil_experiment(const ProcessModel& model, int64_t n_max, int64_t paths, int64_t n_min,
                             uint64_t seed, double sigma = 0.0);

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

struct RateFitResult {
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double quantile = 0.99;
  int64_t paths = 0;
};

// Fitted exponent of the chosen quantile of per-path maxima against length.
// Needs >= 5 scales and >= 200 paths.
RateFitResult rate_fit(const std::vector<std::vector<double>>& maxima_by_scale,
                       std::span<const int64_t> lengths, double quantile_level);

// ---------------------------------------------------------------------------
// Distributional check
// ---------------------------------------------------------------------------

struct CltResult {
  double ks = 0.0;
  bool pass = false;
  int64_t paths = 0;
  double sigma = 0.0;
};

// Kolmogorov-Smirnov distance of S_n / (sigma sqrt(n)) against the standard
// normal, pass at 0.05. Requires n >= 1024, paths >= 1000, sigma > 0.
CltResult clt_check(const ProcessModel& model, int64_t n, int64_t paths, double sigma, uint64_t seed);

// Sample L^q norm of the nested martingale increment at lag 1 (the scale
// constants sigma and c_q for models without a closed form).
LqEstimate estimate_increment_norm(const ProcessModel& model, double q, int horizon, int inner,
                                   int64_t replicates, uint64_t seed);
LqEstimate estimate_sigma_nested(const ProcessModel& model, int horizon, int inner,
                                 int64_t replicates, uint64_t seed);

}  // namespace martsim
