#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "martsim/estimators.hpp"

namespace martsim {

// Burkholder constant 18 q^{3/2} (q-1)^{-1/2}, taken as exactly 1 at q = 2.
// Throws for q <= 1.
double b_q(double q);

// Residual scale of the linear closed form:
//   xi_n^2 = sum_{i=1..n} A_i^2 + sum_{i>n} (A_i - A_{i-n})^2,
// with A_j the coefficient tail sums. Closed form for geometric sequences,
// windowed summation with a small analytic remainder otherwise.
double xi_n(const CoefficientSequence& coeffs, int64_t n);

enum class DecompositionKind { ClosedFormLinear, NestedMc };

// Paths S, M, R = S - M with the scale constants of the approximating
// martingale. Index range 0..n; increments D_k = M_k - M_{k-1}.
struct MartingaleDecomposition {
  std::vector<double> s;
  std::vector<double> m;
  std::vector<double> r;
  double q = 2.0;
  DecompositionKind kind = DecompositionKind::ClosedFormLinear;
  double sigma = 0.0;  // ||D||_2, closed form or path estimate
  double c_q = 0.0;    // ||D||_q
  double truncation_error = 0.0;
  int horizon = 0;
  int inner = 0;

  double increment(int64_t k) const { return m[static_cast<std::size_t>(k)] - m[static_cast<std::size_t>(k - 1)]; }
  void write_columns(std::ostream& os) const;  // k,s,m,r
};

// Exact linear construction: M_k = A_0 sum_{i<=k} eps_i. Throws when the
// coefficient tail sums do not exist.
MartingaleDecomposition linear_decomposition(const CoefficientSequence& coeffs,
                                             const InnovationStream& stream, int64_t n, double q);

// Nested Monte Carlo construction of D_k = sum_{m=0..H} (projection at k of
// the value at lag k+m), each projection estimated as the difference between
// the conditional mean given history up to k and the slot-k marginalized one,
// with shared future draws and mean-centered slot draws. Refuses when the
// summability condition on the projection norms is certainly violated.
MartingaleDecomposition nested_decomposition(const ProcessModel& model, const InnovationStream& stream,
                                             int64_t n, double q, int horizon, int inner,
                                             uint64_t seed);

// Default nested horizon: first lag where the analytic projection-norm tail
// drops below 1e-3 of the series total (capped at 512).
int default_nested_horizon(const ProcessModel& model, double q);

struct BoundEvaluation {
  std::string inequality;
  int64_t n = 0;
  double q = 2.0;
  double rhs = 0.0;
  bool upper_ingredients = false;  // bound built from upper bounds: still a valid bound
  bool horizon_limited = false;
};

// Moment bound on ||S_n||_q:  B_q (sum_i (Lambda_{i+n} - Lambda_i)^{q'})^{1/q'}.
BoundEvaluation rhs_sum_moment(const DecaySeries& theta, int64_t n, double q);
// Approximation-error bound on ||S_n - M_n||_q: (3 B_q^{q'} sum_{j<=n} Theta_j^{q'})^{1/q'}.
BoundEvaluation rhs_residual_moment(const DecaySeries& theta, int64_t n, double q);
// Maximum bound on ||max_k |S_k|||_q: (q B_q / (q-1)) n^{1/q'} Theta_0.
BoundEvaluation rhs_max_moment(const DecaySeries& theta, int64_t n, double q);

// Bounds on ||E(D_k^2 | history at 0) - sigma^2||_{q/2} and ||P_0(D_k^2)||_{q/2}:
//   8 c_q beta*_k + 8 c_q sum_{i>=k} min(alpha*_i, alpha_{i-k})   and
//   8 c_q beta_k  + 8 c_q sum_{i>=k} alpha_i.
// Requires q > 2.
std::pair<BoundEvaluation, BoundEvaluation> conditional_variance_bounds(
    double c_q, int k, const DecaySeries& beta_star, const DecaySeries& alpha_star,
    const DecaySeries& beta_tilde, const DecaySeries& alpha_tilde, double q);

}  // namespace martsim
