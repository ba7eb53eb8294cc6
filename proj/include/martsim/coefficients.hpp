#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace martsim {

// Square-summable coefficient sequences (a_i)_{i>=0} for linear filters.
//
// Catalog:
//   explicit     given list a_0..a_L, zero beyond
//   geometric    a_i = rho^i, |rho| < 1
//   polynomial   a_i = (1+i)^-beta, beta > 1/2
//   log-damped   a_i = i^-1 (log i)^-alpha for i >= 2, a_0 = a_1 = 0, alpha > 1/2
//   dyadic-sparse  a_i = k^-c when i = 2^k (k >= 1), else 0, c > 1/2
//
// Simulation truncates at the lag L; `at` and the tail sums describe the
// untruncated sequence so that summability verdicts are about the ideal
// process, with the truncation error reported separately.
class CoefficientSequence {
 public:
  enum class Kind { Explicit, Geometric, Polynomial, LogDamped, DyadicSparse };

  static CoefficientSequence explicit_list(std::vector<double> values);
  static CoefficientSequence geometric(double rho, int lag = -1);
  static CoefficientSequence polynomial(double beta, int lag = -1);
  static CoefficientSequence log_damped(double alpha, int lag = -1);
  static CoefficientSequence dyadic_sparse(double c, int lag = -1);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  int lag() const { return lag_; }
  std::string describe() const;

  // Exact a_i of the untruncated sequence, any i >= 0.
  double at(int64_t i) const;
  // Coefficients used in simulation: a_0..a_L.
  std::span<const double> simulated() const { return simulated_; }
  double simulated_at(int64_t i) const {
    return (i >= 0 && i <= lag_) ? simulated_[static_cast<std::size_t>(i)] : 0.0;
  }

  bool abs_summable() const;
  // sum_{i>=j} |a_i|; +inf when not absolutely summable.
  double abs_sum_from(int64_t j) const;
  // sum_{i>=j} a_i^2 (finite for every catalog member).
  double sq_sum_from(int64_t j) const;
  // A_j = sum_{i>=j} a_i. Throws when the sum does not exist.
  double tail_sum(int64_t j) const;
  bool tail_sum_exists() const;
  // A_j of the truncated (simulated) sequence: sum_{i=j..L} a_i.
  double simulated_tail_sum(int64_t j) const;

  // Documented truncation error of the simulation: sum_{i>L} a_i^2.
  double truncation_sq_tail() const { return sq_sum_from(lag_ + 1); }

 private:
  CoefficientSequence(Kind kind, double param, int lag, std::vector<double> values);

  Kind kind_ = Kind::Explicit;
  double param_ = 0.0;
  int lag_ = 0;
  std::vector<double> simulated_;      // a_0..a_L
  std::vector<double> sim_tail_sums_;  // A_j of the truncated sequence, j = 0..L+1
};

// Smallest lag on a doubling grid (capped at 4096) whose truncation error is
// below 1e-3 of the absolute sum, or 1e-6 of the square sum when the sequence
// is not absolutely summable.
int default_truncation_lag(CoefficientSequence::Kind kind, double param);

}  // namespace martsim
