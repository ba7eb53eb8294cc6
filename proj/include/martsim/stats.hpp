#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace martsim {

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased (n-1)
double sample_sd(std::span<const double> xs);

// Empirical p-quantile with linear interpolation between order statistics.
// Sorts a copy.
double quantile(std::vector<double> xs, double p);

double normal_cdf(double x);

// Inverse standard normal CDF, Wichura's AS 241 (PPND16), ~1e-15 relative
// accuracy. Odd around p = 0.5.
double normal_quantile(double p);

// One-sample Kolmogorov-Smirnov distance against the standard normal CDF.
double ks_distance_normal(std::vector<double> xs);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::vector<double> xs, std::vector<double> ys);

// Least-squares fit y ~ intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;  // residual sum of squares
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Least-squares nonincreasing fit (pool adjacent violators).
std::vector<double> isotonic_nonincreasing(std::span<const double> y);

// Hurwitz zeta: sum_{k>=0} (a+k)^-s for s > 1, a > 0 (Euler-Maclaurin).
double hurwitz_zeta(double s, double a);

// Whether sum_k k^p (log k)^s converges.
bool power_log_series_converges(double p, double s);

}  // namespace martsim
