#include "martsim/coefficients.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "martsim/stats.hpp"

namespace martsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

double exact_at(CoefficientSequence::Kind kind, double p, int64_t i) {
  using Kind = CoefficientSequence::Kind;
  switch (kind) {
    case Kind::Explicit:
      return 0.0;  // handled by the caller
    case Kind::Geometric:
      return std::pow(p, static_cast<double>(i));
    case Kind::Polynomial:
      return std::pow(1.0 + static_cast<double>(i), -p);
    case Kind::LogDamped: {
      if (i < 2) return 0.0;
      const double x = static_cast<double>(i);
      return std::pow(std::log(x), -p) / x;
    }
    case Kind::DyadicSparse: {
      if (i < 2) return 0.0;
      if ((i & (i - 1)) != 0) return 0.0;
      int k = 0;
      for (int64_t v = i; v > 1; v >>= 1) ++k;
      return std::pow(static_cast<double>(k), -p);
    }
  }
  return 0.0;
}

// sum_{i>=j} i^-1 (log i)^-alpha, j >= 2: direct sum plus an integral tail
// (log N)^{1-alpha}/(alpha-1).
double log_damped_tail(double alpha, int64_t j) {
  if (alpha <= 1.0) return kInf;
  const int64_t lo = std::max<int64_t>(j, 2);
  const int64_t cut = std::max<int64_t>(lo, 1 << 20);
  double s = 0.0;
  for (int64_t i = lo; i < cut; ++i) s += std::pow(std::log(static_cast<double>(i)), -alpha) / static_cast<double>(i);
  const double ln = std::log(static_cast<double>(cut));
  s += std::pow(ln, 1.0 - alpha) / (alpha - 1.0);
  s += 0.5 * std::pow(ln, -alpha) / static_cast<double>(cut);
  return s;
}

// Same with the summand squared: i^-2 (log i)^-2alpha.
double log_damped_sq_tail(double alpha, int64_t j) {
  const int64_t lo = std::max<int64_t>(j, 2);
  const int64_t cut = std::max<int64_t>(lo, 1 << 16);
  double s = 0.0;
  for (int64_t i = lo; i < cut; ++i) {
    const double x = static_cast<double>(i);
    s += std::pow(std::log(x), -2.0 * alpha) / (x * x);
  }
  const double x = static_cast<double>(cut);
  s += std::pow(std::log(x), -2.0 * alpha) / x;  // integral bound of the remainder
  return s;
}

int64_t first_dyadic_k(int64_t j) {
  // smallest k >= 1 with 2^k >= j
  int64_t k = 1;
  while ((int64_t{1} << k) < j) ++k;
  return k;
}

}  // namespace

CoefficientSequence::CoefficientSequence(Kind kind, double param, int lag, std::vector<double> values)
    : kind_(kind), param_(param), lag_(lag), simulated_(std::move(values)) {
  sim_tail_sums_.assign(simulated_.size() + 1, 0.0);
  for (std::size_t j = simulated_.size(); j-- > 0;) sim_tail_sums_[j] = sim_tail_sums_[j + 1] + simulated_[j];
}

CoefficientSequence CoefficientSequence::explicit_list(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("coefficients: explicit list must be nonempty");
  const int lag = static_cast<int>(values.size()) - 1;
  return CoefficientSequence(Kind::Explicit, 0.0, lag, std::move(values));
}

namespace {
std::vector<double> materialize(CoefficientSequence::Kind kind, double p, int lag) {
  std::vector<double> v(static_cast<std::size_t>(lag) + 1);
  for (int i = 0; i <= lag; ++i) v[static_cast<std::size_t>(i)] = exact_at(kind, p, i);
  return v;
}
}  // namespace

CoefficientSequence CoefficientSequence::geometric(double rho, int lag) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("coefficients: geometric needs |rho| < 1");
  if (lag < 0) lag = default_truncation_lag(Kind::Geometric, rho);
  return CoefficientSequence(Kind::Geometric, rho, lag, materialize(Kind::Geometric, rho, lag));
}

CoefficientSequence CoefficientSequence::polynomial(double beta, int lag) {
  if (!(beta > 0.5)) throw std::invalid_argument("coefficients: polynomial needs beta > 1/2");
  if (lag < 0) lag = default_truncation_lag(Kind::Polynomial, beta);
  return CoefficientSequence(Kind::Polynomial, beta, lag, materialize(Kind::Polynomial, beta, lag));
}

CoefficientSequence CoefficientSequence::log_damped(double alpha, int lag) {
  if (!(alpha > 0.5)) throw std::invalid_argument("coefficients: log-damped needs alpha > 1/2");
  if (lag < 0) lag = default_truncation_lag(Kind::LogDamped, alpha);
  return CoefficientSequence(Kind::LogDamped, alpha, lag, materialize(Kind::LogDamped, alpha, lag));
}

CoefficientSequence CoefficientSequence::dyadic_sparse(double c, int lag) {
  if (!(c > 0.5)) throw std::invalid_argument("coefficients: dyadic-sparse needs c > 1/2");
  if (lag < 0) lag = default_truncation_lag(Kind::DyadicSparse, c);
  return CoefficientSequence(Kind::DyadicSparse, c, lag, materialize(Kind::DyadicSparse, c, lag));
}

std::string CoefficientSequence::describe() const {
  switch (kind_) {
    case Kind::Explicit:
      return "explicit(" + std::to_string(lag_ + 1) + ")";
    case Kind::Geometric:
      return "geometric(" + fmt_g(param_) + ")";
    case Kind::Polynomial:
      return "polynomial(" + fmt_g(param_) + ")";
    case Kind::LogDamped:
      return "log-damped(" + fmt_g(param_) + ")";
    case Kind::DyadicSparse:
      return "dyadic-sparse(" + fmt_g(param_) + ")";
  }
  return "?";
}

double CoefficientSequence::at(int64_t i) const {
  if (i < 0) return 0.0;
  if (kind_ == Kind::Explicit) return simulated_at(i);
  return exact_at(kind_, param_, i);
}

bool CoefficientSequence::abs_summable() const {
  switch (kind_) {
    case Kind::Explicit:
    case Kind::Geometric:
      return true;
    case Kind::Polynomial:
      return param_ > 1.0;
    case Kind::LogDamped:
    case Kind::DyadicSparse:
      return param_ > 1.0;
  }
  return false;
}

double CoefficientSequence::abs_sum_from(int64_t j) const {
  if (j < 0) j = 0;
  switch (kind_) {
    case Kind::Explicit: {
      double s = 0.0;
      for (int64_t i = j; i <= lag_; ++i) s += std::abs(simulated_[static_cast<std::size_t>(i)]);
      return s;
    }
    case Kind::Geometric: {
      const double r = std::abs(param_);
      return std::pow(r, static_cast<double>(j)) / (1.0 - r);
    }
    case Kind::Polynomial:
      if (param_ <= 1.0) return kInf;
      return hurwitz_zeta(param_, static_cast<double>(j) + 1.0);
    case Kind::LogDamped:
      return log_damped_tail(param_, j);
    case Kind::DyadicSparse: {
      if (param_ <= 1.0) return kInf;
      return hurwitz_zeta(param_, static_cast<double>(first_dyadic_k(std::max<int64_t>(j, 2))));
    }
  }
  return kInf;
}

double CoefficientSequence::sq_sum_from(int64_t j) const {
  if (j < 0) j = 0;
  switch (kind_) {
    case Kind::Explicit: {
      double s = 0.0;
      for (int64_t i = j; i <= lag_; ++i) {
        const double a = simulated_[static_cast<std::size_t>(i)];
        s += a * a;
      }
      return s;
    }
    case Kind::Geometric: {
      const double r2 = param_ * param_;
      return std::pow(r2, static_cast<double>(j)) / (1.0 - r2);
    }
    case Kind::Polynomial:
      return hurwitz_zeta(2.0 * param_, static_cast<double>(j) + 1.0);
    case Kind::LogDamped:
      return log_damped_sq_tail(param_, j);
    case Kind::DyadicSparse:
      return hurwitz_zeta(2.0 * param_, static_cast<double>(first_dyadic_k(std::max<int64_t>(j, 2))));
  }
  return kInf;
}

bool CoefficientSequence::tail_sum_exists() const {
  // Signed tails: absolute summability is what the catalog can certify.
  return abs_summable();
}

double CoefficientSequence::tail_sum(int64_t j) const {
  if (!tail_sum_exists()) throw std::domain_error("coefficients: tail sum A_j does not exist for " + describe());
  if (j < 0) j = 0;
  switch (kind_) {
    case Kind::Explicit:
      return simulated_tail_sum(j);
    case Kind::Geometric:
      return std::pow(param_, static_cast<double>(j)) / (1.0 - param_);
    case Kind::Polynomial:
    case Kind::LogDamped:
    case Kind::DyadicSparse:
      return abs_sum_from(j);  // nonnegative terms
  }
  return 0.0;
}

double CoefficientSequence::simulated_tail_sum(int64_t j) const {
  if (j < 0) j = 0;
  if (j > lag_) return 0.0;
  return sim_tail_sums_[static_cast<std::size_t>(j)];
}

int default_truncation_lag(CoefficientSequence::Kind kind, double param) {
  using Kind = CoefficientSequence::Kind;
  auto abs_tail = [&](int64_t j) -> double {
    switch (kind) {
      case Kind::Geometric:
        return std::pow(std::abs(param), static_cast<double>(j)) / (1.0 - std::abs(param));
      case Kind::Polynomial:
        return param > 1.0 ? hurwitz_zeta(param, static_cast<double>(j) + 1.0) : kInf;
      case Kind::LogDamped:
        return param > 1.0 ? log_damped_tail(param, j) : kInf;
      case Kind::DyadicSparse:
        return param > 1.0 ? hurwitz_zeta(param, static_cast<double>(first_dyadic_k(std::max<int64_t>(j, 2)))) : kInf;
      default:
        return 0.0;
    }
  };
  auto sq_tail = [&](int64_t j) -> double {
    switch (kind) {
      case Kind::Geometric:
        return std::pow(param * param, static_cast<double>(j)) / (1.0 - param * param);
      case Kind::Polynomial:
        return hurwitz_zeta(2.0 * param, static_cast<double>(j) + 1.0);
      case Kind::LogDamped:
        return log_damped_sq_tail(param, j);
      case Kind::DyadicSparse:
        return hurwitz_zeta(2.0 * param, static_cast<double>(first_dyadic_k(std::max<int64_t>(j, 2))));
      default:
        return 0.0;
    }
  };

  const bool use_abs = std::isfinite(abs_tail(0));
  const double total = use_abs ? abs_tail(0) : sq_tail(0);
  const double target = (use_abs ? 1e-3 : 1e-6) * total;
  for (int lag = 8; lag < 4096; lag *= 2) {
    const double tail = use_abs ? abs_tail(lag + 1) : sq_tail(lag + 1);
    if (tail <= target) return lag;
  }
  return 4096;
}

}  // namespace martsim
