#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "martsim/martingale.hpp"
#include "martsim/stats.hpp"

using namespace martsim;

namespace {
const InnovationSpec kNormal = InnovationSpec::standard_normal();
}

TEST_CASE("burkholder constant values") {
  CHECK(b_q(2.0) == 1.0);
  CHECK(b_q(4.0) == doctest::Approx(144.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(b_q(3.0) == doctest::Approx(18.0 * std::pow(3.0, 1.5) / std::sqrt(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(b_q(1.0), std::domain_error);
  CHECK_THROWS_AS(b_q(0.5), std::domain_error);
}

TEST_CASE("xi_n: explicit, geometric, and single-coefficient sequences") {
  // a = (1, 0.5): A_0 = 1.5, A_1 = 0.5, A_{>=2} = 0: xi^2 = 0.25 + 0.25
  const auto two = CoefficientSequence::explicit_list({1.0, 0.5});
  for (int n : {1, 2, 3, 7}) CHECK(xi_n(two, n) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  // geometric: closed form against a brute-force oracle
  const auto geo = CoefficientSequence::geometric(0.5);
  auto brute = [&](int64_t n) {
    auto tail = [&](int64_t j) { return std::pow(0.5, j) * 2.0; };  // A_j = 2^{1-j}
    double s = 0.0;
    for (int64_t i = 1; i <= n; ++i) s += tail(i) * tail(i);
    for (int64_t i = n + 1; i <= n + 400; ++i) {
      const double d = tail(i) - tail(i - n);
      s += d * d;
    }
    return std::sqrt(s);
  };
  for (int n : {1, 2, 5, 16}) CHECK(xi_n(geo, n) == doctest::Approx(brute(n)).epsilon(1e-9));
  CHECK(xi_n(geo, 1) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));

  // single coefficient: A_i = 0 for i >= 1
  const auto single = CoefficientSequence::explicit_list({0.7});
  for (int n : {1, 4}) CHECK(xi_n(single, n) == 0.0);

  // polynomial square-summable tails work through the windowed path
  const auto poly = CoefficientSequence::polynomial(2.0, 256);
  CHECK(std::isfinite(xi_n(poly, 4)));
  CHECK_THROWS(xi_n(CoefficientSequence::polynomial(0.8, 32), 2));
}

TEST_CASE("linear decomposition: identity filter and scale constants") {
  InnovationStream stream(kNormal, 314);
  const auto iid = CoefficientSequence::explicit_list({1.0});
  const auto d = linear_decomposition(iid, stream, 64, 2.0);
  CHECK(d.sigma == doctest::Approx(1.0));
  for (std::size_t k = 0; k < d.s.size(); ++k) {
    CHECK(d.r[k] == 0.0);
    CHECK(d.m[k] == d.s[k]);
  }

  const auto two = CoefficientSequence::explicit_list({1.0, 0.5});
  const auto d2 = linear_decomposition(two, stream, 16, 2.0);
  CHECK(d2.sigma == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(d2.c_q == doctest::Approx(1.5).epsilon(1e-12));

  CHECK_THROWS(linear_decomposition(CoefficientSequence::polynomial(0.8, 32), stream, 8, 2.0));
}

TEST_CASE("closed-form residual equals the shifted-tail convolution oracle") {
  const auto coeffs = CoefficientSequence::explicit_list({1.0, 0.5, 0.25, 0.125});
  InnovationStream stream(kNormal, 2020);
  const int64_t n = 6;
  const auto d = linear_decomposition(coeffs, stream, n, 2.0);
  // oracle: -R_n = sum_{i>=1} (A_i - A_{i-n} [i > n]) eps_{n+1-i}
  double oracle = 0.0;
  for (int64_t i = 1; i <= n + coeffs.lag(); ++i) {
    double c = coeffs.simulated_tail_sum(i);
    if (i > n) c -= coeffs.simulated_tail_sum(i - n);
    oracle += c * stream.at(n + 1 - i);
  }
  CHECK(d.r.back() == doctest::Approx(-oracle).epsilon(1e-10));
}

TEST_CASE("monte carlo residual norm matches xi_n") {
  const auto coeffs = CoefficientSequence::explicit_list({1.0, 0.5});
  const int64_t reps = 10'000;
  for (int64_t n : {1, 7}) {
    std::vector<double> rn(reps);
    for (int64_t r = 0; r < reps; ++r) {
      InnovationStream stream(kNormal, derive_key(606 + n, static_cast<uint64_t>(r)));
      rn[static_cast<std::size_t>(r)] = linear_decomposition(coeffs, stream, n, 2.0).r.back();
    }
    const auto est = lq_norm_mc(rn, 2.0);
    CHECK(std::abs(est.estimate - std::sqrt(0.5)) <= 3.0 * est.se);
  }
}

TEST_CASE("nested construction reproduces the closed form on explicit lists") {
  const auto coeffs = CoefficientSequence::explicit_list({1.0, 0.5, 0.25});
  const auto model = ProcessModel::linear_iid(coeffs, kNormal);
  InnovationStream stream(kNormal, 99);
  const int64_t n = 8;
  const auto closed = linear_decomposition(coeffs, stream, n, 2.0);
  const auto nested = nested_decomposition(model, stream, n, 2.0, /*horizon=*/4, /*inner=*/128, 7);
  REQUIRE(nested.s.size() == closed.s.size());
  for (std::size_t k = 0; k < nested.s.size(); ++k) {
    CHECK(nested.s[k] == closed.s[k]);
    CHECK(nested.m[k] == doctest::Approx(closed.m[k]).epsilon(1e-9));
    CHECK(nested.r[k] == doctest::Approx(closed.r[k]).epsilon(1e-9));
  }
  CHECK(nested.truncation_error == doctest::Approx(0.0));
}

TEST_CASE("nested horizon zero gives the bare projection, exact for iid") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::explicit_list({1.0}), kNormal);
  InnovationStream stream(kNormal, 123);
  const auto nested = nested_decomposition(model, stream, 12, 2.0, 0, 64, 5);
  for (int64_t k = 1; k <= 12; ++k) {
    CHECK(nested.increment(k) == doctest::Approx(stream.at(k)).epsilon(1e-11));
  }
}

TEST_CASE("nested ar1 increments match the geometric-sum closed form") {
  const auto model = ProcessModel::iterated_function(IrfKernel::Ar1, 0.5, kNormal);
  const int64_t reps = 2'000;
  std::vector<double> err(reps);
  for (int64_t r = 0; r < reps; ++r) {
    InnovationStream stream(kNormal, derive_key(812, static_cast<uint64_t>(r)));
    const auto d = nested_decomposition(model, stream, 1, 2.0, 20, 128, derive_key(99, r));
    err[static_cast<std::size_t>(r)] = d.increment(1) - 2.0 * stream.at(1);  // D_k = eps_k / (1 - rho)
  }
  const double m = mean(err);
  const double se = sample_sd(err) / std::sqrt(static_cast<double>(reps));
  CHECK(std::abs(m) <= 3.0 * se + 1e-12);
  CHECK(sample_sd(err) < 0.2);  // inner noise stays small at 128 draws
}

TEST_CASE("nested refuses models with non-summable projections") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::polynomial(0.8, 64), kNormal);
  InnovationStream stream(kNormal, 5);
  CHECK_THROWS(nested_decomposition(model, stream, 4, 2.0, 8, 16, 1));
}

TEST_CASE("nested increments are uncorrelated with the past") {
  const auto model = ProcessModel::iterated_function(IrfKernel::ContractingSine, 0.5, kNormal);
  std::vector<double> prod;
  for (int64_t p = 0; p < 40; ++p) {
    InnovationStream stream(kNormal, derive_key(3141, static_cast<uint64_t>(p)));
    const auto d = nested_decomposition(model, stream, 40, 2.0, 12, 64, derive_key(11, p));
    const auto path = generate_path(model, 40, stream);
    for (int64_t k = 2; k <= 40; ++k)
      prod.push_back(d.increment(k) * std::tanh(path.x[static_cast<std::size_t>(k - 2)]));
  }
  const double m = mean(prod);
  const double se = sample_sd(prod) / std::sqrt(static_cast<double>(prod.size()));
  CHECK(std::abs(m) <= 3.0 * se);
}

TEST_CASE("sum-moment bound: iid equality case and geometric oracle") {
  // iid: theta = (sigma, 0, 0, ...) and the right side collapses to sigma sqrt(n)
  const auto iid = DecaySeries::exact_linear_truncated(CoefficientSequence::explicit_list({1.0}), 1.0);
  for (int64_t n : {4, 64, 1024}) {
    const auto b = rhs_sum_moment(iid, n, 2.0);
    CHECK(b.rhs == doctest::Approx(std::sqrt(static_cast<double>(n))).epsilon(1e-12));
  }

  // geometric theta at q=2, n=1: 1 + 0.25 + sum_{i>=1} 4^{-i-1} = 4/3
  const auto geo = DecaySeries::exact_linear_ideal(CoefficientSequence::geometric(0.5), 1.0, 64);
  const auto b1 = rhs_sum_moment(geo, 1, 2.0);
  CHECK(b1.rhs == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-9));

  // all-zero projections
  const DecaySeries zero({0.0, 0.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  CHECK(rhs_sum_moment(zero, 8, 2.0).rhs == 0.0);
}

TEST_CASE("residual-moment bound: geometric limit and single-term case") {
  const auto geo = DecaySeries::exact_linear_ideal(CoefficientSequence::geometric(0.5), 1.0, 64);
  // Theta_j = 2^{1-j}: sum over all j >= 1 of Theta_j^2 = 4/3, bound -> sqrt(3 * 4/3) = 2
  const auto b = rhs_residual_moment(geo, 1024, 2.0);
  CHECK(b.rhs == doctest::Approx(2.0).epsilon(1e-9));

  // q = 4 with a single tail value Theta_1 = 1
  std::vector<double> head{1.0, 1.0};  // theta_0 = theta_1 = ... only matters through Theta_1
  const DecaySeries single({0.0, 1.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  const auto b4 = rhs_residual_moment(single, 1, 4.0);
  CHECK(b4.rhs == doctest::Approx(std::sqrt(3.0) * b_q(4.0)).epsilon(1e-12));

  const DecaySeries zero({0.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  CHECK(rhs_residual_moment(zero, 16, 2.0).rhs == 0.0);
}

TEST_CASE("max-moment bound: direct evaluations") {
  // q=2, Theta_0 = 2, n = 16 -> 2 * 1 * 4 * 2 = 16
  const auto geo = DecaySeries::exact_linear_ideal(CoefficientSequence::geometric(0.5), 1.0, 64);
  const auto b = rhs_max_moment(geo, 16, 2.0);
  CHECK(b.rhs == doctest::Approx(16.0).epsilon(1e-9));

  // q=4, Theta_0 = 1, n = 1 -> (4/3) B_4
  const DecaySeries unit({1.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  const auto b4 = rhs_max_moment(unit, 1, 4.0);
  CHECK(b4.rhs == doctest::Approx(4.0 / 3.0 * b_q(4.0)).epsilon(1e-12));

  const DecaySeries zero({0.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  CHECK(rhs_max_moment(zero, 64, 2.0).rhs == 0.0);
}

TEST_CASE("conditional variance bounds are nonnegative and need q > 2") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), kNormal);
  const auto bs = beta_tilde_series_for(model, 4.0, 32);
  const auto as = alpha_tilde_series_for(model, 4.0, 32);
  REQUIRE(bs.has_value());
  REQUIRE(as.has_value());
  const auto [cond, proj] = conditional_variance_bounds(1.5, 2, *bs, *as, *bs, *as, 4.0);
  CHECK(cond.rhs >= 0.0);
  CHECK(proj.rhs >= 0.0);
  CHECK(std::isfinite(cond.rhs));
  CHECK(std::isfinite(proj.rhs));
  CHECK_THROWS_AS(conditional_variance_bounds(1.5, 2, *bs, *as, *bs, *as, 2.0), std::domain_error);

  const DecaySeries zero({0.0, 0.0, 0.0, 0.0}, {}, TailModel{.kind = TailModel::Kind::Zero}, false);
  const auto [c0, p0] = conditional_variance_bounds(1.0, 1, zero, zero, zero, zero, 4.0);
  CHECK(c0.rhs == 0.0);
  CHECK(p0.rhs == 0.0);
}
