#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "martsim/coefficients.hpp"

using namespace martsim;
using Kind = CoefficientSequence::Kind;

namespace {

// brute-force oracle for sum_{i>=j} f(a_i) over the untruncated sequence
double brute_sum(const CoefficientSequence& c, int64_t j, int64_t terms, bool squared) {
  double s = 0.0;
  for (int64_t i = j; i < j + terms; ++i) {
    const double a = c.at(i);
    s += squared ? a * a : std::abs(a);
  }
  return s;
}

}  // namespace

TEST_CASE("constructors reject parameters outside the admissible range") {
  CHECK_THROWS(CoefficientSequence::geometric(1.0));
  CHECK_THROWS(CoefficientSequence::geometric(-1.2));
  CHECK_THROWS(CoefficientSequence::polynomial(0.5));
  CHECK_THROWS(CoefficientSequence::log_damped(0.5));
  CHECK_THROWS(CoefficientSequence::dyadic_sparse(0.4));
  CHECK_THROWS(CoefficientSequence::explicit_list({}));
}

TEST_CASE("geometric tail sums have the closed form") {
  const auto c = CoefficientSequence::geometric(0.5);
  CHECK(c.at(3) == doctest::Approx(0.125));
  for (int j : {0, 1, 5}) {
    CHECK(c.tail_sum(j) == doctest::Approx(std::pow(0.5, j) / 0.5).epsilon(1e-12));
    CHECK(c.tail_sum(j) == doctest::Approx(brute_sum(c, j, 200, false)).epsilon(1e-12));
    CHECK(c.sq_sum_from(j) == doctest::Approx(brute_sum(c, j, 200, true)).epsilon(1e-12));
  }
  const auto neg = CoefficientSequence::geometric(-0.5);
  CHECK(neg.tail_sum(0) == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
  CHECK(neg.abs_sum_from(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("polynomial tail sums match brute-force summation") {
  const auto c = CoefficientSequence::polynomial(2.0);
  CHECK(c.at(1) == doctest::Approx(0.25));
  for (int j : {0, 3, 17}) {
    const double oracle = brute_sum(c, j, 3'000'000, false) + 1.0 / (static_cast<double>(j) + 3'000'000);
    CHECK(c.tail_sum(j) == doctest::Approx(oracle).epsilon(1e-6));
    const double sq_oracle = brute_sum(c, j, 1'000'000, true);
    CHECK(c.sq_sum_from(j) == doctest::Approx(sq_oracle).epsilon(1e-6));
  }
  CHECK(c.abs_summable());

  const auto slow = CoefficientSequence::polynomial(0.8, 64);
  CHECK_FALSE(slow.abs_summable());
  CHECK(std::isinf(slow.abs_sum_from(0)));
  CHECK_THROWS(slow.tail_sum(0));
  CHECK(std::isfinite(slow.sq_sum_from(0)));
}

TEST_CASE("dyadic-sparse coefficients sit at powers of two") {
  const auto c = CoefficientSequence::dyadic_sparse(1.5);
  CHECK(c.at(1) == 0.0);
  CHECK(c.at(2) == doctest::Approx(1.0));
  CHECK(c.at(3) == 0.0);
  CHECK(c.at(4) == doctest::Approx(std::pow(2.0, -1.5)));
  CHECK(c.at(8) == doctest::Approx(std::pow(3.0, -1.5)));
  // sum over k of k^{-3/2} = zeta(3/2); oracle sums in k-space plus an
  // integral tail bound
  CHECK(c.abs_sum_from(0) == doctest::Approx(2.6123753486854883).epsilon(1e-9));
  double oracle = 0.0;
  const int64_t kmax = 10'000'000;
  for (int64_t k = 1; k <= kmax; ++k) oracle += std::pow(static_cast<double>(k), -1.5);
  oracle += 2.0 / std::sqrt(static_cast<double>(kmax) + 0.5);
  CHECK(c.abs_sum_from(0) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("log-damped sums agree with brute force and classify summability") {
  const auto c = CoefficientSequence::log_damped(2.0);
  CHECK(c.at(0) == 0.0);
  CHECK(c.at(1) == 0.0);
  CHECK(c.at(4) == doctest::Approx(std::pow(std::log(4.0), -2.0) / 4.0));
  CHECK(c.abs_summable());
  const double oracle = brute_sum(c, 2, 2'000'000, false) +
                        std::pow(std::log(2'000'002.0), -1.0);  // integral tail
  CHECK(c.abs_sum_from(2) == doctest::Approx(oracle).epsilon(1e-3));

  const auto border = CoefficientSequence::log_damped(0.8, 64);
  CHECK_FALSE(border.abs_summable());
  CHECK(std::isfinite(border.sq_sum_from(0)));
}

TEST_CASE("explicit lists have exact finite sums") {
  const auto c = CoefficientSequence::explicit_list({1.0, 0.5, 0.25});
  CHECK(c.lag() == 2);
  CHECK(c.tail_sum(0) == doctest::Approx(1.75));
  CHECK(c.tail_sum(1) == doctest::Approx(0.75));
  CHECK(c.tail_sum(3) == 0.0);
  CHECK(c.sq_sum_from(0) == doctest::Approx(1.0 + 0.25 + 0.0625));
  CHECK(c.truncation_sq_tail() == 0.0);
}

TEST_CASE("simulated coefficients truncate with a small documented tail") {
  const auto c = CoefficientSequence::geometric(0.5);
  CHECK(c.lag() >= 8);
  for (int i = 0; i <= c.lag(); ++i) CHECK(c.simulated_at(i) == c.at(i));
  CHECK(c.simulated_at(c.lag() + 1) == 0.0);
  CHECK(c.truncation_sq_tail() < 1e-5 * c.sq_sum_from(0));
  // truncated tail sums match direct sums of the stored values
  CHECK(c.simulated_tail_sum(0) == doctest::Approx(brute_sum(c, 0, c.lag() + 1, false)).epsilon(1e-12));
}
