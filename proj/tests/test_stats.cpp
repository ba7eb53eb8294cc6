#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "martsim/stats.hpp"

using namespace martsim;

TEST_CASE("normal quantile matches tabulated values and inverts the cdf") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
  for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-7}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("quantile interpolates order statistics") {
  std::vector<double> xs{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(xs, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(xs, 1.0) == doctest::Approx(4.0));
  CHECK(quantile(xs, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("ks distance detects exact and shifted samples") {
  std::vector<double> grid;
  for (int i = 1; i <= 2000; ++i) grid.push_back(normal_quantile(i / 2001.0));
  CHECK(ks_distance_normal(grid) < 0.002);
  std::vector<double> shifted;
  for (double x : grid) shifted.push_back(x + 1.0);
  CHECK(ks_distance_normal(shifted) > 0.3);
  CHECK(ks_distance_two_sample(grid, grid) == doctest::Approx(0.0));
  CHECK(ks_distance_two_sample(grid, shifted) > 0.3);
}

TEST_CASE("line fit recovers exact linear data") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<double> y{3.0, 5.0, 7.0, 9.0};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.rss == doctest::Approx(0.0));
}

TEST_CASE("isotonic nonincreasing pools adjacent violators") {
  std::vector<double> y{5.0, 3.0, 4.0, 1.0};
  const auto fit = isotonic_nonincreasing(y);
  REQUIRE(fit.size() == 4);
  CHECK(fit[0] == doctest::Approx(5.0));
  CHECK(fit[1] == doctest::Approx(3.5));
  CHECK(fit[2] == doctest::Approx(3.5));
  CHECK(fit[3] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < fit.size(); ++i) CHECK(fit[i] <= fit[i - 1] + 1e-15);

  std::vector<double> mono{4.0, 2.0, 1.0};
  const auto same = isotonic_nonincreasing(mono);
  CHECK(same == mono);
}

TEST_CASE("hurwitz zeta agrees with direct summation") {
  CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-12));

  // brute-force oracle: partial sum plus integral remainder
  auto oracle = [](double s, double a) {
    double sum = 0.0;
    const int n = 2'000'000;
    for (int k = 0; k < n; ++k) sum += std::pow(a + k, -s);
    return sum + std::pow(a + n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a + n, -s);
  };
  for (auto [s, a] : {std::pair{1.5, 1.0}, {1.5, 7.0}, {3.0, 2.5}, {4.0, 1.0}}) {
    CHECK(hurwitz_zeta(s, a) == doctest::Approx(oracle(s, a)).epsilon(1e-9));
  }
  CHECK(std::isinf(hurwitz_zeta(1.0, 1.0)));
}

TEST_CASE("power-log series classification") {
  CHECK(power_log_series_converges(-1.5, 0.0));
  CHECK_FALSE(power_log_series_converges(-0.5, -5.0));
  CHECK(power_log_series_converges(-1.0, -1.5));
  CHECK_FALSE(power_log_series_converges(-1.0, -1.0));
  CHECK_FALSE(power_log_series_converges(-1.0, 0.0));
}
