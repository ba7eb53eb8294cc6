#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "martsim/model_eval.hpp"
#include "martsim/models.hpp"
#include "martsim/stats.hpp"

using namespace martsim;

namespace {

struct ConstSource {
  double v;
  double at(int64_t) const { return v; }
};

const InnovationSpec kNormal = InnovationSpec::standard_normal();

double lq_norm_of(const std::vector<double>& zs, double q) {
  double m = 0.0;
  for (double z : zs) m += std::pow(std::abs(z), q);
  return std::pow(m / static_cast<double>(zs.size()), 1.0 / q);
}

double lq_se_of(const std::vector<double>& zs, double q, double norm) {
  // delta method on the mean of |z|^q
  std::vector<double> pw(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) pw[i] = std::pow(std::abs(zs[i]), q);
  const double var = sample_variance(pw) / static_cast<double>(zs.size());
  const double m = std::pow(norm, q);
  return std::pow(m, 1.0 / q - 1.0) * std::sqrt(var) / q;
}

}  // namespace

TEST_CASE("paths are cumulative and bit-identical across runs") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), kNormal);
  InnovationStream stream(kNormal, 42);
  const PathResult a = generate_path(model, 100, stream);
  const PathResult b = generate_path(model, 100, stream);
  CHECK(a.x == b.x);
  CHECK(a.s == b.s);
  CHECK(a.s[0] == 0.0);
  for (std::size_t k = 1; k < a.s.size(); ++k)
    CHECK(a.s[k] - a.s[k - 1] == doctest::Approx(a.x[k - 1]).epsilon(1e-15));
}

TEST_CASE("identity filter reproduces the innovations exactly") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::explicit_list({1.0}), kNormal);
  InnovationStream stream(kNormal, 7);
  const PathResult p = generate_path(model, 50, stream);
  for (int64_t k = 1; k <= 50; ++k) CHECK(p.x[static_cast<std::size_t>(k - 1)] == stream.at(k));
}

TEST_CASE("deterministic convolution with a forced-constant source") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::explicit_list({1.0, 0.5}), kNormal);
  const ConstSource ones{1.0};
  for (int64_t k = 1; k <= 5; ++k) CHECK(model_value(model, ones, k) == doctest::Approx(1.5));
}

TEST_CASE("ar1 stationary variance matches the closed form") {
  const auto model = ProcessModel::iterated_function(IrfKernel::Ar1, 0.5, kNormal);
  InnovationStream stream(kNormal, 99);
  const PathResult p = generate_path(model, 1'000'000, stream);
  double sq = 0.0;
  for (double x : p.x) sq += x * x;
  CHECK(sq / static_cast<double>(p.x.size()) == doctest::Approx(4.0 / 3.0).epsilon(0.02));
}

TEST_CASE("analytic theta: exact for linear-iid, flagged bound for transforms") {
  const auto lin = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), kNormal);
  const auto t3 = analytic_theta(lin, 3, 2.0);
  REQUIRE(t3.has_value());
  CHECK_FALSE(t3->is_bound);
  CHECK(t3->value == doctest::Approx(0.125).epsilon(1e-12));
  const auto t0 = analytic_theta(lin, 0, 4.0);
  CHECK(t0->value == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-12));

  const auto tr = ProcessModel::lipschitz_transform(CoefficientSequence::explicit_list({1.0, 0.5}),
                                                    Transform::Tanh, kNormal);
  const auto b1 = analytic_theta(tr, 1, 2.0);
  REQUIRE(b1.has_value());
  CHECK(b1->is_bound);
  CHECK(b1->value == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-12));

  const auto irf = ProcessModel::iterated_function(IrfKernel::Ar1, 0.5, kNormal);
  const auto ib = analytic_theta(irf, 2, 2.0);
  REQUIRE(ib.has_value());
  CHECK(ib->is_bound);
  CHECK(ib->value > 0.0);

  const auto dep = ProcessModel::linear_dependent(CoefficientSequence::explicit_list({1.0, 0.5}),
                                                  IrfKernel::Ar1, 0.5, kNormal);
  CHECK_FALSE(analytic_theta(dep, 1, 2.0).has_value());
}

TEST_CASE("coupling locality: swapping index 0 shifts X_k by a_k (eps0 - eps0')") {
  const auto coeffs = CoefficientSequence::explicit_list({1.0, 0.5, 0.25, 0.125});
  const auto model = ProcessModel::linear_iid(coeffs, kNormal);
  InnovationStream base(kNormal, 5, CopyTag::Original);
  InnovationStream prime(kNormal, 5, CopyTag::Prime);
  const SourceView orig{.base = &base};
  const SourceView swapped{.base = &base, .prime = &prime, .coupling = Coupling::ReplaceIndexZero};
  const double delta0 = base.at(0) - prime.at(0);
  for (int64_t k = 0; k <= 6; ++k) {
    const double lhs = model_value(model, orig, k) - model_value(model, swapped, k);
    CHECK(lhs == doctest::Approx(coeffs.simulated_at(k) * delta0).epsilon(1e-12));
  }
}

TEST_CASE("normalized iid partial sums approach the gaussian lq norm") {
  const auto model = ProcessModel::linear_iid(CoefficientSequence::explicit_list({1.0}), kNormal);
  const int64_t n = 1024;
  const long reps = 10'000;
  std::vector<double> zs(reps);
  for (long r = 0; r < reps; ++r) {
    InnovationStream stream(kNormal, derive_key(1001, static_cast<uint64_t>(r)));
    zs[static_cast<std::size_t>(r)] =
        generate_path(model, n, stream).s.back() / std::sqrt(static_cast<double>(n));
  }
  for (double q : {2.0, 4.0}) {
    const double est = lq_norm_of(zs, q);
    const double se = lq_se_of(zs, q, est);
    const double target = analytic_lq_norm(kNormal, q);
    CHECK(std::abs(est - target) <= 3.0 * se);
  }
}

TEST_CASE("iterated-function chains forget their initial state after burn-in") {
  const auto a = ProcessModel::iterated_function(IrfKernel::ContractingSine, 0.5, kNormal);
  const auto b = a.with_initial_state(5.0);
  const int bb = a.irf()->burn_in;
  CHECK(bb == 289);  // ceil(200 / log 2)

  const long reps = 10'000;
  std::vector<double> x1(reps), xb1(reps);
  for (long r = 0; r < reps; ++r) {
    InnovationStream sa(kNormal, derive_key(21, static_cast<uint64_t>(r)));
    InnovationStream sb(kNormal, derive_key(22, static_cast<uint64_t>(r)));
    x1[static_cast<std::size_t>(r)] = generate_path(a, 1, sa).x[0];
    xb1[static_cast<std::size_t>(r)] = generate_path(b, bb + 1, sb).x.back();
  }
  CHECK(ks_distance_two_sample(x1, xb1) <= 0.02);
}

TEST_CASE("frozen centerings give mean-zero processes") {
  // abs transform of a normal filter: closed-form centering
  const auto abs_model = ProcessModel::lipschitz_transform(
      CoefficientSequence::explicit_list({1.0, 0.5}), Transform::AbsoluteValue, kNormal);
  InnovationStream stream(kNormal, 3111);
  const PathResult p = generate_path(abs_model, 400'000, stream);
  CHECK(std::abs(mean(p.x)) < 6e-3);

  // contracting sine with asymmetric innovations: frozen monte carlo mean
  const auto sine = ProcessModel::iterated_function(IrfKernel::ContractingSine, 0.5,
                                                    InnovationSpec::centered_exponential());
  InnovationStream es(InnovationSpec::centered_exponential(), 42);
  const PathResult ps = generate_path(sine, 400'000, es);
  CHECK(std::abs(mean(ps.x)) < 8e-3);
}

TEST_CASE("model ids are stable descriptors") {
  const auto m = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), kNormal);
  CHECK(m.id() == "linear-iid[geometric(0.5)]+standard-normal");
  const auto irf = ProcessModel::iterated_function(IrfKernel::Ar1, 0.9, kNormal);
  CHECK(irf.id() == "irf[ar1(0.9)]+standard-normal");
}

TEST_CASE("analysis q respects the innovation moment ceiling") {
  auto m = ProcessModel::linear_iid(CoefficientSequence::geometric(0.5), InnovationSpec::student_t(6));
  m.set_analysis_q(4.0);
  CHECK(m.analysis_q() == 4.0);
  CHECK_THROWS(m.set_analysis_q(5.5));
}
