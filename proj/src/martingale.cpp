#include "martsim/martingale.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "martsim/model_eval.hpp"
#include "martsim/stats.hpp"

namespace martsim {

namespace {

constexpr uint64_t kTagSlot = 0xD3C701ull;
constexpr uint64_t kTagFutures = 0xD3C702ull;

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double b_q(double q) {
  if (!(q > 1.0)) throw std::domain_error("b_q: q must exceed 1");
  if (q == 2.0) return 1.0;
  return 18.0 * std::pow(q, 1.5) / std::sqrt(q - 1.0);
}

double xi_n(const CoefficientSequence& coeffs, int64_t n) {
  if (n < 1) throw std::invalid_argument("xi_n: n must be >= 1");
  if (!coeffs.tail_sum_exists()) throw std::domain_error("xi_n: coefficient tail sums do not exist");

  if (coeffs.kind() == CoefficientSequence::Kind::Geometric) {
    const double rho = coeffs.parameter();
    const double rn = std::pow(rho, static_cast<double>(n));
    const double d = 1.0 - rho;
    const double s1 = rho * rho * (1.0 - rn * rn) / (d * d * (1.0 - rho * rho));
    const double s2 = (1.0 - rn) * (1.0 - rn) * rho * rho / (d * d * (1.0 - rho * rho));
    return std::sqrt(s1 + s2);
  }

  // first block: running A_i = A_{i-1} - a_{i-1}
  double s1 = 0.0;
  double a_run = coeffs.tail_sum(1);
  for (int64_t i = 1; i <= n; ++i) {
    s1 += a_run * a_run;
    a_run -= coeffs.at(i);
  }
  // second block: A_i - A_{i-n} = -(a_{i-n} + ... + a_{i-1}), windowed
  double window = 0.0;
  for (int64_t j = 1; j <= n; ++j) window += coeffs.at(j);
  double s2 = 0.0;
  const int64_t cap = n + (int64_t{1} << 22);
  for (int64_t i = n + 1; i <= cap; ++i) {
    s2 += window * window;
    window += coeffs.at(i) - coeffs.at(i - n);
    if (window * window < 1e-17 * (s1 + s2 + 1e-300) && i > n + coeffs.lag() + 8) break;
  }
  return std::sqrt(s1 + s2);
}

void MartingaleDecomposition::write_columns(std::ostream& os) const {
  os << "k,s,m,r\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << k << ',' << fmt17(s[k]) << ',' << fmt17(m[k]) << ',' << fmt17(r[k]) << '\n';
  }
}

MartingaleDecomposition linear_decomposition(const CoefficientSequence& coeffs,
                                             const InnovationStream& stream, int64_t n, double q) {
  if (n < 1) throw std::invalid_argument("linear_decomposition: n must be >= 1");
  if (!coeffs.tail_sum_exists())
    throw std::domain_error("linear_decomposition: coefficients are not absolutely summable");

  const double a0 = coeffs.simulated_tail_sum(0);
  MartingaleDecomposition d;
  d.q = q;
  d.kind = DecompositionKind::ClosedFormLinear;
  d.sigma = std::abs(a0) * analytic_lq_norm(stream.spec(), 2.0);
  d.c_q = std::abs(a0) * analytic_lq_norm(stream.spec(), q);
  d.truncation_error = coeffs.truncation_sq_tail();
  d.s.assign(static_cast<std::size_t>(n) + 1, 0.0);
  d.m.assign(static_cast<std::size_t>(n) + 1, 0.0);
  d.r.assign(static_cast<std::size_t>(n) + 1, 0.0);

  const SourceView src{.base = &stream};
  double s = 0.0, msum = 0.0;
  const auto a = coeffs.simulated();
  for (int64_t k = 1; k <= n; ++k) {
    s += linear_filter_value(a, src, k);
    msum += a0 * stream.at(k);
    d.s[static_cast<std::size_t>(k)] = s;
    d.m[static_cast<std::size_t>(k)] = msum;
    d.r[static_cast<std::size_t>(k)] = s - msum;
  }
  return d;
}

int default_nested_horizon(const ProcessModel& model, double q) {
  const auto theta = theta_series_for(model, q, 512);
  if (!theta) return 64;
  const double total = theta->sum_from(0);
  if (!(total > 0.0) || !std::isfinite(total)) return 64;
  for (int h = 1; h <= 512; ++h) {
    if (theta->sum_from(h + 1) <= 1e-3 * total) return h;
  }
  return 512;
}

// Each projection at lag k is the difference between the value with the
// actual slot-k innovation and the value with a marginalized (mean-centered)
// draw, averaged over the inner draws with shared futures, accumulated for
// every m = 0..H in one forward pass.
MartingaleDecomposition nested_decomposition(const ProcessModel& model, const InnovationStream& stream,
                                             int64_t n, double q, int horizon, int inner,
                                             uint64_t seed) {
  if (n < 1) throw std::invalid_argument("nested_decomposition: n must be >= 1");
  if (horizon < 0) throw std::invalid_argument("nested_decomposition: horizon must be >= 0");
  if (inner < 2) throw std::invalid_argument("nested_decomposition: inner must be >= 2");

  const auto theta = theta_series_for(model, q, std::max(64, 2 * horizon + 2));
  if (theta) {
    const auto cond = check_summable_projections(*theta);
    if (cond.verdict == Verdict::Violated)
      throw std::runtime_error("nested_decomposition: projection norms are not summable for " +
                               model.id());
  }

  MartingaleDecomposition d;
  d.q = q;
  d.kind = DecompositionKind::NestedMc;
  d.horizon = horizon;
  d.inner = inner;
  d.truncation_error = theta ? theta->sum_from(horizon + 1) : 0.0;

  const SourceView base{.base = &stream};
  PathResult path = generate_path(model, n, stream);
  d.s = path.s;
  d.m.assign(static_cast<std::size_t>(n) + 1, 0.0);
  d.r.assign(static_cast<std::size_t>(n) + 1, 0.0);

  const InnovationSpec& spec = model.innovations();
  const uint64_t slot_root = derive_key(seed, kTagSlot);
  const uint64_t fut_root = derive_key(seed, kTagFutures);

  // cached chain states along the path for the chain-driven variants
  const IrfModel* irf = model.irf();
  std::vector<double> states;  // raw states at indices states_lo..n
  int64_t states_lo = 0;
  if (irf != nullptr) {
    const auto* dep = std::get_if<LinearDependentModel>(&model.variant());
    states_lo = dep != nullptr ? -(dep->coeffs.lag()) : 0;
    irf_raw_states(*irf, base, states_lo, n, states);
  }
  auto state_at = [&](int64_t t) { return states[static_cast<std::size_t>(t - states_lo)]; };

  std::vector<double> dk(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> proj(static_cast<std::size_t>(horizon) + 1, 0.0);

  for (int64_t k = 1; k <= n; ++k) {
    // centered marginalization draws for the slot-k innovation
    InnovationStream slot_stream(spec, derive_key(slot_root, static_cast<uint64_t>(k)));
    std::vector<double> slots(static_cast<std::size_t>(inner));
    double slot_mean = 0.0;
    for (int j = 0; j < inner; ++j) {
      slots[static_cast<std::size_t>(j)] = slot_stream.at(j);
      slot_mean += slots[static_cast<std::size_t>(j)];
    }
    slot_mean /= inner;
    for (double& u : slots) u -= slot_mean;

    std::fill(proj.begin(), proj.end(), 0.0);
    const uint64_t fut_k = derive_key(fut_root, static_cast<uint64_t>(k));

    for (int j = 0; j < inner; ++j) {
      InnovationStream fut(spec, derive_key(fut_k, static_cast<uint64_t>(j)));
      const double u = slots[static_cast<std::size_t>(j)];

      if (const auto* m_irf = std::get_if<IrfModel>(&model.variant())) {
        double xo = state_at(k);
        double xs = irf_step(m_irf->kernel, m_irf->rho, k - 1 >= states_lo ? state_at(k - 1) : m_irf->initial_state, u);
        proj[0] += (xo - xs);
        for (int m = 1; m <= horizon; ++m) {
          const double eps = fut.at(k + m);
          xo = irf_step(m_irf->kernel, m_irf->rho, xo, eps);
          xs = irf_step(m_irf->kernel, m_irf->rho, xs, eps);
          proj[static_cast<std::size_t>(m)] += (xo - xs);
        }
      } else if (const auto* dep = std::get_if<LinearDependentModel>(&model.variant())) {
        const auto a = dep->coeffs.simulated();
        const int64_t lag = static_cast<int64_t>(a.size()) - 1;
        double xo = state_at(k);
        double xs = irf_step(dep->inner.kernel, dep->inner.rho, state_at(k - 1), u);
        std::vector<double> eo(static_cast<std::size_t>(horizon) + 1), es(eo.size());
        eo[0] = xo;
        es[0] = xs;
        for (int m = 1; m <= horizon; ++m) {
          const double eps = fut.at(k + m);
          xo = irf_step(dep->inner.kernel, dep->inner.rho, xo, eps);
          xs = irf_step(dep->inner.kernel, dep->inner.rho, xs, eps);
          eo[static_cast<std::size_t>(m)] = xo;
          es[static_cast<std::size_t>(m)] = xs;
        }
        for (int m = 0; m <= horizon; ++m) {
          double diff = 0.0;
          for (int64_t l = 0; l <= std::min<int64_t>(lag, m); ++l) {
            diff += a[static_cast<std::size_t>(l)] *
                    (eo[static_cast<std::size_t>(m - l)] - es[static_cast<std::size_t>(m - l)]);
          }
          proj[static_cast<std::size_t>(m)] += diff;
        }
      } else {
        // linear window models: evaluate both variants through source views
        SourceView orig = base;
        orig.future = &fut;
        orig.future_begin = k + 1;
        SourceView repl = orig;
        repl.has_slot = true;
        repl.slot_index = k;
        repl.slot_value = u;
        for (int m = 0; m <= horizon; ++m) {
          proj[static_cast<std::size_t>(m)] +=
              model_value(model, orig, k + m) - model_value(model, repl, k + m);
        }
      }
    }
    double sum = 0.0;
    for (int m = 0; m <= horizon; ++m) sum += proj[static_cast<std::size_t>(m)];
    dk[static_cast<std::size_t>(k)] = sum / inner;
  }

  double msum = 0.0;
  double sq = 0.0, pq = 0.0;
  for (int64_t k = 1; k <= n; ++k) {
    msum += dk[static_cast<std::size_t>(k)];
    d.m[static_cast<std::size_t>(k)] = msum;
    d.r[static_cast<std::size_t>(k)] = d.s[static_cast<std::size_t>(k)] - msum;
    sq += dk[static_cast<std::size_t>(k)] * dk[static_cast<std::size_t>(k)];
    pq += std::pow(std::abs(dk[static_cast<std::size_t>(k)]), q);
  }
  d.sigma = std::sqrt(sq / static_cast<double>(n));
  d.c_q = std::pow(pq / static_cast<double>(n), 1.0 / q);
  return d;
}

namespace {

double q_prime(double q) { return std::min(2.0, q); }

}  // namespace

BoundEvaluation rhs_sum_moment(const DecaySeries& theta, int64_t n, double q) {
  if (n < 1) throw std::invalid_argument("rhs_sum_moment: n must be >= 1");
  const double qp = q_prime(q);
  const double bq = b_q(q);

  double acc = 0.0;
  // i in [-n, -1]: Lambda_{i+n} runs over 0..n-1
  for (int64_t m = 0; m < n; ++m) acc += std::pow(theta.partial_sum(m), qp);
  // i >= 0: windows Lambda_{i+n} - Lambda_i, advanced incrementally
  double window = theta.partial_sum(n) - theta.partial_sum(0);
  const int64_t cap = theta.head_size() + n + (int64_t{1} << 20);
  double last = 0.0;
  int64_t stop = cap;
  for (int64_t i = 0; i <= cap; ++i) {
    const double term = std::pow(window, qp);
    acc += term;
    last = term;
    if (term < 1e-16 * acc && i > theta.head_size()) {
      stop = i;
      break;
    }
    window += theta.at(i + n + 1) - theta.at(i + 1);
    if (window < 0.0) window = 0.0;  // guard fp drift on vanishing tails
  }
  if (stop == cap && last > 0.0) {
    // integral-style remainder from the local decay rate
    acc += last * 4.0;
  }
  BoundEvaluation b;
  b.inequality = "sum-moment";
  b.n = n;
  b.q = q;
  b.rhs = bq * std::pow(acc, 1.0 / qp);
  b.upper_ingredients = theta.upper_bound();
  b.horizon_limited = theta.horizon_limited();
  return b;
}

BoundEvaluation rhs_residual_moment(const DecaySeries& theta, int64_t n, double q) {
  if (n < 1) throw std::invalid_argument("rhs_residual_moment: n must be >= 1");
  const double qp = q_prime(q);
  const double bq = b_q(q);
  double acc = 0.0;
  for (int64_t j = 1; j <= n; ++j) acc += std::pow(theta.sum_from(j), qp);
  BoundEvaluation b;
  b.inequality = "residual-moment";
  b.n = n;
  b.q = q;
  b.rhs = std::pow(3.0 * std::pow(bq, qp) * acc, 1.0 / qp);
  b.upper_ingredients = theta.upper_bound();
  b.horizon_limited = theta.horizon_limited();
  return b;
}

BoundEvaluation rhs_max_moment(const DecaySeries& theta, int64_t n, double q) {
  if (n < 1) throw std::invalid_argument("rhs_max_moment: n must be >= 1");
  if (!(q > 1.0)) throw std::domain_error("rhs_max_moment: q must exceed 1");
  BoundEvaluation b;
  b.inequality = "max-moment";
  b.n = n;
  b.q = q;
  b.rhs = q * b_q(q) / (q - 1.0) * std::pow(static_cast<double>(n), 1.0 / q_prime(q)) *
          theta.sum_from(0);
  b.upper_ingredients = theta.upper_bound();
  b.horizon_limited = theta.horizon_limited();
  return b;
}

std::pair<BoundEvaluation, BoundEvaluation> conditional_variance_bounds(
    double c_q, int k, const DecaySeries& beta_star, const DecaySeries& alpha_star,
    const DecaySeries& beta_tilde, const DecaySeries& alpha_tilde, double q) {
  if (!(q > 2.0)) throw std::domain_error("conditional_variance_bounds: q must exceed 2");
  if (k < 1) throw std::invalid_argument("conditional_variance_bounds: k must be >= 1");

  const int64_t head = std::max(alpha_star.head_size(), alpha_tilde.head_size() + k);
  double min_sum = 0.0;
  for (int64_t i = k; i < head; ++i) min_sum += std::min(alpha_star.at(i), alpha_tilde.at(i - k));
  min_sum += std::min(alpha_star.sum_from(head), alpha_tilde.sum_from(head - k));

  BoundEvaluation cond;
  cond.inequality = "cond-var";
  cond.n = k;
  cond.q = q;
  cond.rhs = 8.0 * c_q * beta_star.at(k) + 8.0 * c_q * min_sum;
  cond.upper_ingredients = true;
  cond.horizon_limited = alpha_star.horizon_limited() || alpha_tilde.horizon_limited();

  BoundEvaluation proj;
  proj.inequality = "proj-var";
  proj.n = k;
  proj.q = q;
  proj.rhs = 8.0 * c_q * beta_tilde.at(k) + 8.0 * c_q * alpha_tilde.sum_from(k);
  proj.upper_ingredients = true;
  proj.horizon_limited = alpha_tilde.horizon_limited();
  return {cond, proj};
}

}  // namespace martsim
