#include "martsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace martsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
}

// lengths accept either a comma list or "dyadic:a:b" for 2^a..2^b
std::vector<int64_t> parse_lengths(const std::string& key, const std::string& value) {
  std::vector<int64_t> out;
  if (value.rfind("dyadic:", 0) == 0) {
    const auto parts = split_list(value.substr(7));
    std::vector<std::string> bounds;
    std::stringstream ss(value.substr(7));
    std::string item;
    while (std::getline(ss, item, ':')) bounds.push_back(trim(item));
    if (bounds.size() != 2) throw ConfigError(key + ": dyadic range needs dyadic:<lo>:<hi>");
    const int64_t lo = parse_int(key, bounds[0]);
    const int64_t hi = parse_int(key, bounds[1]);
    if (lo < 0 || hi < lo || hi > 62) throw ConfigError(key + ": dyadic exponents out of range");
    for (int64_t j = lo; j <= hi; ++j) out.push_back(int64_t{1} << j);
    (void)parts;
    return out;
  }
  for (const auto& item : split_list(value)) out.push_back(parse_int(key, item));
  return out;
}

std::string fmt_g(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> checks{"measures", "bounds",     "maximal", "lil",
                                               "rates",    "clt",        "conditions", "gmc"};
  return checks;
}

ExperimentConfig ExperimentConfig::parse(std::istream& is, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key or value");

    if (key == "experiment") {
      cfg.experiment = value;
    } else if (key == "model") {
      cfg.model = value;
    } else if (key == "innovations") {
      cfg.innovations = value;
    } else if (key == "dof") {
      cfg.dof = static_cast<int>(parse_int(key, value));
    } else if (key == "coefficients") {
      cfg.coefficients = value;
    } else if (key == "rho") {
      cfg.rho = parse_double(key, value);
    } else if (key == "beta") {
      cfg.beta = parse_double(key, value);
    } else if (key == "alpha") {
      cfg.alpha = parse_double(key, value);
    } else if (key == "c") {
      cfg.c = parse_double(key, value);
    } else if (key == "values") {
      cfg.values.clear();
      for (const auto& item : split_list(value)) cfg.values.push_back(parse_double(key, item));
    } else if (key == "lag") {
      cfg.lag = static_cast<int>(parse_int(key, value));
    } else if (key == "transform") {
      cfg.transform = value;
    } else if (key == "threshold") {
      cfg.threshold = parse_double(key, value);
    } else if (key == "kernel") {
      cfg.kernel = value;
    } else if (key == "kernel_rho") {
      cfg.kernel_rho = parse_double(key, value);
    } else if (key == "burn_in") {
      cfg.burn_in = static_cast<int>(parse_int(key, value));
    } else if (key == "q") {
      cfg.q.clear();
      for (const auto& item : split_list(value)) cfg.q.push_back(parse_double(key, item));
    } else if (key == "max_lag") {
      cfg.max_lag = static_cast<int>(parse_int(key, value));
    } else if (key == "lengths") {
      cfg.lengths = parse_lengths(key, value);
    } else if (key == "replicates") {
      cfg.replicates = parse_int(key, value);
    } else if (key == "inner") {
      cfg.inner = static_cast<int>(parse_int(key, value));
    } else if (key == "paths") {
      cfg.paths = parse_int(key, value);
    } else if (key == "horizon") {
      cfg.horizon = static_cast<int>(parse_int(key, value));
    } else if (key == "dyadic_levels") {
      cfg.dyadic_levels = static_cast<int>(parse_int(key, value));
    } else if (key == "deltas") {
      cfg.deltas.clear();
      for (const auto& item : split_list(value)) cfg.deltas.push_back(parse_double(key, item));
    } else if (key == "quantile") {
      cfg.quantile = parse_double(key, value);
    } else if (key == "lil_length") {
      cfg.lil_length = parse_int(key, value);
    } else if (key == "lil_paths") {
      cfg.lil_paths = parse_int(key, value);
    } else if (key == "clt_length") {
      cfg.clt_length = parse_int(key, value);
    } else if (key == "clt_paths") {
      cfg.clt_paths = parse_int(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_u64(key, value);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "checks") {
      cfg.checks = split_list(value);
    } else {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse(is, path);
}

void ExperimentConfig::validate() const {
  const std::vector<std::string> models{"linear-iid", "lipschitz-transform", "iterated-function",
                                        "linear-dependent"};
  if (std::find(models.begin(), models.end(), model) == models.end())
    throw ConfigError("model: unknown variant '" + model + "'");
  const std::vector<std::string> families{"standard-normal", "centered-uniform", "student-t",
                                          "centered-exponential"};
  if (std::find(families.begin(), families.end(), innovations) == families.end())
    throw ConfigError("innovations: unknown family '" + innovations + "'");
  if (innovations == "student-t" && dof <= 4) throw ConfigError("dof: student-t needs dof > 4");

  const bool needs_coeffs = model != "iterated-function";
  if (needs_coeffs) {
    const std::vector<std::string> kinds{"geometric", "polynomial", "log-damped", "dyadic-sparse",
                                         "explicit"};
    if (std::find(kinds.begin(), kinds.end(), coefficients) == kinds.end())
      throw ConfigError("coefficients: unknown kind '" + coefficients + "'");
    if (coefficients == "explicit" && values.empty())
      throw ConfigError("values: explicit coefficients need a nonempty list");
    if (coefficients == "geometric" && !(std::abs(rho) < 1.0))
      throw ConfigError("rho: geometric coefficients need |rho| < 1");
    if (coefficients == "polynomial" && !(beta > 0.5))
      throw ConfigError("beta: polynomial coefficients need beta > 1/2");
    if (coefficients == "log-damped" && !(alpha > 0.5))
      throw ConfigError("alpha: log-damped coefficients need alpha > 1/2");
    if (coefficients == "dyadic-sparse" && !(c > 0.5))
      throw ConfigError("c: dyadic-sparse coefficients need c > 1/2");
  }
  if (model == "lipschitz-transform") {
    const std::vector<std::string> transforms{"absolute-value", "tanh", "soft-threshold"};
    if (std::find(transforms.begin(), transforms.end(), transform) == transforms.end())
      throw ConfigError("transform: unknown transform '" + transform + "'");
  }
  if (model == "iterated-function" || model == "linear-dependent") {
    if (kernel != "ar1" && kernel != "contracting-sine")
      throw ConfigError("kernel: unknown kernel '" + kernel + "'");
    if (!(std::abs(kernel_rho) < 1.0)) throw ConfigError("kernel_rho: needs |rho| < 1");
  }

  if (q.empty()) throw ConfigError("q: need at least one moment order");
  const double q_cap = innovations == "student-t" ? static_cast<double>(dof - 1)
                                                  : std::numeric_limits<double>::infinity();
  for (double qi : q) {
    if (qi < 1.0) throw ConfigError("q: moment orders must be >= 1");
    if (qi > q_cap) throw ConfigError("q: " + fmt_g(qi) + " exceeds q_max of " + innovations);
  }
  if (max_lag < 0) throw ConfigError("max_lag: must be >= 0");
  if (lengths.empty()) throw ConfigError("lengths: need at least one length");
  for (int64_t n : lengths)
    if (n < 1) throw ConfigError("lengths: entries must be >= 1");
  if (replicates < 100) throw ConfigError("replicates: need at least 100");
  if (inner < 2) throw ConfigError("inner: need at least 2");
  if (paths < 1) throw ConfigError("paths: need at least 1");
  if (dyadic_levels < 0 || dyadic_levels > 16) throw ConfigError("dyadic_levels: out of range 0..16");
  if (quantile <= 0.0 || quantile >= 1.0) throw ConfigError("quantile: outside (0,1)");
  for (double d : deltas)
    if (d <= 0.0) throw ConfigError("deltas: thresholds must be positive");
  if (checks.empty()) throw ConfigError("checks: need at least one check");
  for (const auto& check : checks) {
    const auto& known = known_checks();
    if (std::find(known.begin(), known.end(), check) == known.end())
      throw ConfigError("checks: unknown check '" + check + "'");
  }
  if (output.empty()) throw ConfigError("output: must not be empty");
}

ProcessModel ExperimentConfig::build_model() const {
  validate();
  InnovationSpec spec = InnovationSpec::standard_normal();
  if (innovations == "centered-uniform") spec = InnovationSpec::centered_uniform();
  if (innovations == "student-t") spec = InnovationSpec::student_t(dof);
  if (innovations == "centered-exponential") spec = InnovationSpec::centered_exponential();

  auto make_coeffs = [&]() {
    if (coefficients == "geometric") return CoefficientSequence::geometric(rho, lag);
    if (coefficients == "polynomial") return CoefficientSequence::polynomial(beta, lag);
    if (coefficients == "log-damped") return CoefficientSequence::log_damped(alpha, lag);
    if (coefficients == "dyadic-sparse") return CoefficientSequence::dyadic_sparse(c, lag);
    return CoefficientSequence::explicit_list(values);
  };
  auto make_transform = [&]() {
    if (transform == "absolute-value") return Transform::AbsoluteValue;
    if (transform == "soft-threshold") return Transform::SoftThreshold;
    return Transform::Tanh;
  };
  const IrfKernel k = kernel == "contracting-sine" ? IrfKernel::ContractingSine : IrfKernel::Ar1;

  if (model == "linear-iid") return ProcessModel::linear_iid(make_coeffs(), spec);
  if (model == "lipschitz-transform")
    return ProcessModel::lipschitz_transform(make_coeffs(), make_transform(), spec, threshold);
  if (model == "iterated-function")
    return ProcessModel::iterated_function(k, kernel_rho, spec, burn_in);
  return ProcessModel::linear_dependent(make_coeffs(), k, kernel_rho, spec, burn_in);
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "experiment = " << experiment << '\n';
  os << "model = " << model << '\n';
  os << "innovations = " << innovations << '\n';
  if (innovations == "student-t") os << "dof = " << dof << '\n';
  if (model != "iterated-function") {
    os << "coefficients = " << coefficients << '\n';
    if (coefficients == "geometric") os << "rho = " << fmt_g(rho) << '\n';
    if (coefficients == "polynomial") os << "beta = " << fmt_g(beta) << '\n';
    if (coefficients == "log-damped") os << "alpha = " << fmt_g(alpha) << '\n';
    if (coefficients == "dyadic-sparse") os << "c = " << fmt_g(c) << '\n';
    if (coefficients == "explicit") {
      os << "values = ";
      for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << fmt_g(values[i]);
      os << '\n';
    }
    if (lag >= 0) os << "lag = " << lag << '\n';
  }
  if (model == "lipschitz-transform") {
    os << "transform = " << transform << '\n';
    if (transform == "soft-threshold") os << "threshold = " << fmt_g(threshold) << '\n';
  }
  if (model == "iterated-function" || model == "linear-dependent") {
    os << "kernel = " << kernel << '\n';
    os << "kernel_rho = " << fmt_g(kernel_rho) << '\n';
    if (burn_in >= 0) os << "burn_in = " << burn_in << '\n';
  }
  os << "q = ";
  for (std::size_t i = 0; i < q.size(); ++i) os << (i ? "," : "") << fmt_g(q[i]);
  os << '\n';
  os << "max_lag = " << max_lag << '\n';
  os << "lengths = ";
  for (std::size_t i = 0; i < lengths.size(); ++i) os << (i ? "," : "") << lengths[i];
  os << '\n';
  os << "replicates = " << replicates << '\n';
  os << "inner = " << inner << '\n';
  os << "paths = " << paths << '\n';
  if (horizon >= 0) os << "horizon = " << horizon << '\n';
  os << "dyadic_levels = " << dyadic_levels << '\n';
  os << "deltas = ";
  for (std::size_t i = 0; i < deltas.size(); ++i) os << (i ? "," : "") << fmt_g(deltas[i]);
  os << '\n';
  os << "quantile = " << fmt_g(quantile) << '\n';
  os << "lil_length = " << lil_length << '\n';
  os << "lil_paths = " << lil_paths << '\n';
  os << "clt_length = " << clt_length << '\n';
  os << "clt_paths = " << clt_paths << '\n';
  os << "seed = " << seed << '\n';
  os << "output = " << output << '\n';
  os << "checks = ";
  for (std::size_t i = 0; i < checks.size(); ++i) os << (i ? "," : "") << checks[i];
  os << '\n';
  return os.str();
}

}  // namespace martsim
