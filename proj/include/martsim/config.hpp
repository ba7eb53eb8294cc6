#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "martsim/models.hpp"

namespace martsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value experiment description. Every random draw downstream is a
// pure function of `seed` and structural indices, so a config determines the
// output bytes exactly.
struct ExperimentConfig {
  std::string experiment = "experiment";

  // model
  std::string model = "linear-iid";  // lipschitz-transform | iterated-function | linear-dependent
  std::string innovations = "standard-normal";
  int dof = 6;  // student-t only
  std::string coefficients = "geometric";
  double rho = 0.5;     // geometric coefficient parameter
  double beta = 2.0;    // polynomial
  double alpha = 1.5;   // log-damped
  double c = 1.5;       // dyadic-sparse
  std::vector<double> values;  // explicit coefficients
  int lag = -1;                // truncation override
  std::string transform = "tanh";
  double threshold = 0.5;
  std::string kernel = "ar1";
  double kernel_rho = 0.5;
  int burn_in = -1;

  // analysis grids and budgets
  std::vector<double> q{2.0};
  int max_lag = 10;
  std::vector<int64_t> lengths{4, 64, 1024};
  int64_t replicates = 10'000;
  int inner = 512;
  int64_t paths = 256;
  int horizon = -1;  // nested construction horizon, -1 = automatic
  int dyadic_levels = 4;
  std::vector<double> deltas{0.5, 1.0, 2.0};
  double quantile = 0.99;
  int64_t lil_length = int64_t{1} << 20;
  int64_t lil_paths = 100;
  int64_t clt_length = 4096;
  int64_t clt_paths = 2000;
  uint64_t seed = 1;
  std::string output = "out";
  std::vector<std::string> checks{"measures"};

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(std::istream& is, const std::string& origin);

  // Throws ConfigError naming the offending field.
  void validate() const;
  ProcessModel build_model() const;
  std::string canonical_text() const;
};

const std::vector<std::string>& known_checks();

}  // namespace martsim
