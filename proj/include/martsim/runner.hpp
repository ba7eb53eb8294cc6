#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "martsim/config.hpp"
#include "martsim/report.hpp"

namespace martsim {

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;
  int64_t rows = 0;
};

// Runs every requested check, one CSV report per check plus the profile and
// decomposition exports. Output bytes are a pure function of the config.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace martsim
