#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disk/evaluation.hpp"

namespace disk::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
};

// Evaluates a split at each R and writes metrics.csv and summary.json into out_dir.
std::vector<MetricReport> evaluate_to_dir(const std::filesystem::path& data, const std::string& split,
                                          const std::vector<double>& accelerations,
                                          const Predictor& predict, const std::filesystem::path& out_dir,
                                          std::ostream& out);

// args excludes the program name. Never throws; errors become exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disk::cli
