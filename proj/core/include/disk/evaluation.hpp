#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "disk/metrics.hpp"
#include "disk/phantom.hpp"

namespace disk {

// Produces a full-grid segmentation of `scan` at acceleration R.
using Predictor = std::function<SegmentationResult(const PhantomScan& scan, double acceleration)>;

// Echoes the ground truth as one-hot probabilities. Harness self-test.
SegmentationResult oracle_prediction(const PhantomScan& scan, std::size_t classes);

// One report per (R, scan), R-major.
std::vector<MetricReport> evaluate_split(const std::vector<PhantomScan>& scans,
                                         const std::vector<double>& accelerations,
                                         const Predictor& predict);

// mean/std of every metric column per R.
nlohmann::json summarize(const std::vector<MetricReport>& reports, const std::string& split);

// "R=8  dice_fg 0.912±0.031  hd_fg 3.20±1.05"
std::vector<std::string> summary_lines(const nlohmann::json& summary);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports);

}  // namespace disk
