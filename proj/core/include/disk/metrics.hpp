#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disk/phantom.hpp"
#include "disk/volume.hpp"

namespace disk {

// Per-query class probabilities plus the derived hard labels.
struct SegmentationResult {
  std::string scan_id;
  std::size_t classes = 0;
  std::vector<double> probabilities;  // P x C, row-major
  std::vector<std::array<double, 3>> queries;
  LabelVolume labels;  // argmax, filled when queries cover a full grid
};

// Argmax per row; ties resolve to the lowest class index.
std::vector<std::uint8_t> argmax_labels(std::span<const double> probs, std::size_t classes);

// 2|A n B| / (|A| + |B|) for one class. Both empty -> 1, one empty -> 0.
// Throws ShapeError on a size mismatch.
double dice_score(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                  std::uint8_t cls);
bool class_absent(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                  std::uint8_t cls);

// Pixels of `cls` with at least one 8-neighbour outside the class (pixels on
// the image edge count as boundary), as (y, x).
std::vector<std::pair<int, int>> boundary_pixels(std::span<const std::uint8_t> frame,
                                                 std::size_t height, std::size_t width,
                                                 std::uint8_t cls);

// Symmetric Hausdorff distance between the class boundaries in pixels.
// Both empty -> 0; exactly one empty -> sqrt(H^2 + W^2).
double hausdorff(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                 std::size_t height, std::size_t width, std::uint8_t cls);

struct MetricReport {
  std::string scan_id;
  double acceleration = 0.0;
  std::array<double, kNumClasses> dice{};
  double dice_fg_mean = 0.0;
  std::array<double, kNumClasses> hausdorff{};
  double hd_fg_max = 0.0;
};

// Dice averaged over classes {1,2,3} (both-empty classes skipped) then
// frames; Hausdorff maximised over {1,2,3} then averaged over frames.
MetricReport evaluate_labels(const LabelVolume& pred, const LabelVolume& gt, double acceleration,
                             const std::string& scan_id);
// Throws DataError unless the result covers every voxel of `gt`.
MetricReport evaluate_scan(const SegmentationResult& result, const LabelVolume& gt,
                           double acceleration);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricReport& report);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
MeanStd mean_std(std::span<const double> values);

}  // namespace disk
