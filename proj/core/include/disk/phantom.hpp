#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "disk/volume.hpp"

namespace disk {

enum Label : std::uint8_t {
  kBackground = 0,
  kLvPool = 1,
  kMyocardium = 2,
  kRightVentricle = 3,
};
inline constexpr std::size_t kNumClasses = 4;

struct PhantomConfig {
  std::size_t frames = 50;
  std::size_t height = 80;
  std::size_t width = 80;
  double noise_sigma = 0.02;
};

// Synthetic 2D+time short-axis slice with labels.
struct PhantomScan {
  std::string scan_id;
  std::uint64_t seed = 0;
  ImageVolume image;   // intensities in [0, 1]
  LabelVolume labels;  // values in {0, 1, 2, 3}
};

// Deterministic in `seed`. Throws ParameterError unless T >= 2 and H, W >= 32.
PhantomScan generate_phantom(std::uint64_t seed, const PhantomConfig& cfg = {});

std::string scan_id_for_seed(std::uint64_t seed);

// Every LV-pool pixel has only pool or myocardium 4-neighbours (and is not
// on the image border) in every frame.
bool ring_topology_holds(const LabelVolume& labels);
bool all_classes_present(const LabelVolume& labels);
std::size_t class_area(const LabelVolume& labels, std::size_t frame, std::uint8_t cls);

struct ScanRef {
  std::string scan_id;
  std::uint64_t seed = 0;
};

struct DatasetSplits {
  std::vector<ScanRef> train;
  std::vector<ScanRef> val;
  std::vector<ScanRef> test;
};

// Seeds come from disjoint streams of base_seed per split.
DatasetSplits make_splits(std::size_t num_train, std::size_t num_val, std::size_t num_test,
                          std::uint64_t base_seed);

}  // namespace disk
