#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "disk/volume.hpp"

namespace disk {

// Centered 2-D DFT of every frame: the zero frequency lands at (H/2, W/2).
// Power-of-two extents use radix-2 FFT, other extents a direct separable DFT.
ComplexImage dft2(const ComplexImage& image);
// Inverse of dft2 (includes the 1/(HW) factor).
ComplexImage idft2(const ComplexImage& kspace);

ComplexImage to_complex(const ImageVolume& image);

// Smooth random phase: a sum of Gaussian bumps.
struct B0Config {
  int bumps = 3;
  double min_width = 0.15;  // fraction of H
  double max_width = 0.40;
  double amplitude_sigma = std::numbers::pi / 2.0;
};

// H x W phase map in radians, row-major.
std::vector<double> b0_phase_field(std::size_t height, std::size_t width, const B0Config& cfg,
                                   std::uint64_t seed);

// Multiplies every frame by exp(i*phi) with phi drawn once per call.
ComplexImage apply_b0_phase(const ImageVolume& image, const B0Config& cfg, std::uint64_t seed);
ComplexImage apply_phase(const ImageVolume& image, const std::vector<double>& phase);

struct MaskConfig {
  // Standard deviation of the line-index Normal as a fraction of H.
  double sigma_fraction = 1.0 / 6.0;
};

// Per-frame Cartesian sampling of phase-encode (row) lines.
struct UndersamplingMask {
  std::size_t frames = 0;
  std::size_t height = 0;
  double acceleration = 1.0;
  std::vector<std::uint8_t> lines;  // frames x height

  bool sampled(std::size_t t, std::size_t y) const { return lines[t * height + y] != 0; }
  std::size_t lines_in_frame(std::size_t t) const;
  std::size_t total_lines() const;
};

std::size_t lines_per_frame(std::size_t height, double acceleration);

// Throws ParameterError unless 1 <= R <= H.
UndersamplingMask generate_mask(std::size_t frames, std::size_t height, double acceleration,
                                std::uint64_t seed, const MaskConfig& cfg = {});

// Maps index 0 -> -1 and D-1 -> +1; a singleton axis maps to 0.
double normalized_coordinate(std::size_t index, std::size_t extent);

// The model's only input: sparse (coordinate, value) pairs.
struct KSpaceSampleSet {
  std::vector<std::array<double, 3>> coords;  // (k_y, k_x, t), each in [-1, 1]
  std::vector<std::complex<double>> values;   // max modulus normalized to 1
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double acceleration = 1.0;
  double scale = 1.0;  // divisor applied to the raw values

  std::size_t size() const { return values.size(); }
};

// Emits samples in (t, k_y, k_x) order. Throws DataError for an empty mask.
KSpaceSampleSet extract_samples(const ComplexImage& kspace, const UndersamplingMask& mask);

struct SynthConfig {
  B0Config b0;
  MaskConfig mask;
  bool apply_b0 = true;
};

// apply_b0_phase -> dft2 -> generate_mask -> extract_samples, with the B0
// field and mask drawn from independent streams of `seed`.
KSpaceSampleSet synthesize_samples(const ImageVolume& image, double acceleration,
                                   std::uint64_t seed, const SynthConfig& cfg = {});

// Scatters samples back onto the full grid (zeros elsewhere) in raw scale.
ComplexImage scatter_samples(const KSpaceSampleSet& samples);
// Magnitude of idft2(scatter_samples(samples)). Visual context only.
ImageVolume zero_filled_preview(const KSpaceSampleSet& samples);

}  // namespace disk
