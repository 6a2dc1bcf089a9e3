#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "disk/kspace.hpp"
#include "disk/tensor.hpp"

namespace disk {

// Fourier features sin/cos(2^j * pi * p), j = 0..F-1, per scalar.
struct EncodingConfig {
  std::size_t num_frequencies = 10;
  bool include_raw = true;

  std::size_t features_per_scalar() const { return 2 * num_frequencies + (include_raw ? 1 : 0); }
};

inline constexpr std::size_t kInputScalars = 5;  // k_y, k_x, t, Re v, Im v
inline constexpr std::size_t kQueryScalars = 3;  // y, x, t

// [p]? then (sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^{F-1} pi p), cos(...)).
std::vector<double> encode_scalar(double p, const EncodingConfig& cfg);
// Writes features_per_scalar() values into `out`.
void encode_scalar_into(double p, const EncodingConfig& cfg, std::span<double> out);

// Constant (non-differentiable) pre-projection features.
Tensor input_features(const KSpaceSampleSet& samples, const EncodingConfig& cfg);
Tensor query_features(std::span<const std::array<double, 3>> queries, const EncodingConfig& cfg);

// Projected tokens: features . weight + bias.
Tensor build_input_tokens(const KSpaceSampleSet& samples, const EncodingConfig& cfg,
                          const Tensor& weight, const Tensor& bias);
Tensor build_query_tokens(std::span<const std::array<double, 3>> queries,
                          const EncodingConfig& cfg, const Tensor& weight, const Tensor& bias);

// Every (y, x, t) voxel centre of a T x H x W grid in [-1, 1]^3, frame-major.
std::vector<std::array<double, 3>> grid_queries(std::size_t frames, std::size_t height,
                                                std::size_t width);

}  // namespace disk
