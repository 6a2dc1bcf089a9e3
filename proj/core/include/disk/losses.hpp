#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "disk/tensor.hpp"

namespace disk {

struct LossConfig {
  double dice_weight = 1.0;
  double bce_weight = 1.0;
  double dice_eps = 1e-6;
  double log_clamp = 1e-7;
};

// [P] labels -> [P, C] one-hot constant tensor.
Tensor one_hot(std::span<const std::uint8_t> labels, std::size_t classes);

// 1 - mean_c (2 sum p t + eps) / (sum p + sum t + eps)
Tensor soft_dice_loss(const Tensor& probs, const Tensor& targets, double eps = 1e-6);
// -mean[t log p + (1 - t) log(1 - p)] with p clamped to [clamp, 1 - clamp].
Tensor bce_loss(const Tensor& probs, const Tensor& targets, double clamp = 1e-7);
Tensor total_loss(const Tensor& probs, const Tensor& targets, const LossConfig& cfg = {});

}  // namespace disk
