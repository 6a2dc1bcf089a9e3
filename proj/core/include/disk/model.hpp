#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disk/encoding.hpp"
#include "disk/kspace.hpp"
#include "disk/tensor.hpp"

namespace disk {

struct ModelConfig {
  std::size_t layers = 4;
  std::size_t latents = 128;
  std::size_t width = 128;
  std::size_t ff_width = 128;
  std::size_t heads = 4;
  std::size_t classes = 4;
  double latent_init_std = 0.02;
  EncodingConfig encoding;

  // Throws ConfigError on a width not divisible by heads, C < 2, or zeros.
  void validate() const;
  std::size_t head_dim() const { return width / heads; }
};

// Pre-norm attention block followed by a pre-norm feed-forward, both residual.
// Self-attention blocks reuse the query norm for keys/values; cross blocks
// normalize the context with their own kv_norm.
struct AttentionBlock {
  bool cross = true;
  Tensor q_norm_gain, q_norm_bias;
  Tensor kv_norm_gain, kv_norm_bias;
  Tensor wq, wk, wv, wo, bo;
  Tensor ff_norm_gain, ff_norm_bias;
  Tensor w1, b1, w2, b2;

  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct ModelParameters {
  Tensor latents;  // M x d, learnable initial latent state
  Tensor input_w, input_b;
  Tensor query_w, query_b;
  std::vector<AttentionBlock> encoder_cross;
  std::vector<AttentionBlock> encoder_self;
  std::vector<AttentionBlock> decoder;
  Tensor out_norm_gain, out_norm_bias;
  Tensor head_w, head_b;

  static ModelParameters initialize(const ModelConfig& cfg, std::uint64_t seed);

  // Stable order; names are also checkpoint member names.
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::size_t count() const;
  std::vector<double> pack() const;
  void unpack(std::span<const double> flat);
  std::vector<double> pack_grad() const;
  void zero_grad();
};

std::size_t parameter_count(const ModelConfig& cfg);

// One attention block; queries [A, d], context [B, d].
Tensor cross_attention(const Tensor& queries, const Tensor& context, const AttentionBlock& block,
                       std::size_t heads);
Tensor self_attention(const Tensor& latents, const AttentionBlock& block, std::size_t heads);

// Perceiver encoder: H <- H0, then L x (cross-attend the samples, self-attend).
Tensor encode(const KSpaceSampleSet& samples, const ModelParameters& params,
              const ModelConfig& cfg);
// Class probabilities [P, C] for query coordinates given latents [M, d].
Tensor decode(const Tensor& latents, std::span<const std::array<double, 3>> queries,
              const ModelParameters& params, const ModelConfig& cfg);
Tensor forward(const KSpaceSampleSet& samples, std::span<const std::array<double, 3>> queries,
               const ModelParameters& params, const ModelConfig& cfg);

}  // namespace disk
