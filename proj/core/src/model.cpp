#include "disk/model.hpp"

#include <cmath>
#include <random>

#include "disk/error.hpp"
#include "disk/ops.hpp"
#include "disk/rng.hpp"

namespace disk {

namespace {

Tensor normal(Rng& rng, Shape shape, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values), true);
}

Tensor fan_in(Rng& rng, std::size_t in, std::size_t out) {
  return normal(rng, {in, out}, 1.0 / std::sqrt(static_cast<double>(in)));
}

Tensor ones(std::size_t n) { return Tensor::full({n}, 1.0, true); }
Tensor zeros(std::size_t n) { return Tensor::zeros({n}, true); }

AttentionBlock make_block(Rng& rng, const ModelConfig& cfg, bool cross) {
  const std::size_t d = cfg.width;
  AttentionBlock b;
  b.cross = cross;
  b.q_norm_gain = ones(d);
  b.q_norm_bias = zeros(d);
  if (cross) {
    b.kv_norm_gain = ones(d);
    b.kv_norm_bias = zeros(d);
  }
  b.wq = fan_in(rng, d, d);
  b.wk = fan_in(rng, d, d);
  b.wv = fan_in(rng, d, d);
  b.wo = fan_in(rng, d, d);
  b.bo = zeros(d);
  b.ff_norm_gain = ones(d);
  b.ff_norm_bias = zeros(d);
  b.w1 = fan_in(rng, d, cfg.ff_width);
  b.b1 = zeros(cfg.ff_width);
  b.w2 = fan_in(rng, cfg.ff_width, d);
  b.b2 = zeros(d);
  return b;
}

// [A, h*dh] -> [h, A, dh]
Tensor split_heads(const Tensor& x, std::size_t heads) {
  const std::size_t rows = x.dim(0);
  const std::size_t dh = x.dim(1) / heads;
  if (heads == 1) return ops::reshape(x, {1, rows, dh});
  return ops::permute(ops::reshape(x, {rows, heads, dh}), {1, 0, 2});
}

// [h, A, dh] -> [A, h*dh]
Tensor merge_heads(const Tensor& x) {
  const std::size_t heads = x.dim(0);
  const std::size_t rows = x.dim(1);
  const std::size_t dh = x.dim(2);
  if (heads == 1) return ops::reshape(x, {rows, dh});
  return ops::reshape(ops::permute(x, {1, 0, 2}), {rows, heads * dh});
}

Tensor attend(const Tensor& q_in, const Tensor& kv_in, const AttentionBlock& b,
              std::size_t heads) {
  const std::size_t d = q_in.dim(1);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d / heads));
  const Tensor q = split_heads(ops::matmul(q_in, b.wq), heads);
  const Tensor k = split_heads(ops::matmul(kv_in, b.wk), heads);
  const Tensor v = split_heads(ops::matmul(kv_in, b.wv), heads);
  const Tensor scores = ops::scale(ops::matmul(q, ops::transpose(k)), inv_sqrt_dh);
  const Tensor weights = ops::softmax(scores, -1);
  return ops::linear(merge_heads(ops::matmul(weights, v)), b.wo, b.bo);
}

Tensor feed_forward_residual(const Tensor& x, const AttentionBlock& b) {
  const Tensor h = ops::layer_norm(x, b.ff_norm_gain, b.ff_norm_bias);
  return ops::add(x, ops::linear(ops::gelu(ops::linear(h, b.w1, b.b1)), b.w2, b.b2));
}

void check_width(const Tensor& t, std::size_t d, const char* what) {
  if (t.rank() != 2 || t.dim(1) != d) {
    throw ShapeError(std::string(what) + " must be [rows, " + std::to_string(d) + "], got " +
                     shape_str(t.shape()));
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (layers == 0 || latents == 0 || width == 0 || ff_width == 0 || heads == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (width % heads != 0) {
    throw ConfigError("model width " + std::to_string(width) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (classes < 2) throw ConfigError("model needs at least two classes");
  if (encoding.num_frequencies == 0) throw ConfigError("encoding needs at least one frequency");
  if (!(latent_init_std > 0.0)) throw ConfigError("latent_init_std must be positive");
}

std::vector<std::pair<std::string, Tensor>> AttentionBlock::named(const std::string& prefix) const {
  std::vector<std::pair<std::string, Tensor>> out = {
      {prefix + ".q_norm.gain", q_norm_gain}, {prefix + ".q_norm.bias", q_norm_bias}};
  if (cross) {
    out.emplace_back(prefix + ".kv_norm.gain", kv_norm_gain);
    out.emplace_back(prefix + ".kv_norm.bias", kv_norm_bias);
  }
  out.insert(out.end(), {{prefix + ".wq", wq},
                         {prefix + ".wk", wk},
                         {prefix + ".wv", wv},
                         {prefix + ".wo", wo},
                         {prefix + ".bo", bo},
                         {prefix + ".ff_norm.gain", ff_norm_gain},
                         {prefix + ".ff_norm.bias", ff_norm_bias},
                         {prefix + ".w1", w1},
                         {prefix + ".b1", b1},
                         {prefix + ".w2", w2},
                         {prefix + ".b2", b2}});
  return out;
}

ModelParameters ModelParameters::initialize(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, streams::kInit);
  const std::size_t d = cfg.width;
  const std::size_t in_features = kInputScalars * cfg.encoding.features_per_scalar();
  const std::size_t q_features = kQueryScalars * cfg.encoding.features_per_scalar();
  ModelParameters p;
  p.latents = normal(rng, {cfg.latents, d}, cfg.latent_init_std);
  p.input_w = fan_in(rng, in_features, d);
  p.input_b = zeros(d);
  p.query_w = fan_in(rng, q_features, d);
  p.query_b = zeros(d);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    p.encoder_cross.push_back(make_block(rng, cfg, true));
    p.encoder_self.push_back(make_block(rng, cfg, false));
  }
  for (std::size_t l = 0; l < cfg.layers; ++l) p.decoder.push_back(make_block(rng, cfg, true));
  p.out_norm_gain = ones(d);
  p.out_norm_bias = zeros(d);
  p.head_w = fan_in(rng, d, cfg.classes);
  p.head_b = zeros(cfg.classes);
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParameters::named() const {
  std::vector<std::pair<std::string, Tensor>> out = {{"latents", latents},
                                                     {"input_proj.w", input_w},
                                                     {"input_proj.b", input_b},
                                                     {"query_proj.w", query_w},
                                                     {"query_proj.b", query_b}};
  auto append = [&out](const std::vector<std::pair<std::string, Tensor>>& more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  for (std::size_t l = 0; l < encoder_cross.size(); ++l) {
    append(encoder_cross[l].named("encoder." + std::to_string(l) + ".cross"));
    append(encoder_self[l].named("encoder." + std::to_string(l) + ".self"));
  }
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    append(decoder[l].named("decoder." + std::to_string(l) + ".cross"));
  }
  out.insert(out.end(), {{"head.norm.gain", out_norm_gain},
                         {"head.norm.bias", out_norm_bias},
                         {"head.w", head_w},
                         {"head.b", head_b}});
  return out;
}

std::size_t ModelParameters::count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t.size();
  return n;
}

std::vector<double> ModelParameters::pack() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (const auto& [name, t] : named()) flat.insert(flat.end(), t.data().begin(), t.data().end());
  return flat;
}

void ModelParameters::unpack(std::span<const double> flat) {
  if (flat.size() != count()) {
    throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) +
                     " entries, model needs " + std::to_string(count()));
  }
  std::size_t offset = 0;
  for (auto& [name, t] : named()) {
    auto dst = t.mutable_data();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    offset += dst.size();
  }
}

std::vector<double> ModelParameters::pack_grad() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (const auto& [name, t] : named()) {
    const std::vector<double> g = t.grad();
    flat.insert(flat.end(), g.begin(), g.end());
  }
  return flat;
}

void ModelParameters::zero_grad() {
  for (auto& [name, t] : named()) t.zero_grad();
}

std::size_t parameter_count(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.width;
  const std::size_t f = cfg.ff_width;
  const std::size_t per = cfg.encoding.features_per_scalar();
  const std::size_t block_common = 2 * d + 4 * d * d + d + 2 * d + d * f + f + f * d + d;
  const std::size_t cross = block_common + 2 * d;
  return cfg.latents * d + (kInputScalars * per + 1) * d + (kQueryScalars * per + 1) * d +
         cfg.layers * (cross + block_common) + cfg.layers * cross + 2 * d + d * cfg.classes +
         cfg.classes;
}

Tensor cross_attention(const Tensor& queries, const Tensor& context, const AttentionBlock& block,
                       std::size_t heads) {
  const std::size_t d = block.wq.dim(0);
  check_width(queries, d, "cross_attention queries");
  check_width(context, d, "cross_attention context");
  if (context.dim(0) == 0) throw ShapeError("cross_attention: empty context");
  if (d % heads != 0) throw ShapeError("cross_attention: width not divisible by heads");
  const Tensor qn = ops::layer_norm(queries, block.q_norm_gain, block.q_norm_bias);
  const Tensor kvn = block.cross ? ops::layer_norm(context, block.kv_norm_gain, block.kv_norm_bias)
                                 : ops::layer_norm(context, block.q_norm_gain, block.q_norm_bias);
  const Tensor x = ops::add(queries, attend(qn, kvn, block, heads));
  return feed_forward_residual(x, block);
}

Tensor self_attention(const Tensor& latents, const AttentionBlock& block, std::size_t heads) {
  const std::size_t d = block.wq.dim(0);
  check_width(latents, d, "self_attention latents");
  if (latents.dim(0) == 0) throw ShapeError("self_attention: no latents");
  const Tensor n = ops::layer_norm(latents, block.q_norm_gain, block.q_norm_bias);
  const Tensor x = ops::add(latents, attend(n, n, block, heads));
  return feed_forward_residual(x, block);
}

Tensor encode(const KSpaceSampleSet& samples, const ModelParameters& params,
              const ModelConfig& cfg) {
  if (samples.size() == 0) throw DataError("encode: empty k-space sample set");
  const Tensor tokens = build_input_tokens(samples, cfg.encoding, params.input_w, params.input_b);
  Tensor h = params.latents;
  for (std::size_t l = 0; l < params.encoder_cross.size(); ++l) {
    h = cross_attention(h, tokens, params.encoder_cross[l], cfg.heads);
    h = self_attention(h, params.encoder_self[l], cfg.heads);
  }
  return h;
}

Tensor decode(const Tensor& latents, std::span<const std::array<double, 3>> queries,
              const ModelParameters& params, const ModelConfig& cfg) {
  if (queries.empty()) throw ParameterError("decode: no query coordinates");
  Tensor q = build_query_tokens(queries, cfg.encoding, params.query_w, params.query_b);
  for (const AttentionBlock& block : params.decoder) {
    q = cross_attention(q, latents, block, cfg.heads);
  }
  const Tensor h = ops::layer_norm(q, params.out_norm_gain, params.out_norm_bias);
  return ops::softmax(ops::linear(h, params.head_w, params.head_b), -1);
}

Tensor forward(const KSpaceSampleSet& samples, std::span<const std::array<double, 3>> queries,
               const ModelParameters& params, const ModelConfig& cfg) {
  return decode(encode(samples, params, cfg), queries, params, cfg);
}

}  // namespace disk
