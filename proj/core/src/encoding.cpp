#include "disk/encoding.hpp"

#include <cmath>
#include <numbers>

#include "disk/error.hpp"
#include "disk/ops.hpp"

namespace disk {

void encode_scalar_into(double p, const EncodingConfig& cfg, std::span<double> out) {
  if (cfg.num_frequencies == 0) throw ParameterError("encoding needs at least one frequency");
  std::size_t k = 0;
  if (cfg.include_raw) out[k++] = p;
  double freq = std::numbers::pi;
  for (std::size_t j = 0; j < cfg.num_frequencies; ++j) {
    out[k++] = std::sin(freq * p);
    out[k++] = std::cos(freq * p);
    freq *= 2.0;
  }
}

std::vector<double> encode_scalar(double p, const EncodingConfig& cfg) {
  std::vector<double> out(cfg.features_per_scalar());
  encode_scalar_into(p, cfg, out);
  return out;
}

Tensor input_features(const KSpaceSampleSet& samples, const EncodingConfig& cfg) {
  if (samples.size() == 0) throw DataError("empty k-space sample set");
  const std::size_t per = cfg.features_per_scalar();
  const std::size_t width = kInputScalars * per;
  Buffer out(samples.size() * width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& c = samples.coords[i];
    const double scalars[kInputScalars] = {c[0], c[1], c[2], samples.values[i].real(),
                                           samples.values[i].imag()};
    for (std::size_t s = 0; s < kInputScalars; ++s) {
      encode_scalar_into(scalars[s], cfg, std::span(out).subspan(i * width + s * per, per));
    }
  }
  return make_result({samples.size(), width}, std::move(out));
}

Tensor query_features(std::span<const std::array<double, 3>> queries, const EncodingConfig& cfg) {
  if (queries.empty()) throw ParameterError("no query coordinates");
  const std::size_t per = cfg.features_per_scalar();
  const std::size_t width = kQueryScalars * per;
  Buffer out(queries.size() * width);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t s = 0; s < kQueryScalars; ++s) {
      encode_scalar_into(queries[i][s], cfg, std::span(out).subspan(i * width + s * per, per));
    }
  }
  return make_result({queries.size(), width}, std::move(out));
}

Tensor build_input_tokens(const KSpaceSampleSet& samples, const EncodingConfig& cfg,
                          const Tensor& weight, const Tensor& bias) {
  return ops::linear(input_features(samples, cfg), weight, bias);
}

Tensor build_query_tokens(std::span<const std::array<double, 3>> queries,
                          const EncodingConfig& cfg, const Tensor& weight, const Tensor& bias) {
  return ops::linear(query_features(queries, cfg), weight, bias);
}

std::vector<std::array<double, 3>> grid_queries(std::size_t frames, std::size_t height,
                                                std::size_t width) {
  std::vector<std::array<double, 3>> out;
  out.reserve(frames * height * width);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        out.push_back({normalized_coordinate(y, height), normalized_coordinate(x, width),
                       normalized_coordinate(t, frames)});
      }
    }
  }
  return out;
}

}  // namespace disk
