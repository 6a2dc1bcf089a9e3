#include "disk/kspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "disk/error.hpp"
#include "disk/rng.hpp"

namespace disk {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Direct twiddles; a running product drifts past the oracle tolerance.
      const cd w = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                       static_cast<double>(len));
      for (std::size_t i = k; i < n; i += len) {
        const cd u = a[i];
        const cd v = a[i + half] * w;
        a[i] = u + v;
        a[i + half] = u - v;
      }
    }
  }
}

void dft_direct(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> twiddle(n);
  for (std::size_t k = 0; k < n; ++k) {
    twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
  }
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * twiddle[(j * k) % n];
    out[k] = acc;
  }
  a = std::move(out);
}

void transform_1d(std::vector<cd>& a, bool inverse) {
  if (is_pow2(a.size())) {
    fft_radix2(a, inverse);
  } else {
    dft_direct(a, inverse);
  }
}

// Unnormalized 2-D transform of one frame in place, natural (uncentered) order.
void transform_frame(cd* frame, std::size_t h, std::size_t w, bool inverse) {
  std::vector<cd> line(w);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(frame + y * w, w, line.begin());
    transform_1d(line, inverse);
    std::copy_n(line.begin(), w, frame + y * w);
  }
  line.resize(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) line[y] = frame[y * w + x];
    transform_1d(line, inverse);
    for (std::size_t y = 0; y < h; ++y) frame[y * w + x] = line[y];
  }
}

// forward: natural -> centered (index i moves to i + n/2); inverse undoes it.
ComplexImage shift(const ComplexImage& in, bool to_centered) {
  ComplexImage out(in.frames, in.height, in.width);
  const std::size_t h = in.height;
  const std::size_t w = in.width;
  for (std::size_t t = 0; t < in.frames; ++t) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t ys = (y + h / 2) % h;
        const std::size_t xs = (x + w / 2) % w;
        if (to_centered) {
          out.at(t, ys, xs) = in.at(t, y, x);
        } else {
          out.at(t, y, x) = in.at(t, ys, xs);
        }
      }
    }
  }
  return out;
}

std::size_t index_from_coordinate(double c, std::size_t extent) {
  if (extent <= 1) return 0;
  const double pos = (c + 1.0) * 0.5 * static_cast<double>(extent - 1);
  return static_cast<std::size_t>(std::clamp(std::lround(pos), 0L, static_cast<long>(extent - 1)));
}

}  // namespace

ComplexImage dft2(const ComplexImage& image) {
  ComplexImage out = image;
  for (std::size_t t = 0; t < out.frames; ++t) {
    transform_frame(out.values.data() + t * out.frame_size(), out.height, out.width, false);
  }
  return shift(out, true);
}

ComplexImage idft2(const ComplexImage& kspace) {
  ComplexImage out = shift(kspace, false);
  const double norm = 1.0 / static_cast<double>(out.frame_size());
  for (std::size_t t = 0; t < out.frames; ++t) {
    cd* frame = out.values.data() + t * out.frame_size();
    transform_frame(frame, out.height, out.width, true);
    for (std::size_t i = 0; i < out.frame_size(); ++i) frame[i] *= norm;
  }
  return out;
}

ComplexImage to_complex(const ImageVolume& image) {
  ComplexImage out(image.frames, image.height, image.width);
  std::copy(image.values.begin(), image.values.end(), out.values.begin());
  return out;
}

std::vector<double> b0_phase_field(std::size_t height, std::size_t width, const B0Config& cfg,
                                   std::uint64_t seed) {
  if (cfg.bumps < 0 || cfg.min_width <= 0.0 || cfg.max_width < cfg.min_width ||
      cfg.amplitude_sigma < 0.0) {
    throw ParameterError("invalid B0 field configuration");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> cy(0.0, static_cast<double>(height));
  std::uniform_real_distribution<double> cx(0.0, static_cast<double>(width));
  std::uniform_real_distribution<double> spread(cfg.min_width * static_cast<double>(height),
                                                cfg.max_width * static_cast<double>(height));
  std::normal_distribution<double> amplitude(0.0, cfg.amplitude_sigma);

  std::vector<double> phase(height * width, 0.0);
  for (int g = 0; g < cfg.bumps; ++g) {
    const double y0 = cy(rng);
    const double x0 = cx(rng);
    const double s = spread(rng);
    const double a = cfg.amplitude_sigma > 0.0 ? amplitude(rng) : 0.0;
    const double inv = 1.0 / (2.0 * s * s);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = static_cast<double>(y) - y0;
        const double dx = static_cast<double>(x) - x0;
        phase[y * width + x] += a * std::exp(-(dy * dy + dx * dx) * inv);
      }
    }
  }
  return phase;
}

ComplexImage apply_phase(const ImageVolume& image, const std::vector<double>& phase) {
  if (phase.size() != image.frame_size()) throw ShapeError("phase map does not match frame size");
  ComplexImage out(image.frames, image.height, image.width);
  for (std::size_t t = 0; t < image.frames; ++t) {
    for (std::size_t i = 0; i < image.frame_size(); ++i) {
      const double v = image.values[t * image.frame_size() + i];
      out.values[t * image.frame_size() + i] = v * std::polar(1.0, phase[i]);
    }
  }
  return out;
}

ComplexImage apply_b0_phase(const ImageVolume& image, const B0Config& cfg, std::uint64_t seed) {
  return apply_phase(image, b0_phase_field(image.height, image.width, cfg, seed));
}

std::size_t UndersamplingMask::lines_in_frame(std::size_t t) const {
  return static_cast<std::size_t>(
      std::count(lines.begin() + static_cast<std::ptrdiff_t>(t * height),
                 lines.begin() + static_cast<std::ptrdiff_t>((t + 1) * height), 1));
}

std::size_t UndersamplingMask::total_lines() const {
  return static_cast<std::size_t>(std::count(lines.begin(), lines.end(), 1));
}

std::size_t lines_per_frame(std::size_t height, double acceleration) {
  const auto n = static_cast<std::size_t>(std::round(static_cast<double>(height) / acceleration));
  return std::clamp<std::size_t>(n, 1, height);
}

UndersamplingMask generate_mask(std::size_t frames, std::size_t height, double acceleration,
                                std::uint64_t seed, const MaskConfig& cfg) {
  if (height == 0 || frames == 0) throw ParameterError("mask needs at least one frame and line");
  if (!(acceleration >= 1.0 && acceleration <= static_cast<double>(height))) {
    throw ParameterError("acceleration " + std::to_string(acceleration) + " outside [1, " +
                         std::to_string(height) + "]");
  }
  if (!(cfg.sigma_fraction > 0.0)) throw ParameterError("mask sigma must be positive");
  UndersamplingMask mask;
  mask.frames = frames;
  mask.height = height;
  mask.acceleration = acceleration;
  mask.lines.assign(frames * height, 0);

  const std::size_t wanted = lines_per_frame(height, acceleration);
  const std::size_t dc = height / 2;
  const double center = static_cast<double>(dc);
  Rng rng(seed);
  std::normal_distribution<double> draw(center, cfg.sigma_fraction * static_cast<double>(height));
  for (std::size_t t = 0; t < frames; ++t) {
    std::uint8_t* row = mask.lines.data() + t * height;
    row[dc] = 1;
    std::size_t chosen = 1;
    while (chosen < wanted) {
      const double v = std::round(draw(rng));
      const auto y = static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(height - 1)));
      if (!row[y]) {
        row[y] = 1;
        ++chosen;
      }
    }
  }
  return mask;
}

double normalized_coordinate(std::size_t index, std::size_t extent) {
  if (extent <= 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(index) / static_cast<double>(extent - 1);
}

KSpaceSampleSet extract_samples(const ComplexImage& kspace, const UndersamplingMask& mask) {
  if (mask.frames != kspace.frames || mask.height != kspace.height) {
    throw ShapeError("mask (" + std::to_string(mask.frames) + "x" + std::to_string(mask.height) +
                     ") does not match k-space (" + std::to_string(kspace.frames) + "x" +
                     std::to_string(kspace.height) + ")");
  }
  const std::size_t lines = mask.total_lines();
  if (lines == 0 || kspace.width == 0) throw DataError("empty undersampling mask");

  KSpaceSampleSet s;
  s.frames = kspace.frames;
  s.height = kspace.height;
  s.width = kspace.width;
  s.acceleration = mask.acceleration;
  s.coords.reserve(lines * kspace.width);
  s.values.reserve(lines * kspace.width);
  for (std::size_t t = 0; t < kspace.frames; ++t) {
    const double tc = normalized_coordinate(t, kspace.frames);
    for (std::size_t y = 0; y < kspace.height; ++y) {
      if (!mask.sampled(t, y)) continue;
      const double yc = normalized_coordinate(y, kspace.height);
      for (std::size_t x = 0; x < kspace.width; ++x) {
        s.coords.push_back({yc, normalized_coordinate(x, kspace.width), tc});
        s.values.push_back(kspace.at(t, y, x));
      }
    }
  }
  double peak = 0.0;
  for (const cd& v : s.values) peak = std::max(peak, std::abs(v));
  s.scale = peak > 0.0 ? peak : 1.0;
  for (cd& v : s.values) v /= s.scale;
  return s;
}

KSpaceSampleSet synthesize_samples(const ImageVolume& image, double acceleration,
                                   std::uint64_t seed, const SynthConfig& cfg) {
  const ComplexImage source =
      cfg.apply_b0 ? apply_b0_phase(image, cfg.b0, derive_seed(seed, streams::kB0))
                   : to_complex(image);
  const ComplexImage kspace = dft2(source);
  const UndersamplingMask mask = generate_mask(image.frames, image.height, acceleration,
                                               derive_seed(seed, streams::kMask), cfg.mask);
  return extract_samples(kspace, mask);
}

ComplexImage scatter_samples(const KSpaceSampleSet& samples) {
  ComplexImage grid(samples.frames, samples.height, samples.width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& c = samples.coords[i];
    const std::size_t y = index_from_coordinate(c[0], samples.height);
    const std::size_t x = index_from_coordinate(c[1], samples.width);
    const std::size_t t = index_from_coordinate(c[2], samples.frames);
    grid.at(t, y, x) = samples.values[i] * samples.scale;
  }
  return grid;
}

ImageVolume zero_filled_preview(const KSpaceSampleSet& samples) {
  const ComplexImage image = idft2(scatter_samples(samples));
  ImageVolume out(image.frames, image.height, image.width);
  for (std::size_t i = 0; i < image.size(); ++i) out.values[i] = std::abs(image.values[i]);
  return out;
}

}  // namespace disk
