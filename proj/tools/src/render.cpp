#include "disk/cli/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "disk/error.hpp"

namespace disk::cli {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

std::size_t grid_index(double coord, std::size_t extent) {
  if (extent <= 1) return 0;
  const double pos = (coord + 1.0) * 0.5 * static_cast<double>(extent - 1);
  return static_cast<std::size_t>(std::clamp<long>(std::lround(pos), 0, static_cast<long>(extent - 1)));
}

void check_frame(std::size_t frame, std::size_t frames) {
  if (frame >= frames) {
    throw ParameterError("frame " + std::to_string(frame) + " out of range (T=" +
                         std::to_string(frames) + ")");
  }
}

}  // namespace

RgbImage grayscale_frame(const ImageVolume& image, std::size_t frame) {
  check_frame(frame, image.frames);
  RgbImage out(image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const std::uint8_t g = quantize(image.at(frame, y, x));
      out.set(y, x, g, g, g);
    }
  }
  return out;
}

RgbImage label_overlay(const ImageVolume& image, const LabelVolume& labels, std::size_t frame) {
  if (!image.same_extent(labels)) throw ShapeError("label_overlay: image and labels differ in extent");
  RgbImage out = grayscale_frame(image, frame);
  for (std::size_t y = 0; y < labels.height; ++y) {
    for (std::size_t x = 0; x < labels.width; ++x) {
      const std::uint8_t c = labels.at(frame, y, x);
      if (c == kBackground || c >= kPalette.size()) continue;
      out.set(y, x, kPalette[c][0], kPalette[c][1], kPalette[c][2]);
    }
  }
  return out;
}

RgbImage kspace_scatter(const KSpaceSampleSet& samples, std::size_t frame) {
  check_frame(frame, samples.frames);
  RgbImage out(samples.height, samples.width);
  const double norm = std::log1p(1000.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& c = samples.coords[i];
    if (grid_index(c[2], samples.frames) != frame) continue;
    const std::uint8_t g = quantize(std::log1p(1000.0 * std::abs(samples.values[i])) / norm);
    out.set(grid_index(c[0], samples.height), grid_index(c[1], samples.width), g, g, g);
  }
  return out;
}

RgbImage upscale(const RgbImage& image, std::size_t factor) {
  if (factor <= 1) return image;
  RgbImage out(image.height * factor, image.width * factor);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      const std::uint8_t* p = &image.pixels[((y / factor) * image.width + x / factor) * 3];
      out.set(y, x, p[0], p[1], p[2]);
    }
  }
  return out;
}

std::string render_name(const std::string& scan_id, std::size_t frame, const std::string& kind) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_t%03zu_", frame);
  return scan_id + buf + kind + ".png";
}

std::vector<std::filesystem::path> render_frame(const std::filesystem::path& dir,
                                                const PhantomScan& scan,
                                                const LabelVolume& predicted,
                                                const KSpaceSampleSet& samples,
                                                std::size_t frame, std::size_t scale) {
  const ImageVolume preview = zero_filled_preview(samples);
  const std::pair<const char*, RgbImage> images[] = {
      {"gt", label_overlay(scan.image, scan.labels, frame)},
      {"pred", label_overlay(scan.image, predicted, frame)},
      {"kspace", kspace_scatter(samples, frame)},
      {"zerofill", grayscale_frame(preview, frame)},
  };
  std::vector<std::filesystem::path> paths;
  for (const auto& [kind, image] : images) {
    paths.push_back(dir / render_name(scan.scan_id, frame, kind));
    write_png(paths.back(), upscale(image, scale));
  }
  return paths;
}

}  // namespace disk::cli
