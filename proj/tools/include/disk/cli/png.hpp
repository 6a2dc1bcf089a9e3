#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace disk::cli {

struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // RGB, row-major

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w * 3, 0) {}

  void set(std::size_t y, std::size_t x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* p = &pixels[(y * width + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

// 8-bit RGB via libpng.
std::string encode_png(const RgbImage& image);
RgbImage decode_png(const std::string& bytes);
void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

}  // namespace disk::cli
