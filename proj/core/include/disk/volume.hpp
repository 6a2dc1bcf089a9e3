#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace disk {

// T x H x W grid stored frame-major, then row-major.
template <class T>
struct Volume {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> values;

  Volume() = default;
  Volume(std::size_t t, std::size_t h, std::size_t w, T fill = T{})
      : frames(t), height(h), width(w), values(t * h * w, fill) {}

  std::size_t size() const { return values.size(); }
  std::size_t frame_size() const { return height * width; }
  std::size_t index(std::size_t t, std::size_t y, std::size_t x) const {
    return (t * height + y) * width + x;
  }
  T& at(std::size_t t, std::size_t y, std::size_t x) { return values[index(t, y, x)]; }
  const T& at(std::size_t t, std::size_t y, std::size_t x) const { return values[index(t, y, x)]; }

  template <class U>
  bool same_extent(const Volume<U>& other) const {
    return frames == other.frames && height == other.height && width == other.width;
  }
};

using ImageVolume = Volume<double>;
using LabelVolume = Volume<std::uint8_t>;
using ComplexImage = Volume<std::complex<double>>;

}  // namespace disk
