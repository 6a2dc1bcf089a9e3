#include "disk/cli/png.hpp"

#include <png.h>

#include <fstream>

#include "disk/error.hpp"

namespace disk::cli {

std::string encode_png(const RgbImage& image) {
  if (image.height == 0 || image.width == 0 || image.pixels.size() != image.height * image.width * 3) {
    throw ShapeError("png: image buffer does not match its extent");
  }
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width);
  info.height = static_cast<png_uint_32>(image.height);
  info.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError(std::string("png: ") + info.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&info, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError(std::string("png: ") + info.message);
  }
  out.resize(size);
  return out;
}

RgbImage decode_png(const std::string& bytes) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&info, bytes.data(), bytes.size())) {
    throw DataError(std::string("png: ") + info.message);
  }
  info.format = PNG_FORMAT_RGB;
  RgbImage out(info.height, info.width);
  if (!png_image_finish_read(&info, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&info);
    throw DataError(std::string("png: ") + info.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  const std::string bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

RgbImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return decode_png({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

}  // namespace disk::cli
