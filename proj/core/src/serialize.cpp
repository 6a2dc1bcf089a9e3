#include "disk/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "disk/error.hpp"

namespace disk {

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

namespace {

constexpr std::size_t kMagicLen = 8;
// Guards against reading a garbage length as a multi-gigabyte header.
constexpr std::uint64_t kMaxHeader = 1 << 20;

}  // namespace

void write_tensor(std::ostream& out, const Tensor& tensor) {
  const nlohmann::json header = {
      {"shape", tensor.shape()}, {"dtype", "f64"}, {"order", "row-major"}};
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  out.write(kTensorMagic, kMagicLen);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  auto data = tensor.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw DataError("failed writing tensor container");
}

Tensor read_tensor(std::istream& in) {
  char magic[kMagicLen];
  if (!in.read(magic, kMagicLen) || std::memcmp(magic, kTensorMagic, kMagicLen) != 0) {
    throw DataError("not a DSKT0001 tensor container");
  }
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > kMaxHeader) {
    throw DataError("corrupt tensor header length");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError("truncated tensor header");
  }
  Shape shape;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("dtype") != "f64" || header.at("order") != "row-major") {
      throw DataError("unsupported tensor dtype/order: " + text);
    }
    shape = header.at("shape").get<Shape>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tensor header: ") + e.what());
  }
  std::vector<double> values(shape_numel(shape));
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw DataError("truncated tensor buffer for shape " + shape_str(shape));
  }
  return Tensor::from(std::move(shape), std::move(values));
}

std::string tensor_to_bytes(const Tensor& tensor) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, tensor);
  return std::move(out).str();
}

Tensor tensor_from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_tensor(in);
}

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const Tensor& t : tensors) write_tensor(out, t);
}

std::vector<Tensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Tensor> tensors;
  while (in.peek() != std::char_traits<char>::eof()) tensors.push_back(read_tensor(in));
  return tensors;
}

}  // namespace disk
