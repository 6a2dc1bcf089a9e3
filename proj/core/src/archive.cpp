#include "disk/archive.hpp"

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <iterator>

#include "disk/error.hpp"

namespace disk {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t crc_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::uint32_t get(const std::string& in, std::size_t pos, int width) {
  if (pos + static_cast<std::size_t>(width) > in.size()) throw DataError("truncated archive");
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void ArchiveWriter::add(std::string name, std::string bytes) {
  members_.emplace_back(std::move(name), std::move(bytes));
}

std::string ArchiveWriter::bytes() const {
  std::string out;
  std::string central;
  for (const auto& [name, data] : members_) {
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint32_t crc = crc_of(data);
    const auto size = static_cast<std::uint32_t>(data.size());
    const auto name_len = static_cast<std::uint16_t>(name.size());

    put32(out, kLocalSig);
    put16(out, kVersion);
    put16(out, 0);  // flags
    put16(out, 0);  // stored
    put16(out, 0);  // time
    put16(out, kDosDate);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, name_len);
    put16(out, 0);
    out += name;
    out += data;

    put32(central, kCentralSig);
    put16(central, kVersion);
    put16(central, kVersion);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, kDosDate);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, name_len);
    put16(central, 0);  // extra
    put16(central, 0);  // comment
    put16(central, 0);  // disk
    put16(central, 0);  // internal attrs
    put32(central, 0);  // external attrs
    put32(central, offset);
    central += name;
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(members_.size()));
  put16(out, static_cast<std::uint16_t>(members_.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, central_offset);
  put16(out, 0);
  return out;
}

void ArchiveWriter::write(const std::filesystem::path& path) const {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot open " + path.string() + " for writing");
  const std::string data = bytes();
  file.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!file) throw DataError("failed writing " + path.string());
}

ArchiveReader::ArchiveReader(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open archive " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  parse(bytes);
}

ArchiveReader ArchiveReader::from_bytes(std::string bytes) {
  ArchiveReader reader;
  reader.parse(bytes);
  return reader;
}

void ArchiveReader::parse(const std::string& bytes) {
  // No archive comment is ever written, so the end record sits at a fixed offset.
  if (bytes.size() < 22 || get(bytes, bytes.size() - 22, 4) != kEndSig) {
    throw DataError("not a zip archive (missing end-of-central-directory record)");
  }
  const std::size_t end = bytes.size() - 22;
  const std::uint32_t count = get(bytes, end + 10, 2);
  std::size_t pos = get(bytes, end + 16, 4);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (get(bytes, pos, 4) != kCentralSig) throw DataError("corrupt central directory");
    if (get(bytes, pos + 10, 2) != 0) throw DataError("compressed archive members unsupported");
    const std::uint32_t crc = get(bytes, pos + 16, 4);
    const std::uint32_t size = get(bytes, pos + 20, 4);
    const std::uint32_t name_len = get(bytes, pos + 28, 2);
    const std::uint32_t extra_len = get(bytes, pos + 30, 2);
    const std::uint32_t comment_len = get(bytes, pos + 32, 2);
    const std::uint32_t local = get(bytes, pos + 42, 4);
    if (pos + 46 + name_len > bytes.size()) throw DataError("truncated archive");
    std::string name = bytes.substr(pos + 46, name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (get(bytes, local, 4) != kLocalSig) throw DataError("corrupt local header for " + name);
    const std::size_t data_pos = local + 30 + get(bytes, local + 26, 2) + get(bytes, local + 28, 2);
    if (data_pos + size > bytes.size()) throw DataError("truncated member " + name);
    std::string data = bytes.substr(data_pos, size);
    if (crc_of(data) != crc) throw DataError("CRC mismatch in member " + name);
    names_.push_back(name);
    members_.emplace(std::move(name), std::move(data));
  }
}

const std::string& ArchiveReader::member(const std::string& name) const {
  auto it = members_.find(name);
  if (it == members_.end()) throw DataError("archive has no member " + name);
  return it->second;
}

}  // namespace disk
