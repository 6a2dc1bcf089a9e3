#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace disk {

// Uncompressed ("stored") zip archive. Members are written in insertion
// order with a fixed 1980-01-01 timestamp, so identical contents give
// identical bytes.
class ArchiveWriter {
 public:
  void add(std::string name, std::string bytes);
  std::string bytes() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> members_;
};

// Reads stored-method archives; CRCs are verified.
class ArchiveReader {
 public:
  explicit ArchiveReader(const std::filesystem::path& path);
  static ArchiveReader from_bytes(std::string bytes);

  const std::vector<std::string>& names() const { return names_; }
  bool contains(const std::string& name) const { return members_.count(name) != 0; }
  // Throws DataError for a missing member.
  const std::string& member(const std::string& name) const;

 private:
  ArchiveReader() = default;
  void parse(const std::string& bytes);

  std::vector<std::string> names_;
  std::map<std::string, std::string> members_;
};

}  // namespace disk
