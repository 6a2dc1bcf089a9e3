#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disk/tensor.hpp"

namespace disk {

// DSKT0001 container: 8-byte magic, u64 little-endian header length, UTF-8
// JSON header {"shape", "dtype": "f64", "order": "row-major"}, then the raw
// little-endian float64 buffer. Records may be concatenated in one stream.
inline constexpr char kTensorMagic[] = "DSKT0001";

void write_tensor(std::ostream& out, const Tensor& tensor);
// Throws DataError on bad magic, malformed header or truncation.
Tensor read_tensor(std::istream& in);

std::string tensor_to_bytes(const Tensor& tensor);
Tensor tensor_from_bytes(const std::string& bytes);

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> load_tensors(const std::filesystem::path& path);

}  // namespace disk
