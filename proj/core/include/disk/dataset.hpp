#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "disk/phantom.hpp"

namespace disk {

// On-disk layout of a synthesized dataset directory:
//   manifest.json          splits, seeds and the phantom config
//   <scan_id>.dskt         image (T x H x W) then labels (T x H x W), DSKT0001
//   <scan_id>.json         sidecar {"scan_id", "T", "H", "W", "seed"}
struct DatasetManifest {
  PhantomConfig phantom;
  std::uint64_t base_seed = 0;
  DatasetSplits splits;

  const std::vector<ScanRef>& split(const std::string& name) const;
};

void write_scan(const std::filesystem::path& dir, const PhantomScan& scan);
PhantomScan read_scan(const std::filesystem::path& dir, const std::string& scan_id);

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
// Throws DataError when the manifest is missing or malformed.
DatasetManifest read_manifest(const std::filesystem::path& dir);

std::vector<PhantomScan> load_split(const std::filesystem::path& dir,
                                    const DatasetManifest& manifest, const std::string& split);

}  // namespace disk
