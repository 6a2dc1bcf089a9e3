#include "disk/dataset.hpp"

#include <fstream>
#include <json.hpp>

#include "disk/error.hpp"
#include "disk/serialize.hpp"

namespace disk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json refs_to_json(const std::vector<ScanRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back({{"scan_id", r.scan_id}, {"seed", r.seed}});
  return out;
}

std::vector<ScanRef> refs_from_json(const json& j) {
  std::vector<ScanRef> out;
  for (const auto& item : j) {
    out.push_back({item.at("scan_id").get<std::string>(), item.at("seed").get<std::uint64_t>()});
  }
  return out;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

const std::vector<ScanRef>& DatasetManifest::split(const std::string& name) const {
  if (name == "train") return splits.train;
  if (name == "val") return splits.val;
  if (name == "test") return splits.test;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

void write_scan(const fs::path& dir, const PhantomScan& scan) {
  const Shape shape{scan.image.frames, scan.image.height, scan.image.width};
  std::vector<double> labels(scan.labels.values.begin(), scan.labels.values.end());
  save_tensors(dir / (scan.scan_id + ".dskt"),
               {Tensor::from(shape, scan.image.values), Tensor::from(shape, std::move(labels))});
  write_json(dir / (scan.scan_id + ".json"), {{"scan_id", scan.scan_id},
                                              {"T", scan.image.frames},
                                              {"H", scan.image.height},
                                              {"W", scan.image.width},
                                              {"seed", scan.seed}});
}

PhantomScan read_scan(const fs::path& dir, const std::string& scan_id) {
  const json side = read_json(dir / (scan_id + ".json"));
  const std::vector<Tensor> tensors = load_tensors(dir / (scan_id + ".dskt"));
  if (tensors.size() != 2) throw DataError(scan_id + ".dskt must hold image and labels");
  PhantomScan scan;
  try {
    scan.scan_id = side.at("scan_id").get<std::string>();
    scan.seed = side.at("seed").get<std::uint64_t>();
    const Shape shape{side.at("T").get<std::size_t>(), side.at("H").get<std::size_t>(),
                      side.at("W").get<std::size_t>()};
    if (tensors[0].shape() != shape || tensors[1].shape() != shape) {
      throw DataError("scan " + scan_id + " tensors disagree with sidecar shape");
    }
    scan.image = ImageVolume(shape[0], shape[1], shape[2]);
    scan.labels = LabelVolume(shape[0], shape[1], shape[2]);
  } catch (const json::exception& e) {
    throw DataError("malformed sidecar for " + scan_id + ": " + e.what());
  }
  auto image = tensors[0].data();
  std::copy(image.begin(), image.end(), scan.image.values.begin());
  auto labels = tensors[1].data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = labels[i];
    if (v < 0.0 || v >= static_cast<double>(kNumClasses) || v != static_cast<int>(v)) {
      throw DataError("label value out of range in " + scan_id);
    }
    scan.labels.values[i] = static_cast<std::uint8_t>(v);
  }
  return scan;
}

void write_manifest(const fs::path& dir, const DatasetManifest& manifest) {
  write_json(dir / "manifest.json",
             {{"base_seed", manifest.base_seed},
              {"phantom",
               {{"T", manifest.phantom.frames},
                {"H", manifest.phantom.height},
                {"W", manifest.phantom.width},
                {"noise_sigma", manifest.phantom.noise_sigma}}},
              {"splits",
               {{"train", refs_to_json(manifest.splits.train)},
                {"val", refs_to_json(manifest.splits.val)},
                {"test", refs_to_json(manifest.splits.test)}}}});
}

DatasetManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw DataError("dataset manifest not found: " + path.string());
  const json j = read_json(path);
  DatasetManifest m;
  try {
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    const json& p = j.at("phantom");
    m.phantom.frames = p.at("T").get<std::size_t>();
    m.phantom.height = p.at("H").get<std::size_t>();
    m.phantom.width = p.at("W").get<std::size_t>();
    m.phantom.noise_sigma = p.at("noise_sigma").get<double>();
    const json& s = j.at("splits");
    m.splits.train = refs_from_json(s.at("train"));
    m.splits.val = refs_from_json(s.at("val"));
    m.splits.test = refs_from_json(s.at("test"));
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

std::vector<PhantomScan> load_split(const fs::path& dir, const DatasetManifest& manifest,
                                    const std::string& split) {
  std::vector<PhantomScan> scans;
  for (const ScanRef& ref : manifest.split(split)) scans.push_back(read_scan(dir, ref.scan_id));
  return scans;
}

}  // namespace disk
