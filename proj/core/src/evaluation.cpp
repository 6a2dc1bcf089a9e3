#include "disk/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "disk/error.hpp"

namespace disk {

using nlohmann::json;

namespace {

json mean_std_json(const std::vector<double>& v) {
  const MeanStd ms = mean_std(v);
  return {{"mean", ms.mean}, {"std", ms.std}};
}

std::string pm(const json& j, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f±%.*f", digits, j.at("mean").get<double>(), digits,
                j.at("std").get<double>());
  return buf;
}

}  // namespace

SegmentationResult oracle_prediction(const PhantomScan& scan, std::size_t classes) {
  SegmentationResult r;
  r.scan_id = scan.scan_id;
  r.classes = classes;
  r.labels = scan.labels;
  r.probabilities.assign(scan.labels.size() * classes, 0.0);
  for (std::size_t i = 0; i < scan.labels.size(); ++i) {
    r.probabilities[i * classes + scan.labels.values[i]] = 1.0;
  }
  return r;
}

std::vector<MetricReport> evaluate_split(const std::vector<PhantomScan>& scans,
                                         const std::vector<double>& accelerations,
                                         const Predictor& predict) {
  std::vector<MetricReport> out;
  out.reserve(scans.size() * accelerations.size());
  for (double r : accelerations) {
    for (const PhantomScan& scan : scans) {
      out.push_back(evaluate_scan(predict(scan, r), scan.labels, r));
    }
  }
  return out;
}

json summarize(const std::vector<MetricReport>& reports, const std::string& split) {
  std::map<double, std::vector<const MetricReport*>> by_r;
  for (const MetricReport& r : reports) by_r[r.acceleration].push_back(&r);
  json rows = json::array();
  for (const auto& [acc, group] : by_r) {
    json row = {{"R", acc}, {"scans", group.size()}};
    auto column = [&](auto get) {
      std::vector<double> v;
      for (const MetricReport* r : group) v.push_back(get(*r));
      return mean_std_json(v);
    };
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      row["dice_c" + std::to_string(c)] = column([c](const MetricReport& r) { return r.dice[c]; });
      row["hd_c" + std::to_string(c)] =
          column([c](const MetricReport& r) { return r.hausdorff[c]; });
    }
    row["dice_fg_mean"] = column([](const MetricReport& r) { return r.dice_fg_mean; });
    row["hd_fg_max"] = column([](const MetricReport& r) { return r.hd_fg_max; });
    rows.push_back(std::move(row));
  }
  return {{"split", split}, {"results", rows}};
}

std::vector<std::string> summary_lines(const json& summary) {
  std::vector<std::string> out;
  for (const json& row : summary.at("results")) {
    char head[32];
    std::snprintf(head, sizeof head, "R=%-3g", row.at("R").get<double>());
    out.push_back(std::string(head) + "  dice_fg " + pm(row.at("dice_fg_mean"), 3) + "  hd_fg " +
                  pm(row.at("hd_fg_max"), 2));
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << metrics_csv_header() << '\n';
  for (const MetricReport& r : reports) out << metrics_csv_row(r) << '\n';
}

}  // namespace disk
