#include "disk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "disk/error.hpp"

namespace disk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance transform along one line (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const std::size_t n = f.size();
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] < kInf) {
      first = q;
      break;
    }
  }
  if (first == n) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    const auto fq = static_cast<double>(q);
    double s;
    while (true) {
      const auto fv = static_cast<double>(v[k]);
      s = ((f[q] + fq * fq) - (f[v[k]] + fv * fv)) / (2.0 * (fq - fv));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto fq = static_cast<double>(q);
    while (z[k + 1] < fq) ++k;
    const auto fv = static_cast<double>(v[k]);
    d[q] = (fq - fv) * (fq - fv) + f[v[k]];
  }
}

// Exact squared Euclidean distance from every pixel to the nearest seed.
std::vector<double> distance_map(const std::vector<std::pair<int, int>>& seeds, std::size_t h,
                                 std::size_t w) {
  std::vector<double> grid(h * w, kInf);
  for (const auto& [y, x] : seeds) grid[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 0.0;
  std::vector<double> f(h);
  std::vector<double> d(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) f[y] = grid[y * w + x];
    edt_1d(f, d);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y * w), w, f.begin());
    edt_1d(f, d);
    std::copy_n(d.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(y * w));
  }
  return grid;
}

double directed(const std::vector<std::pair<int, int>>& from, const std::vector<double>& to_map,
                std::size_t w) {
  double worst = 0.0;
  for (const auto& [y, x] : from) {
    worst = std::max(worst, to_map[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)]);
  }
  return std::sqrt(worst);
}

void check_sizes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw ShapeError("label maps differ in size: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << v;
  return out.str();
}

}  // namespace

std::vector<std::uint8_t> argmax_labels(std::span<const double> probs, std::size_t classes) {
  if (classes == 0 || probs.size() % classes != 0) {
    throw ShapeError("probability buffer is not a multiple of the class count");
  }
  std::vector<std::uint8_t> out(probs.size() / classes);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = probs.data() + i * classes;
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

double dice_score(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                  std::uint8_t cls) {
  check_sizes(pred, gt);
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool in_a = pred[i] == cls;
    const bool in_b = gt[i] == cls;
    a += in_a;
    b += in_b;
    both += in_a && in_b;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

bool class_absent(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                  std::uint8_t cls) {
  check_sizes(pred, gt);
  return std::find(pred.begin(), pred.end(), cls) == pred.end() &&
         std::find(gt.begin(), gt.end(), cls) == gt.end();
}

std::vector<std::pair<int, int>> boundary_pixels(std::span<const std::uint8_t> frame,
                                                 std::size_t height, std::size_t width,
                                                 std::uint8_t cls) {
  if (frame.size() != height * width) throw ShapeError("frame size does not match H x W");
  const int h = static_cast<int>(height);
  const int w = static_cast<int>(width);
  auto inside = [&](int y, int x) {
    return y >= 0 && x >= 0 && y < h && x < w &&
           frame[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] == cls;
  };
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!inside(y, x)) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          if ((dy || dx) && !inside(y + dy, x + dx)) edge = true;
        }
      }
      if (edge) out.emplace_back(y, x);
    }
  }
  return out;
}

double hausdorff(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                 std::size_t height, std::size_t width, std::uint8_t cls) {
  check_sizes(pred, gt);
  const auto a = boundary_pixels(pred, height, width, cls);
  const auto b = boundary_pixels(gt, height, width, cls);
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) {
    return std::hypot(static_cast<double>(height), static_cast<double>(width));
  }
  const auto to_b = distance_map(b, height, width);
  const auto to_a = distance_map(a, height, width);
  return std::max(directed(a, to_b, width), directed(b, to_a, width));
}

MetricReport evaluate_labels(const LabelVolume& pred, const LabelVolume& gt, double acceleration,
                             const std::string& scan_id) {
  if (!pred.same_extent(gt)) throw ShapeError("prediction and ground truth extents differ");
  MetricReport report;
  report.scan_id = scan_id;
  report.acceleration = acceleration;
  std::array<double, kNumClasses> dice_sum{};
  std::array<std::size_t, kNumClasses> dice_n{};
  std::array<double, kNumClasses> hd_sum{};
  double fg_dice_sum = 0.0;
  double fg_hd_sum = 0.0;
  const std::size_t fs = gt.frame_size();
  for (std::size_t t = 0; t < gt.frames; ++t) {
    std::span<const std::uint8_t> p(pred.values.data() + t * fs, fs);
    std::span<const std::uint8_t> g(gt.values.data() + t * fs, fs);
    double frame_dice = 0.0;
    std::size_t frame_n = 0;
    double frame_hd = 0.0;
    for (std::uint8_t c = 0; c < kNumClasses; ++c) {
      const double hd = hausdorff(p, g, gt.height, gt.width, c);
      hd_sum[c] += hd;
      if (c != kBackground) frame_hd = std::max(frame_hd, hd);
      if (class_absent(p, g, c)) continue;
      const double dice = dice_score(p, g, c);
      dice_sum[c] += dice;
      ++dice_n[c];
      if (c != kBackground) {
        frame_dice += dice;
        ++frame_n;
      }
    }
    fg_dice_sum += frame_n ? frame_dice / static_cast<double>(frame_n) : 1.0;
    fg_hd_sum += frame_hd;
  }
  const auto frames = static_cast<double>(std::max<std::size_t>(gt.frames, 1));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    report.dice[c] = dice_n[c] ? dice_sum[c] / static_cast<double>(dice_n[c]) : 1.0;
    report.hausdorff[c] = hd_sum[c] / frames;
  }
  report.dice_fg_mean = fg_dice_sum / frames;
  report.hd_fg_max = fg_hd_sum / frames;
  return report;
}

MetricReport evaluate_scan(const SegmentationResult& result, const LabelVolume& gt,
                           double acceleration) {
  if (result.labels.size() != gt.size() || !result.labels.same_extent(gt) ||
      result.probabilities.size() != gt.size() * result.classes) {
    throw DataError("segmentation of " + result.scan_id + " does not cover the full " +
                    std::to_string(gt.frames) + "x" + std::to_string(gt.height) + "x" +
                    std::to_string(gt.width) + " grid");
  }
  return evaluate_labels(result.labels, gt, acceleration, result.scan_id);
}

std::string metrics_csv_header() {
  return "scan_id,R,dice_c1,dice_c2,dice_c3,dice_fg_mean,hd_c1,hd_c2,hd_c3,hd_fg_max";
}

std::string metrics_csv_row(const MetricReport& r) {
  std::ostringstream out;
  out << r.scan_id << ',' << r.acceleration;
  for (std::size_t c = 1; c < kNumClasses; ++c) out << ',' << fmt(r.dice[c]);
  out << ',' << fmt(r.dice_fg_mean);
  for (std::size_t c = 1; c < kNumClasses; ++c) out << ',' << fmt(r.hausdorff[c]);
  out << ',' << fmt(r.hd_fg_max);
  return out.str();
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace disk
