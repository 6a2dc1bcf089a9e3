#include "disk/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "disk/error.hpp"
#include "disk/rng.hpp"

namespace disk {

namespace {

struct Ellipse {
  double cy = 0, cx = 0;
  double ry = 1, rx = 1;
  double angle = 0;

  bool contains(double y, double x) const {
    const double dy = y - cy;
    const double dx = x - cx;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = c * dy + s * dx;
    const double v = -s * dy + c * dx;
    return (u * u) / (ry * ry) + (v * v) / (rx * rx) <= 1.0;
  }
};

struct Geometry {
  double cy, cx, angle;
  double pool_ry, pool_rx;  // end-diastolic
  double thickness;
  double contraction;       // fractional pool radius reduction at t = T/2
  double rv_ry, rv_rx, rv_offset, rv_dy;
  double pool_level, myo_level, rv_level, bg_level;
  double tex_amp, tex_fy, tex_fx, tex_phase;
};

Geometry draw_geometry(Rng& rng, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  const double side = static_cast<double>(std::min(h, w));
  Geometry g{};
  g.cy = static_cast<double>(h) * (0.5 + in(-0.1, 0.1));
  g.cx = static_cast<double>(w) * (0.55 + in(-0.1, 0.1));
  g.angle = in(0.0, std::numbers::pi);
  const double r0 = 0.11 * side * in(0.8, 1.2);
  g.pool_ry = r0 * in(0.9, 1.1);
  g.pool_rx = r0 * in(0.9, 1.1);
  g.thickness = std::max(2.0, 0.055 * side * in(0.8, 1.2));
  g.contraction = in(0.25, 0.40);
  g.rv_ry = in(1.15, 1.45);
  g.rv_rx = in(0.8, 1.0);
  g.rv_offset = in(0.65, 0.85);
  g.rv_dy = in(-0.05, 0.05) * side;
  g.pool_level = in(0.75, 0.95);
  g.myo_level = in(0.25, 0.40);
  g.rv_level = in(0.65, 0.90);
  g.bg_level = in(0.10, 0.25);
  g.tex_amp = in(0.03, 0.08);
  g.tex_fy = in(0.5, 2.0) * 2.0 * std::numbers::pi / static_cast<double>(h);
  g.tex_fx = in(0.5, 2.0) * 2.0 * std::numbers::pi / static_cast<double>(w);
  g.tex_phase = in(0.0, 2.0 * std::numbers::pi);
  return g;
}

// Pool radius scale over the cycle: 1 at t=0, 1-contraction at t=T/2.
double pool_scale(const Geometry& g, std::size_t t, std::size_t frames) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(frames);
  return 1.0 - g.contraction * 0.5 * (1.0 - std::cos(phase));
}

void render(const Geometry& g, const PhantomConfig& cfg, Rng& rng, PhantomScan& scan) {
  const std::size_t frames = cfg.frames;
  const std::size_t h = cfg.height;
  const std::size_t w = cfg.width;
  scan.image = ImageVolume(frames, h, w);
  scan.labels = LabelVolume(frames, h, w);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = pool_scale(g, t, frames);
    Ellipse pool{g.cy, g.cx, g.pool_ry * s, g.pool_rx * s, g.angle};
    // Myocardium thickens as the pool shrinks.
    const double grow_y = g.thickness + 0.5 * g.pool_ry * (1.0 - s);
    const double grow_x = g.thickness + 0.5 * g.pool_rx * (1.0 - s);
    Ellipse epi{g.cy, g.cx, pool.ry + grow_y, pool.rx + grow_x, g.angle};
    const double rv_s = 1.0 - 0.5 * (1.0 - s);
    const double epi_r = std::max(epi.ry, epi.rx);
    Ellipse rv{g.cy + g.rv_dy, g.cx - g.rv_offset * epi_r, g.rv_ry * epi_r * rv_s,
               g.rv_rx * epi_r * rv_s, 0.0};
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double py = static_cast<double>(y);
        const double px = static_cast<double>(x);
        std::uint8_t label = kBackground;
        double level = g.bg_level + g.tex_amp * std::sin(g.tex_fy * py + g.tex_phase) *
                                        std::cos(g.tex_fx * px - g.tex_phase);
        if (pool.contains(py, px)) {
          label = kLvPool;
          level = g.pool_level;
        } else if (epi.contains(py, px)) {
          label = kMyocardium;
          level = g.myo_level;
        } else if (rv.contains(py, px)) {
          label = kRightVentricle;
          level = g.rv_level;
        }
        scan.labels.at(t, y, x) = label;
        scan.image.at(t, y, x) = std::clamp(level + noise(rng), 0.0, 1.0);
      }
    }
  }
}

bool plausible(const PhantomScan& scan) {
  const LabelVolume& labels = scan.labels;
  return ring_topology_holds(labels) && all_classes_present(labels) &&
         class_area(labels, labels.frames / 2, kLvPool) < class_area(labels, 0, kLvPool);
}

}  // namespace

std::string scan_id_for_seed(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scan_%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

PhantomScan generate_phantom(std::uint64_t seed, const PhantomConfig& cfg) {
  if (cfg.frames < 2 || cfg.height < 32 || cfg.width < 32) {
    throw ParameterError("phantom needs T >= 2 and H, W >= 32");
  }
  if (cfg.noise_sigma < 0.0) throw ParameterError("phantom noise sigma must be >= 0");
  PhantomScan scan;
  scan.scan_id = scan_id_for_seed(seed);
  scan.seed = seed;
  // Degenerate draws (thin ring, classes leaving the field of view) are
  // redrawn from the next stream.
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng = make_rng(seed, streams::kPhantom + 1000 * static_cast<std::uint64_t>(attempt));
    const Geometry g = draw_geometry(rng, cfg.height, cfg.width);
    render(g, cfg, rng, scan);
    if (plausible(scan)) return scan;
  }
  throw Error("phantom generation failed to find valid geometry for seed " +
              std::to_string(seed));
}

bool ring_topology_holds(const LabelVolume& labels) {
  for (std::size_t t = 0; t < labels.frames; ++t) {
    for (std::size_t y = 0; y < labels.height; ++y) {
      for (std::size_t x = 0; x < labels.width; ++x) {
        if (labels.at(t, y, x) != kLvPool) continue;
        if (y == 0 || x == 0 || y + 1 == labels.height || x + 1 == labels.width) return false;
        const std::uint8_t n[4] = {labels.at(t, y - 1, x), labels.at(t, y + 1, x),
                                   labels.at(t, y, x - 1), labels.at(t, y, x + 1)};
        for (std::uint8_t v : n) {
          if (v != kLvPool && v != kMyocardium) return false;
        }
      }
    }
  }
  return true;
}

bool all_classes_present(const LabelVolume& labels) {
  for (std::size_t t = 0; t < labels.frames; ++t) {
    for (std::uint8_t c = 0; c < kNumClasses; ++c) {
      if (class_area(labels, t, c) == 0) return false;
    }
  }
  return true;
}

std::size_t class_area(const LabelVolume& labels, std::size_t frame, std::uint8_t cls) {
  const auto begin = labels.values.begin() + static_cast<std::ptrdiff_t>(frame * labels.frame_size());
  return static_cast<std::size_t>(
      std::count(begin, begin + static_cast<std::ptrdiff_t>(labels.frame_size()), cls));
}

DatasetSplits make_splits(std::size_t num_train, std::size_t num_val, std::size_t num_test,
                          std::uint64_t base_seed) {
  if (num_train == 0 || num_val == 0 || num_test == 0) {
    throw ParameterError("every split needs at least one scan");
  }
  DatasetSplits splits;
  std::set<std::uint64_t> used;
  auto fill = [&](std::vector<ScanRef>& out, std::size_t count, std::uint64_t split) {
    for (std::uint64_t i = 0; out.size() < count; ++i) {
      const std::uint64_t seed = derive_seed(base_seed, (split << 32) | i);
      if (!used.insert(seed).second) continue;
      out.push_back({scan_id_for_seed(seed), seed});
    }
  };
  fill(splits.train, num_train, 1);
  fill(splits.val, num_val, 2);
  fill(splits.test, num_test, 3);
  return splits;
}

}  // namespace disk
