#include <doctest.h>

#include <algorithm>
#include <set>

#include "disk/error.hpp"
#include "disk/phantom.hpp"

using namespace disk;

namespace {

double foreground_fraction(const PhantomScan& s) {
  const auto fg = std::count_if(s.labels.values.begin(), s.labels.values.end(),
                                [](std::uint8_t v) { return v != kBackground; });
  return static_cast<double>(fg) / static_cast<double>(s.labels.size());
}

}  // namespace

TEST_CASE("generate_phantom is deterministic") {
  const PhantomScan a = generate_phantom(123);
  const PhantomScan b = generate_phantom(123);
  CHECK(a.image.values == b.image.values);
  CHECK(a.labels.values == b.labels.values);
  CHECK(a.scan_id == b.scan_id);
  const PhantomScan c = generate_phantom(124);
  CHECK(a.labels.values != c.labels.values);
}

TEST_CASE("default extents and value ranges") {
  const PhantomScan s = generate_phantom(5);
  CHECK(s.image.frames == 50);
  CHECK(s.image.height == 80);
  CHECK(s.image.width == 80);
  CHECK(s.labels.same_extent(s.image));
  for (double v : s.image.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (std::uint8_t v : s.labels.values) CHECK(v < kNumClasses);
}

TEST_CASE("invariants over 1000 seeds") {
  PhantomConfig cfg;
  cfg.frames = 10;
  cfg.height = 64;
  cfg.width = 64;
  std::size_t failures = 0;
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const PhantomScan s = generate_phantom(seed * 7919 + 1, cfg);
    const bool ok = ring_topology_holds(s.labels) && all_classes_present(s.labels) &&
                    class_area(s.labels, cfg.frames / 2, kLvPool) < class_area(s.labels, 0, kLvPool);
    if (!ok) ++failures;
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      const double fg = 1.0 - static_cast<double>(class_area(s.labels, t, kBackground)) /
                                  static_cast<double>(s.labels.frame_size());
      lo = std::min(lo, fg);
      hi = std::max(hi, fg);
    }
  }
  CHECK(failures == 0);
  MESSAGE("per-frame foreground fraction range [" << lo << ", " << hi << "]");
}

TEST_CASE("mean foreground fraction stays in range") {
  for (const auto& [t, h] : {std::pair<std::size_t, std::size_t>{10, 64}, {50, 80}, {4, 32}}) {
    PhantomConfig cfg;
    cfg.frames = t;
    cfg.height = h;
    cfg.width = h;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const double f = foreground_fraction(generate_phantom(seed, cfg));
      CHECK(f >= 0.03);
      CHECK(f <= 0.25);
    }
  }
}

TEST_CASE("invariant checks detect violations") {
  LabelVolume l(1, 5, 5, kBackground);
  l.at(0, 2, 2) = kLvPool;
  CHECK_FALSE(ring_topology_holds(l));
  for (std::size_t y = 1; y < 4; ++y)
    for (std::size_t x = 1; x < 4; ++x) l.at(0, y, x) = kMyocardium;
  l.at(0, 2, 2) = kLvPool;
  CHECK(ring_topology_holds(l));
  CHECK_FALSE(all_classes_present(l));
  l.at(0, 0, 0) = kRightVentricle;
  CHECK(all_classes_present(l));
  CHECK(class_area(l, 0, kMyocardium) == 8);
}

TEST_CASE("parameter errors") {
  PhantomConfig cfg;
  cfg.frames = 1;
  CHECK_THROWS_AS(generate_phantom(1, cfg), ParameterError);
  cfg.frames = 2;
  cfg.height = 31;
  CHECK_THROWS_AS(generate_phantom(1, cfg), ParameterError);
  cfg.height = 32;
  cfg.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_phantom(1, cfg), ParameterError);
}

TEST_CASE("make_splits") {
  const DatasetSplits s = make_splits(60, 20, 20, 9);
  CHECK(s.train.size() == 60);
  CHECK(s.val.size() == 20);
  CHECK(s.test.size() == 20);
  std::set<std::string> ids;
  for (const auto* split : {&s.train, &s.val, &s.test})
    for (const ScanRef& r : *split) ids.insert(r.scan_id);
  CHECK(ids.size() == 100);

  const DatasetSplits again = make_splits(60, 20, 20, 9);
  for (std::size_t i = 0; i < 60; ++i) CHECK(again.train[i].seed == s.train[i].seed);

  std::size_t differing = 0;
  for (std::uint64_t base = 100; base < 110; ++base) {
    const DatasetSplits other = make_splits(60, 20, 20, base);
    std::set<std::uint64_t> a, b;
    for (const ScanRef& r : s.train) a.insert(r.seed);
    for (const ScanRef& r : other.train) b.insert(r.seed);
    if (a != b) ++differing;
  }
  CHECK(differing == 10);

  CHECK_THROWS_AS(make_splits(0, 1, 1, 0), ParameterError);
  CHECK_THROWS_AS(make_splits(1, 1, 0, 0), ParameterError);
}
