#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "disk/encoding.hpp"
#include "disk/kspace.hpp"
#include "disk/ops.hpp"
#include "oracles.hpp"

using namespace disk;

namespace {

EncodingConfig enc(std::size_t f, bool raw) {
  EncodingConfig c;
  c.num_frequencies = f;
  c.include_raw = raw;
  return c;
}

KSpaceSampleSet samples_of(std::vector<std::array<double, 3>> coords,
                           std::vector<std::complex<double>> values) {
  KSpaceSampleSet s;
  s.coords = std::move(coords);
  s.values = std::move(values);
  s.frames = 1;
  s.height = 4;
  s.width = 4;
  return s;
}

}  // namespace

TEST_CASE("encode_scalar examples") {
  CHECK(encode_scalar(0.0, enc(2, false)) == std::vector<double>{0, 1, 0, 1});
  const auto one = encode_scalar(1.0, enc(1, false));
  REQUIRE(one.size() == 2);
  CHECK(std::abs(one[0]) < 1e-15);
  CHECK(one[1] == -1.0);
  CHECK(enc(10, true).features_per_scalar() == 21);
  CHECK(enc(3, false).features_per_scalar() == 6);
}

TEST_CASE("encode_scalar matches direct evaluation") {
  const double p = 0.37;
  const auto got = encode_scalar(p, enc(6, true));
  REQUIRE(got.size() == 13);
  CHECK(got[0] == p);
  for (int j = 0; j < 6; ++j) {
    const double w = std::pow(2.0, j) * std::numbers::pi;
    CHECK(std::abs(got[1 + 2 * j] - std::sin(w * p)) < 1e-12);
    CHECK(std::abs(got[2 + 2 * j] - std::cos(w * p)) < 1e-12);
  }
}

TEST_CASE("encode_scalar Jacobian agrees with finite differences") {
  const auto cfg = enc(10, true);
  const double h = 1e-7;
  for (double p : {-0.9, -0.2, 0.0, 0.37, 0.81}) {
    const auto up = encode_scalar(p + h, cfg);
    const auto down = encode_scalar(p - h, cfg);
    std::vector<double> analytic = {1.0};
    for (int j = 0; j < 10; ++j) {
      const double w = std::pow(2.0, j) * std::numbers::pi;
      analytic.push_back(w * std::cos(w * p));
      analytic.push_back(-w * std::sin(w * p));
    }
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double fd = (up[i] - down[i]) / (2.0 * h);
      CHECK(std::abs(fd - analytic[i]) <= 1e-6 * std::max(1.0, std::abs(analytic[i])));
    }
  }
}

TEST_CASE("input features layout") {
  const auto cfg = enc(10, true);
  const auto s = samples_of({{0.5, -0.25, 1.0}}, {{0.1, -0.3}});
  const Tensor f = input_features(s, cfg);
  CHECK(f.shape() == Shape{1, 105});
  const double scalars[] = {0.5, -0.25, 1.0, 0.1, -0.3};
  for (std::size_t k = 0; k < 5; ++k) {
    const auto e = encode_scalar(scalars[k], cfg);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(f.data()[k * 21 + i] == e[i]);
  }
}

TEST_CASE("query features layout") {
  const std::vector<std::array<double, 3>> q = {{0.0, 0.0, 0.0}};
  const Tensor f = query_features(q, enc(2, true));
  CHECK(f.shape() == Shape{1, 15});
  const std::vector<double> want = {0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1};
  CHECK(std::vector<double>(f.data().begin(), f.data().end()) == want);
}

TEST_CASE("token builders are row-wise") {
  std::mt19937_64 rng(3);
  const auto cfg = enc(4, true);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> coords(7);
  std::vector<std::complex<double>> values(7);
  for (std::size_t i = 0; i < 7; ++i) {
    coords[i] = {u(rng), u(rng), u(rng)};
    values[i] = {u(rng), u(rng)};
  }
  const Tensor w = oracle::random_tensor({5 * 9, 6}, rng, false);
  const Tensor b = oracle::random_tensor({6}, rng, false);
  const Tensor base = build_input_tokens(samples_of(coords, values), cfg, w, b);
  CHECK(base.shape() == Shape{7, 6});

  const std::vector<std::size_t> perm = {3, 0, 6, 2, 5, 1, 4};
  std::vector<std::array<double, 3>> pc;
  std::vector<std::complex<double>> pv;
  for (std::size_t i : perm) {
    pc.push_back(coords[i]);
    pv.push_back(values[i]);
  }
  const Tensor permuted = build_input_tokens(samples_of(pc, pv), cfg, w, b);
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(permuted.at({r, c}) - base.at({perm[r], c})) < 1e-12);

  const Tensor wq = oracle::random_tensor({3 * 9, 6}, rng, false);
  const Tensor qt = build_query_tokens(coords, cfg, wq, b);
  CHECK(qt.shape() == Shape{7, 6});
  const std::vector<std::array<double, 3>> single = {coords[4]};
  const Tensor one = build_query_tokens(single, cfg, wq, b);
  for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(one.at({0, c}) - qt.at({4, c})) < 1e-12);
}

TEST_CASE("tokens are sensitive to small value changes") {
  std::mt19937_64 rng(8);
  const auto cfg = enc(10, true);
  const Tensor w = oracle::random_tensor({105, 16}, rng, false);
  const Tensor b = Tensor::zeros({16});
  const Tensor t0 = build_input_tokens(samples_of({{0.1, 0.2, 0.0}}, {{0.05, 0.2}}), cfg, w, b);
  const Tensor t1 = build_input_tokens(samples_of({{0.1, 0.2, 0.0}}, {{0.05, 0.201}}), cfg, w, b);
  double norm = 0.0;
  for (std::size_t i = 0; i < 16; ++i) norm += std::pow(t0.data()[i] - t1.data()[i], 2);
  CHECK(std::sqrt(norm) > 0.0);
}

TEST_CASE("grid queries") {
  const auto q = grid_queries(2, 8, 8);
  CHECK(q.size() == 128);
  CHECK(q.front() == std::array<double, 3>{-1.0, -1.0, -1.0});
  CHECK(q.back() == std::array<double, 3>{1.0, 1.0, 1.0});
  CHECK(grid_queries(1, 1, 1).front() == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("encoding is injective on a 64x64 grid") {
  const auto cfg = enc(10, true);
  const auto q = grid_queries(1, 64, 64);
  const Tensor f = query_features(q, cfg);
  const std::size_t width = f.dim(1);
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < q.size(); ++i) {
    seen.insert(std::vector<double>(f.data().begin() + static_cast<std::ptrdiff_t>(i * width),
                                    f.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * width)));
  }
  CHECK(seen.size() == q.size());
  std::size_t close = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < width; ++k) d += std::abs(f.data()[i * width + k] - f.data()[j * width + k]);
      if (d < 1e-9) ++close;
    }
  }
  CHECK(close == 0);
}

TEST_CASE("empty inputs are rejected") {
  const auto cfg = enc(2, true);
  CHECK_THROWS(input_features(KSpaceSampleSet{}, cfg));
  CHECK_THROWS(query_features({}, cfg));
  CHECK_THROWS(encode_scalar(0.1, enc(0, true)));
}
