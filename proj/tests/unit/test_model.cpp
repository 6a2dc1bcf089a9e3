#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "disk/error.hpp"
#include "disk/losses.hpp"
#include "disk/model.hpp"
#include "disk/ops.hpp"
#include "oracles.hpp"

using namespace disk;

namespace {

ModelConfig toy_config(std::size_t layers = 2, std::size_t latents = 4, std::size_t width = 8,
                       std::size_t heads = 2) {
  ModelConfig c;
  c.layers = layers;
  c.latents = latents;
  c.width = width;
  c.ff_width = width;
  c.heads = heads;
  c.classes = 4;
  c.encoding.num_frequencies = 2;
  return c;
}

KSpaceSampleSet random_samples(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KSpaceSampleSet s;
  s.frames = 2;
  s.height = 8;
  s.width = 8;
  for (std::size_t i = 0; i < n; ++i) {
    s.coords.push_back({u(rng), u(rng), u(rng)});
    s.values.emplace_back(u(rng), u(rng));
  }
  return s;
}

std::vector<std::array<double, 3>> random_queries(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> q(n);
  for (auto& c : q) c = {u(rng), u(rng), u(rng)};
  return q;
}

// Moves every parameter off its initial value so biases and gains matter.
void jitter(ModelParameters& p, std::mt19937_64& rng, double amount = 0.3) {
  std::uniform_real_distribution<double> u(-amount, amount);
  for (auto& [name, t] : p.named())
    for (double& v : t.mutable_data()) v += u(rng);
}

void jitter(AttentionBlock& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& [name, t] : b.named("b"))
    for (double& v : t.mutable_data()) v += u(rng);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double max_abs_diff(const Tensor& a, const oracle::Mat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b[i].size(); ++j)
      m = std::max(m, std::abs(a.at({i, j}) - b[i][j]));
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = toy_config();
  CHECK_NOTHROW(c.validate());
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = toy_config();
  c.classes = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = toy_config();
  c.latents = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(ModelConfig{}.head_dim() == 32);
}

TEST_CASE("parameter count and flat round trip") {
  for (const ModelConfig& c : {toy_config(), toy_config(3, 5, 12, 3), ModelConfig{}}) {
    const ModelParameters p = ModelParameters::initialize(c, 1);
    CHECK(p.count() == parameter_count(c));
    ModelParameters q = ModelParameters::initialize(c, 2);
    const std::vector<double> flat = p.pack();
    CHECK(q.pack() != flat);
    q.unpack(flat);
    CHECK(q.pack() == flat);
    CHECK_THROWS_AS(q.unpack(std::span(flat).first(flat.size() - 1)), ShapeError);
  }
  const ModelParameters a = ModelParameters::initialize(toy_config(), 7);
  const ModelParameters b = ModelParameters::initialize(toy_config(), 7);
  CHECK(a.pack() == b.pack());
}

TEST_CASE("named parameters are unique") {
  const ModelParameters p = ModelParameters::initialize(toy_config(), 1);
  std::vector<std::string> names;
  for (const auto& [n, t] : p.named()) names.push_back(n);
  std::sort(names.begin(), names.end());
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
  CHECK(names.front() == "decoder.0.cross.b1");
}

TEST_CASE("cross_attention matches the dense oracle") {
  std::mt19937_64 rng(11);
  for (std::size_t heads : {1u, 2u}) {
    ModelParameters p = ModelParameters::initialize(toy_config(1, 2, 4, heads), 3);
    AttentionBlock blk = p.encoder_cross[0];
    jitter(blk, rng);
    const Tensor q = oracle::random_tensor({2, 4}, rng, false);
    const Tensor ctx = oracle::random_tensor({3, 4}, rng, false);
    const Tensor got = cross_attention(q, ctx, blk, heads);
    const auto want = oracle::dense_attention_block(oracle::to_mat(q), oracle::to_mat(ctx), blk, heads);
    CHECK(max_abs_diff(got, want) < 1e-12);

    AttentionBlock self = p.encoder_self[0];
    jitter(self, rng);
    const Tensor lat = oracle::random_tensor({3, 4}, rng, false);
    const auto want_self = oracle::dense_attention_block(oracle::to_mat(lat), oracle::to_mat(lat), self, heads);
    CHECK(max_abs_diff(self_attention(lat, self, heads), want_self) < 1e-12);
  }
}

TEST_CASE("attention over a single context row") {
  std::mt19937_64 rng(12);
  ModelParameters p = ModelParameters::initialize(toy_config(1, 2, 8, 2), 4);
  AttentionBlock blk = p.encoder_cross[0];
  jitter(blk, rng);
  const Tensor q = oracle::random_tensor({3, 8}, rng, false);
  const Tensor c1 = oracle::random_tensor({1, 8}, rng, false);
  // With one row the weights are 1 whatever the queries say, so changing the
  // query projection leaves the output unchanged.
  const Tensor before = cross_attention(q, c1, blk, 2);
  for (double& v : blk.wq.mutable_data()) v *= -3.0;
  CHECK(max_abs_diff(before, cross_attention(q, c1, blk, 2)) < 1e-12);

  AttentionBlock self = p.encoder_self[0];
  const Tensor one = oracle::random_tensor({1, 8}, rng, false);
  const Tensor out = self_attention(one, self, 2);
  for (double& v : self.wk.mutable_data()) v *= 5.0;
  CHECK(max_abs_diff(out, self_attention(one, self, 2)) < 1e-12);
  CHECK(self_attention(oracle::random_tensor({9, 8}, rng, false), self, 2).shape() == Shape{9, 8});
}

TEST_CASE("cross_attention is invariant to context order") {
  std::mt19937_64 rng(13);
  ModelParameters p = ModelParameters::initialize(toy_config(1, 2, 8, 2), 5);
  const Tensor q = oracle::random_tensor({4, 8}, rng, false);
  const Tensor ctx = oracle::random_tensor({6, 8}, rng, false);
  const std::vector<std::size_t> perm = {5, 2, 0, 4, 1, 3};
  std::vector<double> shuffled;
  for (std::size_t i : perm)
    shuffled.insert(shuffled.end(), ctx.data().begin() + i * 8, ctx.data().begin() + (i + 1) * 8);
  const Tensor ctx2 = Tensor::from({6, 8}, shuffled);
  CHECK(max_abs_diff(cross_attention(q, ctx, p.encoder_cross[0], 2),
                     cross_attention(q, ctx2, p.encoder_cross[0], 2)) < 1e-10);
}

TEST_CASE("attention shape errors") {
  std::mt19937_64 rng(14);
  ModelParameters p = ModelParameters::initialize(toy_config(1, 2, 8, 2), 5);
  const Tensor q = oracle::random_tensor({4, 8}, rng, false);
  CHECK_THROWS_AS(cross_attention(q, Tensor::zeros({0, 8}), p.encoder_cross[0], 2), ShapeError);
  CHECK_THROWS_AS(cross_attention(q, oracle::random_tensor({3, 6}, rng, false), p.encoder_cross[0], 2),
                  ShapeError);
  CHECK_THROWS_AS(cross_attention(q, q, p.encoder_cross[0], 3), ShapeError);
}

TEST_CASE("encoder is permutation invariant") {
  std::mt19937_64 rng(15);
  const ModelConfig cfg = toy_config(2, 6, 16, 4);
  ModelParameters p = ModelParameters::initialize(cfg, 6);
  jitter(p, rng, 0.1);
  const KSpaceSampleSet s = random_samples(40, rng);
  const Tensor base = encode(s, p, cfg);
  double worst = 0.0;
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    KSpaceSampleSet t = s;
    for (std::size_t i = 0; i < order.size(); ++i) {
      t.coords[i] = s.coords[order[i]];
      t.values[i] = s.values[order[i]];
    }
    worst = std::max(worst, max_abs_diff(base, encode(t, p, cfg)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("encoder accepts any sample count") {
  std::mt19937_64 rng(16);
  const ModelConfig cfg = toy_config(2, 6, 16, 4);
  const ModelParameters p = ModelParameters::initialize(cfg, 6);
  for (std::size_t n : {1u, 17u, 1000u}) {
    const Tensor h = encode(random_samples(n, rng), p, cfg);
    CHECK(h.shape() == Shape{6, 16});
  }
  CHECK_THROWS_AS(encode(KSpaceSampleSet{}, p, cfg), DataError);
}

TEST_CASE("duplicated samples leave the latents unchanged") {
  std::mt19937_64 rng(17);
  const ModelConfig cfg = toy_config(2, 6, 16, 4);
  ModelParameters p = ModelParameters::initialize(cfg, 8);
  jitter(p, rng, 0.1);
  const KSpaceSampleSet s = random_samples(25, rng);
  KSpaceSampleSet twice = s;
  twice.coords.insert(twice.coords.end(), s.coords.begin(), s.coords.end());
  twice.values.insert(twice.values.end(), s.values.begin(), s.values.end());
  CHECK(max_abs_diff(encode(s, p, cfg), encode(twice, p, cfg)) <= 1e-6);
}

TEST_CASE("decoder rows are probability vectors and independent") {
  std::mt19937_64 rng(18);
  const ModelConfig cfg = toy_config(2, 6, 16, 4);
  ModelParameters p = ModelParameters::initialize(cfg, 9);
  jitter(p, rng, 0.1);
  const Tensor h = encode(random_samples(30, rng), p, cfg);
  const auto q = random_queries(12, rng);
  const Tensor probs = decode(h, q, p, cfg);
  CHECK(probs.shape() == Shape{12, 4});
  for (std::size_t i = 0; i < 12; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = probs.at({i, c});
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    const std::array<double, 3> one[] = {q[i]};
    const Tensor row = decode(h, one, p, cfg);
    for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, std::abs(row.at({0, c}) - probs.at({i, c})));
  }
  CHECK(worst <= 1e-10);
  CHECK_THROWS_AS(decode(h, {}, p, cfg), ParameterError);
  CHECK(max_abs_diff(probs, decode(h, q, p, cfg)) == 0.0);
}

TEST_CASE("full-model gradients match finite differences") {
  std::mt19937_64 rng(19);
  ModelConfig cfg = toy_config(2, 4, 8, 2);
  ModelParameters p = ModelParameters::initialize(cfg, 10);
  jitter(p, rng, 0.2);
  const KSpaceSampleSet s = random_samples(16, rng);
  const auto q = random_queries(5, rng);
  std::vector<std::uint8_t> labels = {0, 1, 2, 3, 1};
  const Tensor targets = one_hot(labels, 4);
  auto loss = [&] { return total_loss(forward(s, q, p, cfg), targets, LossConfig{}); };
  std::vector<Tensor> leaves;
  for (const auto& [n, t] : p.named()) leaves.push_back(t);
  const oracle::GradCheck r = oracle::check_gradients(loss, leaves);
  MESSAGE("parameters " << r.entries << ", relative error " << r.rel_error);
  CHECK(r.entries == parameter_count(cfg));
  CHECK(r.rel_error <= 1e-4);
}

TEST_CASE("latent initialization receives gradient") {
  std::mt19937_64 rng(20);
  const ModelConfig cfg = toy_config(2, 4, 8, 2);
  ModelParameters p = ModelParameters::initialize(cfg, 11);
  const Tensor targets = one_hot(std::vector<std::uint8_t>{0, 1, 2}, 4);
  backward(total_loss(forward(random_samples(10, rng), random_queries(3, rng), p, cfg), targets,
                      LossConfig{}));
  const std::vector<double> g = p.latents.grad();
  CHECK(std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; }));
}
