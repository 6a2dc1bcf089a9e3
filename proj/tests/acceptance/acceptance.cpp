// Acceptance runner: one PASS/FAIL line per criterion.
//
//   disk_acceptance [--suite fast|desk|all] [--work DIR] [--config desk.json]
//
// fast: A1 A2 A5 A6 A7 (seconds). desk: A3 A4 (three full training runs).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "disk/config.hpp"
#include "disk/evaluation.hpp"
#include "disk/kspace.hpp"
#include "disk/losses.hpp"
#include "disk/metrics.hpp"
#include "disk/model.hpp"
#include "disk/ops.hpp"
#include "disk/phantom.hpp"
#include "disk/trainer.hpp"
#include "oracles.hpp"

using namespace disk;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- A1

Verdict a1_gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  using oracle::random_tensor;
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({3, 4}, rng);
  Tensor m = random_tensor({4, 5}, rng);
  Tensor row = random_tensor({4}, rng);
  Tensor bias = random_tensor({5}, rng);
  Tensor pos = random_tensor({3, 4}, rng, true, 0.5, 2.0);
  Tensor prob = random_tensor({3, 4}, rng, true, 0.05, 0.95);
  const Tensor w = random_tensor({3, 4}, rng, false);
  const Tensor w5 = random_tensor({3, 5}, rng, false);
  const Tensor targets = one_hot(std::vector<std::uint8_t>{0, 3, 1}, 4);
  auto probe = [&](const Tensor& y) { return ops::sum(ops::mul(y, w)); };

  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"matmul", [&] { return ops::sum(ops::mul(ops::matmul(a, m), w5)); }},
      {"linear", [&] { return ops::sum(ops::mul(ops::linear(a, m, bias), w5)); }},
      {"add", [&] { return probe(ops::add(a, b)); }},
      {"add broadcast", [&] { return probe(ops::add(a, row)); }},
      {"sub", [&] { return probe(ops::sub(a, row)); }},
      {"mul", [&] { return probe(ops::mul(a, b)); }},
      {"div", [&] { return probe(ops::div(a, pos)); }},
      {"scale", [&] { return probe(ops::scale(a, -2.5)); }},
      {"add_scalar", [&] { return probe(ops::add_scalar(a, 0.3)); }},
      {"neg", [&] { return probe(ops::neg(a)); }},
      {"gelu", [&] { return probe(ops::gelu(a)); }},
      {"sin", [&] { return probe(ops::sin(a)); }},
      {"cos", [&] { return probe(ops::cos(a)); }},
      {"exp", [&] { return probe(ops::exp(a)); }},
      {"log", [&] { return probe(ops::log(pos)); }},
      {"sigmoid", [&] { return probe(ops::sigmoid(a)); }},
      {"clamp", [&] { return probe(ops::clamp(a, -0.5, 0.5)); }},
      {"sum", [&] { return ops::sum(ops::mul(a, b)); }},
      {"mean", [&] { return ops::mean(ops::mul(a, b)); }},
      {"sum axis", [&] { return ops::sum(ops::mul(ops::sum(a, 0), row)); }},
      {"mean axis", [&] { return ops::sum(ops::mul(ops::mean(a, 1), ops::sum(b, 1))); }},
      {"softmax", [&] { return probe(ops::softmax(a, 1)); }},
      {"softmax axis 0", [&] { return probe(ops::softmax(a, 0)); }},
      {"layer_norm", [&] { return probe(ops::layer_norm(a, row, ops::scale(row, 0.5))); }},
      {"concat", [&] { return ops::sum(ops::mul(ops::concat({a, b}, 1), ops::concat({w, w}, 1))); }},
      {"slice", [&] { return ops::sum(ops::mul(ops::slice(a, 1, 1, 3), ops::slice(b, 1, 0, 2))); }},
      {"reshape", [&] { return ops::sum(ops::mul(ops::reshape(a, {4, 3}), ops::reshape(w, {4, 3}))); }},
      {"permute", [&] {
         return ops::sum(ops::mul(ops::permute(ops::reshape(a, {3, 2, 2}), {2, 0, 1}),
                                  ops::reshape(w, {2, 3, 2})));
       }},
      {"transpose", [&] { return ops::sum(ops::mul(ops::transpose(a), ops::transpose(w))); }},
      {"soft dice", [&] { return soft_dice_loss(prob, targets); }},
      {"bce", [&] { return bce_loss(prob, targets); }},
      {"total loss", [&] { return total_loss(prob, targets); }},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, f] : cases) {
    const auto r = oracle::check_gradients(f, {a, b, m, row, bias, pos, prob});
    if (r.rel_error >= worst) {
      worst = r.rel_error;
      worst_name = name;
    }
  }

  // Composed model at N=16, M=4, d=8, L=2, P=5, C=4.
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.latents = 4;
  cfg.width = 8;
  cfg.ff_width = 8;
  cfg.heads = 2;
  cfg.classes = 4;
  cfg.encoding.num_frequencies = 2;
  ModelParameters params = ModelParameters::initialize(cfg, 7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& [name, t] : params.named())
    for (double& v : t.mutable_data()) v += 0.2 * u(rng);
  KSpaceSampleSet s;
  s.frames = 2;
  s.height = 8;
  s.width = 8;
  for (int i = 0; i < 16; ++i) {
    s.coords.push_back({u(rng), u(rng), u(rng)});
    s.values.emplace_back(u(rng), u(rng));
  }
  std::vector<std::array<double, 3>> q(5);
  for (auto& c : q) c = {u(rng), u(rng), u(rng)};
  const Tensor model_targets = one_hot(std::vector<std::uint8_t>{0, 1, 2, 3, 1}, 4);
  std::vector<Tensor> leaves;
  for (const auto& [name, t] : params.named()) leaves.push_back(t);
  const auto full = oracle::check_gradients(
      [&] { return total_loss(forward(s, q, params, cfg), model_targets); }, leaves);
  const double secs = seconds_since(t0);

  Verdict v;
  v.pass = worst <= 1e-4 && full.rel_error <= 1e-4 && full.entries == parameter_count(cfg) &&
           secs < 60.0;
  v.detail = std::to_string(cases.size()) + " primitives worst rel " + fmt("%.2e", worst) + " (" +
             worst_name + "), full model " + std::to_string(full.entries) + " params rel " +
             fmt("%.2e", full.rel_error) + ", " + fmt("%.1f", secs) + " s (<= 1e-4, < 60 s)";
  return v;
}

// ---------------------------------------------------------------- A2

KSpaceSampleSet random_samples(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KSpaceSampleSet s;
  s.frames = 10;
  s.height = 64;
  s.width = 64;
  for (std::size_t i = 0; i < n; ++i) {
    s.coords.push_back({u(rng), u(rng), u(rng)});
    s.values.emplace_back(u(rng), u(rng));
  }
  return s;
}

double max_abs_diff(const Tensor& x, const Tensor& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x.data()[i] - y.data()[i]));
  return d;
}

Verdict a2_invariants() {
  std::mt19937_64 rng(202);
  const ModelConfig cfg;  // L=4, d=128, M=128
  const ModelParameters params = ModelParameters::initialize(cfg, 5);
  NoGradGuard guard;

  const KSpaceSampleSet s = random_samples(200, rng);
  const Tensor h = encode(s, params, cfg);
  double perm_gap = 0.0;
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int k = 0; k < 50; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    KSpaceSampleSet p = s;
    for (std::size_t i = 0; i < order.size(); ++i) {
      p.coords[i] = s.coords[order[i]];
      p.values[i] = s.values[order[i]];
    }
    perm_gap = std::max(perm_gap, max_abs_diff(h, encode(p, params, cfg)));
  }

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> q(64);
  for (auto& c : q) c = {u(rng), u(rng), u(rng)};
  const Tensor probs = decode(h, q, params, cfg);
  double query_gap = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::array<double, 3> one[] = {q[i]};
    const Tensor r = decode(h, one, params, cfg);
    for (std::size_t c = 0; c < cfg.classes; ++c)
      query_gap = std::max(query_gap, std::abs(r.at({0, c}) - probs.at({i, c})));
  }

  bool sizes_ok = true;
  double norm_gap = 0.0;
  for (std::size_t n : {1, 17, 1000}) {
    const Tensor hn = encode(random_samples(n, rng), params, cfg);
    sizes_ok = sizes_ok && hn.shape() == Shape{cfg.latents, cfg.width};
    const Tensor pn = decode(hn, q, params, cfg);
    sizes_ok = sizes_ok && pn.shape() == Shape{q.size(), cfg.classes};
    for (std::size_t i = 0; i < q.size(); ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cfg.classes; ++c) sum += pn.at({i, c});
      norm_gap = std::max(norm_gap, std::abs(sum - 1.0));
    }
  }
  const Tensor logits = oracle::random_tensor({50, 7}, rng, false, -30.0, 30.0);
  const Tensor sm = ops::softmax(logits, 1);
  for (std::size_t i = 0; i < 50; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 7; ++c) sum += sm.at({i, c});
    norm_gap = std::max(norm_gap, std::abs(sum - 1.0));
  }

  Verdict v;
  v.pass = perm_gap <= 1e-8 && query_gap <= 1e-10 && sizes_ok && norm_gap <= 1e-9;
  v.detail = "permutation " + fmt("%.2e", perm_gap) + " (<= 1e-8, 50 perms), query independence " +
             fmt("%.2e", query_gap) + " (<= 1e-10), N in {1,17,1000} " + (sizes_ok ? "ok" : "FAILED") +
             ", softmax rows " + fmt("%.2e", norm_gap) + " (<= 1e-9)";
  return v;
}

// ---------------------------------------------------------------- A5

double symmetry_gap(const ComplexImage& k, std::size_t t) {
  double gap = 0.0;
  for (std::size_t u = 0; u < k.height; ++u) {
    for (std::size_t v = 0; v < k.width; ++v) {
      const auto a = k.at(t, u, v);
      const auto b = k.at(t, (k.height - u) % k.height, (k.width - v) % k.width);
      gap = std::max(gap, std::abs(b - std::conj(a)));
    }
  }
  return gap;
}

double peak(const ComplexImage& k) {
  double p = 0.0;
  for (const auto& v : k.values) p = std::max(p, std::abs(v));
  return p;
}

Verdict a5_signal() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double dft_gap = 0.0, parseval = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ComplexImage img(1, 8, 8);
    for (auto& v : img.values) v = {u(rng), u(rng)};
    const ComplexImage k = dft2(img);
    const auto ref = oracle::naive_dft2(img.values, 8, 8);
    double e_img = 0.0, e_k = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      dft_gap = std::max(dft_gap, std::abs(k.values[i] - ref[i]));
      e_img += std::norm(img.values[i]);
      e_k += std::norm(k.values[i]);
    }
    parseval = std::max(parseval, std::abs(e_k / 64.0 - e_img) / e_img);
  }

  // Symmetry gaps relative to the k-space peak of a phantom frame.
  PhantomConfig pc;
  pc.frames = 2;
  pc.height = 64;
  pc.width = 64;
  const PhantomScan scan = generate_phantom(9, pc);
  const ComplexImage plain = dft2(to_complex(scan.image));
  const ComplexImage warped = dft2(apply_b0_phase(scan.image, B0Config{}, 77));
  double plain_gap = 0.0, warped_gap = 1e300;
  for (std::size_t t = 0; t < 2; ++t) {
    plain_gap = std::max(plain_gap, symmetry_gap(plain, t) / peak(plain));
    warped_gap = std::min(warped_gap, symmetry_gap(warped, t) / peak(warped));
  }

  const std::map<double, std::size_t> expected = {{4, 20}, {8, 10}, {16, 5}, {32, 3}, {64, 1}};
  bool lines_ok = true;
  for (const auto& [r, n] : expected) {
    lines_ok = lines_ok && lines_per_frame(80, r) == n;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const UndersamplingMask mask = generate_mask(4, 80, r, seed);
      for (std::size_t t = 0; t < 4; ++t)
        lines_ok = lines_ok && mask.lines_in_frame(t) == n && mask.sampled(t, 40);
    }
  }

  Verdict v;
  v.pass = dft_gap <= 1e-10 && parseval <= 1e-8 && warped_gap > 1e-3 && plain_gap <= 1e-10 && lines_ok;
  v.detail = "dft2 vs naive " + fmt("%.2e", dft_gap) + " (<= 1e-10), Parseval " + fmt("%.2e", parseval) +
             " (<= 1e-8), symmetry gap with B0 " + fmt("%.2e", warped_gap) + " (> 1e-3) without " +
             fmt("%.2e", plain_gap) + " (<= 1e-10), lines at H=80 20/10/5/3/1 " +
             (lines_ok ? "exact" : "WRONG");
  return v;
}

// ---------------------------------------------------------------- A6

Verdict a6_metrics() {
  std::mt19937_64 rng(606);
  double hd_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int h = 6 + static_cast<int>(rng() % 10);
    const int w = 6 + static_cast<int>(rng() % 10);
    std::vector<std::uint8_t> a(h * w), b(h * w);
    for (auto& x : a) x = (rng() % 100) < 30;
    for (auto& x : b) x = (rng() % 100) < 30;
    hd_gap = std::max(hd_gap, std::abs(hausdorff(a, b, h, w, 1) - oracle::brute_force_hausdorff(a, b, h, w, 1)));
  }

  using Labels = std::vector<std::uint8_t>;
  bool dice_ok = true;
  const Labels p = {1, 1, 1, 1, 1, 1, 1, 0, 0, 0};
  const Labels g = {0, 0, 0, 0, 1, 1, 1, 1, 1, 0};
  dice_ok = dice_ok && dice_score(p, g, 1) == 2.0 * 3.0 / 12.0;
  Labels sa(16, 0), sb(16, 0);
  for (int y : {0, 1})
    for (int x : {0, 1}) sa[y * 4 + x] = 1;
  for (int y : {0, 1})
    for (int x : {1, 2}) sb[y * 4 + x] = 1;
  dice_ok = dice_ok && dice_score(sa, sb, 1) == 0.5 && dice_score(sa, sa, 1) == 1.0 &&
            dice_score(sa, Labels(16, 0), 1) == 0.0 && dice_score(sa, sb, 2) == 1.0;
  const Labels three = {1, 2, 3, 3, 2, 1};
  const Labels three_gt = {1, 2, 2, 3, 3, 0};
  dice_ok = dice_ok && dice_score(three, three_gt, 1) == 2.0 / 3.0 &&
            dice_score(three, three_gt, 2) == 0.5 && dice_score(three, three_gt, 3) == 0.5;

  const Tensor uniform = Tensor::full({6, 4}, 0.25);
  const Tensor hot = one_hot(std::vector<std::uint8_t>{0, 1, 2, 3, 1, 2}, 4);
  const double bce = bce_loss(uniform, hot).item();

  Verdict v;
  v.pass = hd_gap <= 1e-12 && dice_ok && std::abs(bce - 0.5623) <= 1e-3;
  v.detail = "Hausdorff vs brute force " + fmt("%.2e", hd_gap) + " (<= 1e-12, 200 pairs), Dice fixtures " +
             (dice_ok ? "exact" : "WRONG") + ", BCE " + fmt("%.6f", bce) + " (0.5623 +- 1e-3)";
  return v;
}

// ---------------------------------------------------------------- A7

std::vector<std::string> log_columns(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

Verdict a7_determinism(const fs::path& work) {
  RunConfig cfg;
  cfg.phantom.frames = 4;
  cfg.phantom.height = 32;
  cfg.phantom.width = 32;
  cfg.model.layers = 1;
  cfg.model.latents = 8;
  cfg.model.width = 16;
  cfg.model.ff_width = 16;
  cfg.model.heads = 2;
  cfg.model.encoding.num_frequencies = 4;
  cfg.train.queries = 128;
  cfg.train.learning_rate = 1e-3;
  cfg.train.steps = 100;
  cfg.train.checkpoint_every = 50;
  cfg.train.seed = 17;
  cfg.eval.accelerations = {8};
  cfg.validate();
  std::vector<PhantomScan> train, val;
  for (std::uint64_t s = 0; s < 4; ++s) train.push_back(generate_phantom(100 + s, cfg.phantom));
  val.push_back(generate_phantom(200, cfg.phantom));

  const fs::path a = work / "A7_a", b = work / "A7_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const FitResult ra = fit(train, val, cfg, a);
  const FitResult rb = fit(train, val, cfg, b);
  const auto la = log_columns(a / "train_log.csv");
  const auto lb = log_columns(b / "train_log.csv");
  bool logs_equal = la == lb && la.size() == ra.log.size() + 1 && ra.log.size() == rb.log.size();
  for (std::size_t i = 0; logs_equal && i < ra.log.size(); ++i) {
    logs_equal = ra.log[i].loss == rb.log[i].loss && ra.log[i].dice_val == rb.log[i].dice_val;
  }

  // Stop at 50, save, load, continue: must match the uninterrupted run bit for bit.
  TrainState mid = init_train_state(cfg.model, cfg.train.seed);
  auto step = [&](TrainState& st) {
    const auto idx = batch_indices(cfg.train.seed, st.step, train.size(), cfg.train.batch_scans);
    std::vector<const PhantomScan*> batch;
    for (auto i : idx) batch.push_back(&train[i]);
    return train_step(st, batch, cfg);
  };
  for (int i = 0; i < 50; ++i) step(mid);
  const fs::path ck = work / "A7_mid.zip";
  save_checkpoint(ck, mid, cfg);
  Checkpoint loaded = load_checkpoint(ck);
  bool resume_equal = loaded.state.params.pack() == mid.params.pack();
  for (int i = 0; i < 50; ++i) resume_equal = resume_equal && step(mid) == step(loaded.state);
  resume_equal = resume_equal && loaded.state.params.pack() == mid.params.pack() &&
                 loaded.state.first_moment == mid.first_moment &&
                 loaded.state.second_moment == mid.second_moment &&
                 mid.params.pack() == ra.state.params.pack();

  Verdict v;
  v.pass = logs_equal && resume_equal;
  v.detail = std::string("100-step logs ") + (logs_equal ? "bitwise identical" : "DIFFER") +
             " (" + std::to_string(la.size()) + " rows), checkpoint round trip " +
             (resume_equal ? "bitwise transparent" : "NOT transparent");
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove(ck);
  return v;
}

// ---------------------------------------------------------------- A3 / A4

struct DeskData {
  std::vector<PhantomScan> train, val, test;
};

DeskData make_desk_data(const RunConfig& cfg) {
  const DatasetSplits splits =
      make_splits(cfg.data.num_train, cfg.data.num_val, cfg.data.num_test, cfg.data.base_seed);
  DeskData d;
  for (const ScanRef& r : splits.train) d.train.push_back(generate_phantom(r.seed, cfg.phantom));
  for (const ScanRef& r : splits.val) d.val.push_back(generate_phantom(r.seed, cfg.phantom));
  for (const ScanRef& r : splits.test) d.test.push_back(generate_phantom(r.seed, cfg.phantom));
  return d;
}

struct DeskRun {
  double train_minutes = 0.0;
  double dice = 0.0;      // test mean of per-scan foreground Dice
  double hd = 0.0;        // test mean of per-scan max foreground Hausdorff
  double hd_worst = 0.0;  // largest per-scan value
  double untrained_dice = 0.0;
};

DeskRun desk_run(const RunConfig& base, double r, const DeskData& data, const fs::path& dir) {
  RunConfig cfg = base;
  cfg.train.acceleration = r;
  cfg.validate();
  fs::remove_all(dir);
  std::cout << "  training R=" << r << " into " << dir.string() << std::endl;
  const auto t0 = Clock::now();
  const FitResult fr = fit(data.train, data.val, cfg, dir, [](const LogRow& row) {
    if (row.has_dice) std::cout << "    step " << row.step << " val dice " << row.dice_val << std::endl;
  });
  DeskRun out;
  out.train_minutes = seconds_since(t0) / 60.0;

  const Checkpoint best = load_checkpoint(fr.best.empty() ? fr.checkpoints.back() : fr.best);
  const auto reports = evaluate_split(data.test, {r}, [&](const PhantomScan& s, double acc) {
    return predict_full(s, acc, best.state.params, cfg, cfg.eval.chunk);
  });
  write_metrics_csv(dir / "test_metrics.csv", reports);
  for (const MetricReport& m : reports) {
    out.dice += m.dice_fg_mean / reports.size();
    out.hd += m.hd_fg_max / reports.size();
    out.hd_worst = std::max(out.hd_worst, m.hd_fg_max);
  }
  const ModelParameters untrained = ModelParameters::initialize(cfg.model, cfg.train.seed);
  out.untrained_dice = mean_foreground_dice(data.test, r, untrained, cfg);
  std::cout << "  R=" << r << ": " << fmt("%.1f", out.train_minutes) << " min, test dice "
            << fmt("%.4f", out.dice) << ", HD " << fmt("%.3f", out.hd) << " (worst scan "
            << fmt("%.3f", out.hd_worst) << "), untrained dice " << fmt("%.4f", out.untrained_dice)
            << std::endl;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"DiSK acceptance criteria"};
  std::string suite = "fast";
  std::string work = (fs::temp_directory_path() / "disk_acceptance").string();
  std::string config = DISK_DESK_CONFIG;
  app.add_option("--suite", suite, "fast, desk or all")->check(CLI::IsMember({"fast", "desk", "all"}));
  app.add_option("--work", work, "Scratch directory for training runs")->capture_default_str();
  app.add_option("--config", config, "Desk-scale run configuration")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  bool all_pass = true;
  auto report = [&](const char* id, const char* what, const Verdict& v) {
    std::cout << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << what << ": " << v.detail << std::endl;
    all_pass = all_pass && v.pass;
  };
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("exception: ") + e.what()};
    }
  };

  if (suite == "fast" || suite == "all") {
    report("A1", "gradient correctness", guarded(a1_gradients));
    report("A2", "architecture invariants", guarded(a2_invariants));
    report("A5", "signal-processing oracles", guarded(a5_signal));
    report("A6", "metric oracles", guarded(a6_metrics));
    report("A7", "determinism and persistence", guarded([&] { return a7_determinism(work); }));
  }

  if (suite == "desk" || suite == "all") {
    std::optional<DeskData> data;
    std::map<double, DeskRun> runs;
    RunConfig cfg;
    const Verdict a3 = guarded([&] {
      cfg = load_run_config(config);
      data = make_desk_data(cfg);
      const DeskRun r8 = desk_run(cfg, 8, *data, fs::path(work) / "R8");
      runs[8] = r8;
      Verdict v;
      v.pass = r8.train_minutes <= 45.0 && r8.dice >= 0.80 && r8.hd <= 8.0;
      v.detail = "test Dice " + fmt("%.4f", r8.dice) + " (>= 0.80), HD " + fmt("%.3f", r8.hd) +
                 " px (<= 8), training " + fmt("%.1f", r8.train_minutes) + " min (<= 45), untrained Dice " +
                 fmt("%.4f", r8.untrained_dice);
      return v;
    });
    report("A3", "desk-scale learning", a3);
    const Verdict a4 = guarded([&] {
      if (!data) throw std::runtime_error("desk data unavailable");
      for (double r : {4.0, 64.0}) runs[r] = desk_run(cfg, r, *data, fs::path(work) / ("R" + fmt("%.0f", r)));
      if (!runs.count(8)) throw std::runtime_error("R=8 run unavailable");
      const double drop = runs[4].dice - runs[64].dice;
      Verdict v;
      v.pass = drop <= 0.10;
      v.detail = "Dice R=4 " + fmt("%.4f", runs[4].dice) + ", R=8 " + fmt("%.4f", runs[8].dice) + ", R=64 " +
                 fmt("%.4f", runs[64].dice) + ", drop " + fmt("%.4f", drop) + " (<= 0.10)";
      return v;
    });
    report("A4", "graceful degradation", a4);
  }
  std::cout << (all_pass ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all_pass ? 0 : 1;
}
