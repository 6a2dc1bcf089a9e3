#include "disk/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "disk/archive.hpp"
#include "disk/error.hpp"
#include "disk/losses.hpp"
#include "disk/ops.hpp"
#include "disk/serialize.hpp"

namespace disk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string step_name(std::uint64_t step) {
  std::ostringstream out;
  out << "ckpt_";
  out.width(6);
  out.fill('0');
  out << step << ".zip";
  return out.str();
}

void adam_update(TrainState& state, const TrainConfig& cfg) {
  const double t = static_cast<double>(state.step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto named = state.params.named();
  for (std::size_t i = 0; i < named.size(); ++i) {
    Tensor& p = named[i].second;
    if (!p.has_grad()) continue;
    const std::vector<double> g = p.grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    auto w = p.mutable_data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      w[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(derive_seed(seed, streams::kShuffle), epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

json loss_stats_json(const LossStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"last", s.last}};
}

}  // namespace

TrainState init_train_state(const ModelConfig& model, std::uint64_t seed) {
  TrainState state;
  state.seed = seed;
  state.params = ModelParameters::initialize(model, seed);
  for (const auto& [name, t] : state.params.named()) {
    state.first_moment.emplace_back(t.size(), 0.0);
    state.second_moment.emplace_back(t.size(), 0.0);
  }
  return state;
}

QuerySample sample_queries(const PhantomScan& scan, std::size_t count, double fg_fraction,
                           std::size_t classes, Rng& rng) {
  const LabelVolume& labels = scan.labels;
  if (count == 0 || count > labels.size()) {
    throw ParameterError("query count must lie in [1, T*H*W]");
  }
  std::vector<std::size_t> foreground;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.values[i] != kBackground) foreground.push_back(i);
  }
  std::size_t fg_count = static_cast<std::size_t>(std::ceil(fg_fraction * static_cast<double>(count)));
  fg_count = std::min(fg_count, count);
  if (foreground.empty()) fg_count = 0;

  std::uniform_int_distribution<std::size_t> any(0, labels.size() - 1);
  QuerySample out;
  out.coords.reserve(count);
  out.labels.reserve(count);
  for (std::size_t q = 0; q < count; ++q) {
    std::size_t voxel;
    if (q < fg_count) {
      std::uniform_int_distribution<std::size_t> pick(0, foreground.size() - 1);
      voxel = foreground[pick(rng)];
    } else {
      voxel = any(rng);
    }
    const std::size_t t = voxel / labels.frame_size();
    const std::size_t y = (voxel / labels.width) % labels.height;
    const std::size_t x = voxel % labels.width;
    out.coords.push_back({normalized_coordinate(y, labels.height),
                          normalized_coordinate(x, labels.width),
                          normalized_coordinate(t, labels.frames)});
    out.labels.push_back(labels.values[voxel]);
  }
  out.targets = one_hot(out.labels, classes);
  return out;
}

std::uint64_t step_synthesis_seed(std::uint64_t seed, std::uint64_t step, std::size_t element) {
  return derive_seed(derive_seed(derive_seed(derive_seed(seed, streams::kStep), step), element), 0);
}

double train_step(TrainState& state, std::span<const PhantomScan* const> batch,
                  const RunConfig& cfg) {
  if (batch.empty()) throw ParameterError("train_step needs at least one scan");
  const std::uint64_t step_seed = derive_seed(derive_seed(state.seed, streams::kStep), state.step);
  const double share = 1.0 / static_cast<double>(batch.size());
  state.params.zero_grad();
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PhantomScan& scan = *batch[b];
    const std::uint64_t elem_seed = derive_seed(step_seed, b);
    std::size_t n_samples = 0;
    try {
      const KSpaceSampleSet samples = synthesize_samples(
          scan.image, cfg.train.acceleration, step_synthesis_seed(state.seed, state.step, b),
          cfg.data.synth);
      n_samples = samples.size();
      Rng rng = make_rng(elem_seed, streams::kQueries);
      const QuerySample q =
          sample_queries(scan, cfg.train.queries, cfg.train.fg_fraction, cfg.model.classes, rng);
      const Tensor probs = forward(samples, q.coords, state.params, cfg.model);
      const Tensor loss = total_loss(probs, q.targets, cfg.train.loss);
      backward(ops::scale(loss, share));
      loss_sum += loss.item();
    } catch (const NumericalError& e) {
      Tape::current().clear();
      json dump = {{"error", e.what()},
                   {"step", state.step},
                   {"seed", state.seed},
                   {"scan_id", scan.scan_id},
                   {"scan_seed", scan.seed},
                   {"batch_index", b},
                   {"step_seed", step_seed},
                   {"num_samples", n_samples},
                   {"acceleration", cfg.train.acceleration}};
      throw NumericalError("non-finite value during train step; inputs: " + dump.dump());
    }
  }
  const double loss = loss_sum * share;
  adam_update(state, cfg.train);
  ++state.step;
  auto& s = state.loss_stats;
  ++s.count;
  s.mean += (loss - s.mean) / static_cast<double>(s.count);
  s.last = loss;
  return loss;
}

double train_step(TrainState& state, const PhantomScan& scan, const RunConfig& cfg) {
  const PhantomScan* batch[] = {&scan};
  return train_step(state, batch, cfg);
}

std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step,
                                       std::size_t num_scans, std::size_t batch) {
  if (num_scans == 0) throw ParameterError("no training scans");
  std::vector<std::size_t> out;
  std::uint64_t cached_epoch = ~0ULL;
  std::vector<std::size_t> order;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::uint64_t pos = step * batch + b;
    const std::uint64_t epoch = pos / num_scans;
    if (epoch != cached_epoch) {
      order = epoch_order(seed, epoch, num_scans);
      cached_epoch = epoch;
    }
    out.push_back(order[pos % num_scans]);
  }
  return out;
}

void save_checkpoint(const fs::path& path, const TrainState& state, const RunConfig& cfg) {
  ArchiveWriter zip;
  const json manifest = {{"config", model_config_to_json(cfg.model)},
                         {"run", to_json(cfg)},
                         {"step", state.step},
                         {"rng_seed", state.seed},
                         {"loss_stats", loss_stats_json(state.loss_stats)}};
  zip.add("manifest.json", manifest.dump(2));
  const auto named = state.params.named();
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& [name, t] = named[i];
    zip.add("params/" + name + ".dskt", tensor_to_bytes(t));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& [name, t] = named[i];
    zip.add("optimizer/m/" + name + ".dskt",
            tensor_to_bytes(Tensor::from(t.shape(), state.first_moment[i])));
    zip.add("optimizer/v/" + name + ".dskt",
            tensor_to_bytes(Tensor::from(t.shape(), state.second_moment[i])));
  }
  zip.write(path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  const ArchiveReader zip(path);
  json manifest;
  try {
    manifest = json::parse(zip.member("manifest.json"));
  } catch (const json::exception& e) {
    throw DataError("checkpoint manifest is not valid JSON: " + std::string(e.what()));
  }
  Checkpoint ck;
  try {
    ck.config = run_config_from_json(manifest.at("run"));
    const ModelConfig model = model_config_from_json(manifest.at("config"));
    if (model_config_to_json(model) != model_config_to_json(ck.config.model)) {
      throw DataError("checkpoint model config disagrees with its run config");
    }
    ck.state = init_train_state(model, manifest.at("rng_seed").get<std::uint64_t>());
    ck.state.step = manifest.at("step").get<std::uint64_t>();
    const json& stats = manifest.at("loss_stats");
    ck.state.loss_stats.count = stats.at("count").get<std::size_t>();
    ck.state.loss_stats.mean = stats.at("mean").get<double>();
    ck.state.loss_stats.last = stats.at("last").get<double>();
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  auto named = ck.state.params.named();
  for (std::size_t i = 0; i < named.size(); ++i) {
    auto& [name, t] = named[i];
    auto load = [&](const std::string& member) {
      Tensor loaded = tensor_from_bytes(zip.member(member));
      if (loaded.shape() != t.shape()) {
        throw DataError("checkpoint tensor " + member + " has shape " +
                        shape_str(loaded.shape()) + ", model expects " + shape_str(t.shape()));
      }
      return loaded;
    };
    const Tensor p = load("params/" + name + ".dskt");
    std::copy(p.data().begin(), p.data().end(), t.mutable_data().begin());
    const Tensor m = load("optimizer/m/" + name + ".dskt");
    ck.state.first_moment[i].assign(m.data().begin(), m.data().end());
    const Tensor v = load("optimizer/v/" + name + ".dskt");
    ck.state.second_moment[i].assign(v.data().begin(), v.data().end());
  }
  return ck;
}

std::uint64_t eval_synthesis_seed(std::uint64_t eval_seed, std::uint64_t scan_seed,
                                  double acceleration) {
  const auto r = static_cast<std::uint64_t>(std::llround(acceleration * 1000.0));
  return derive_seed(derive_seed(derive_seed(eval_seed, streams::kEval), scan_seed), r);
}

SegmentationResult predict_full(const PhantomScan& scan, double acceleration,
                                const ModelParameters& params, const RunConfig& cfg,
                                std::size_t chunk) {
  if (chunk == 0) throw ParameterError("predict_full: chunk must be positive");
  const LabelVolume& gt = scan.labels;
  if (gt.size() == 0) throw DataError("scan " + scan.scan_id + " is empty");
  NoGradGuard no_grad;
  const KSpaceSampleSet samples = synthesize_samples(
      scan.image, acceleration, eval_synthesis_seed(cfg.eval.seed, scan.seed, acceleration),
      cfg.data.synth);
  const Tensor latents = encode(samples, params, cfg.model);

  SegmentationResult result;
  result.scan_id = scan.scan_id;
  result.classes = cfg.model.classes;
  result.queries = grid_queries(gt.frames, gt.height, gt.width);
  result.probabilities.reserve(result.queries.size() * result.classes);
  const std::span<const std::array<double, 3>> all(result.queries);
  for (std::size_t begin = 0; begin < all.size(); begin += chunk) {
    const std::size_t len = std::min(chunk, all.size() - begin);
    const Tensor probs = decode(latents, all.subspan(begin, len), params, cfg.model);
    result.probabilities.insert(result.probabilities.end(), probs.data().begin(),
                                probs.data().end());
  }
  result.labels = LabelVolume(gt.frames, gt.height, gt.width);
  result.labels.values = argmax_labels(result.probabilities, result.classes);
  return result;
}

MetricReport evaluate_model(const PhantomScan& scan, double acceleration,
                            const ModelParameters& params, const RunConfig& cfg) {
  const SegmentationResult result = predict_full(scan, acceleration, params, cfg, cfg.eval.chunk);
  return evaluate_scan(result, scan.labels, acceleration);
}

double mean_foreground_dice(std::span<const PhantomScan> scans, double acceleration,
                            const ModelParameters& params, const RunConfig& cfg) {
  if (scans.empty()) throw ParameterError("no scans to evaluate");
  double total = 0.0;
  for (const PhantomScan& scan : scans) {
    total += evaluate_model(scan, acceleration, params, cfg).dice_fg_mean;
  }
  return total / static_cast<double>(scans.size());
}

std::string log_csv_header() { return "step,loss,dice_val,wall_ms"; }

std::string log_csv_row(const LogRow& row) {
  std::ostringstream out;
  out.precision(17);
  out << row.step << ',';
  if (row.has_loss) out << row.loss;
  out << ',';
  if (row.has_dice) out << row.dice_val;
  out.precision(3);
  out << ',' << std::fixed << row.wall_ms;
  return out.str();
}

FitResult fit(const std::vector<PhantomScan>& train, const std::vector<PhantomScan>& val,
              const RunConfig& cfg, const fs::path& out_dir, const ProgressFn& progress) {
  return fit(init_train_state(cfg.model, cfg.train.seed), train, val, cfg, out_dir, progress);
}

FitResult fit(TrainState start, const std::vector<PhantomScan>& train,
              const std::vector<PhantomScan>& val, const RunConfig& cfg, const fs::path& out_dir,
              const ProgressFn& progress) {
  cfg.validate();
  if (train.empty()) throw DataError("training split is empty");
  fs::create_directories(out_dir);
  const fs::path log_path = out_dir / "train_log.csv";
  const bool fresh_log = !fs::exists(log_path) || fs::file_size(log_path) == 0;
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw DataError("cannot open " + log_path.string());
  if (fresh_log) log << log_csv_header() << '\n';

  const std::size_t n_val =
      cfg.train.val_scans == 0 ? val.size() : std::min(cfg.train.val_scans, val.size());
  const std::span<const PhantomScan> val_subset(val.data(), n_val);

  FitResult result;
  result.state = std::move(start);
  TrainState& state = result.state;
  auto emit = [&](const LogRow& row) {
    result.log.push_back(row);
    log << log_csv_row(row) << '\n';
    log.flush();
    if (progress) progress(row);
  };
  auto checkpoint = [&](bool evaluate) {
    const fs::path path = out_dir / step_name(state.step);
    save_checkpoint(path, state, cfg);
    result.checkpoints.push_back(path);
    if (!evaluate || val_subset.empty()) return;
    const auto t0 = std::chrono::steady_clock::now();
    const double dice = mean_foreground_dice(val_subset, cfg.train.acceleration, state.params, cfg);
    emit(LogRow{state.step, false, 0.0, true, dice, elapsed_ms(t0)});
    if (dice > result.best_dice) {
      result.best_dice = dice;
      result.best = out_dir / "best.zip";
      fs::copy_file(path, result.best, fs::copy_options::overwrite_existing);
    }
  };

  if (state.step == 0) checkpoint(false);
  std::vector<const PhantomScan*> batch;
  while (state.step < cfg.train.steps) {
    const auto t0 = std::chrono::steady_clock::now();
    batch.clear();
    for (std::size_t i : batch_indices(state.seed, state.step, train.size(), cfg.train.batch_scans)) {
      batch.push_back(&train[i]);
    }
    const double loss = train_step(state, batch, cfg);
    emit(LogRow{state.step, true, loss, false, 0.0, elapsed_ms(t0)});
    if (state.step % cfg.train.checkpoint_every == 0 || state.step == cfg.train.steps) {
      checkpoint(true);
    }
  }
  return result;
}

}  // namespace disk
