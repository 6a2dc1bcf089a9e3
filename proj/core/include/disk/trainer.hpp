#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "disk/config.hpp"
#include "disk/metrics.hpp"
#include "disk/model.hpp"
#include "disk/phantom.hpp"
#include "disk/rng.hpp"

namespace disk {

struct LossStats {
  std::size_t count = 0;
  double mean = 0.0;
  double last = 0.0;
};

// Optimizer state. Per-step randomness derives from (seed, step), so the
// step counter is the whole RNG state.
struct TrainState {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  ModelParameters params;
  std::vector<std::vector<double>> first_moment;   // one buffer per named parameter
  std::vector<std::vector<double>> second_moment;
  LossStats loss_stats;
};

TrainState init_train_state(const ModelConfig& model, std::uint64_t seed);

struct QuerySample {
  std::vector<std::array<double, 3>> coords;
  std::vector<std::uint8_t> labels;
  Tensor targets;  // one-hot [P, C]
};

// ceil(fg_fraction * P) queries uniform over foreground voxels, the rest
// uniform over the grid (both with replacement). No foreground: all uniform.
QuerySample sample_queries(const PhantomScan& scan, std::size_t count, double fg_fraction,
                           std::size_t classes, Rng& rng);

// Seed of the k-space synthesis (B0 field and mask) for batch element
// `element` at `step`. Fresh every step.
std::uint64_t step_synthesis_seed(std::uint64_t seed, std::uint64_t step, std::size_t element);

// One optimizer step on `batch`. Returns the mean loss over the batch.
// Throws NumericalError (with a dump of the step inputs) on a non-finite loss.
double train_step(TrainState& state, std::span<const PhantomScan* const> batch,
                  const RunConfig& cfg);
double train_step(TrainState& state, const PhantomScan& scan, const RunConfig& cfg);

// Indices of the scans used at `step` (epoch-wise shuffling of the training set).
std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step,
                                       std::size_t num_scans, std::size_t batch);

struct Checkpoint {
  RunConfig config;
  TrainState state;
};

// Zip archive: manifest.json, params/<name>.dskt, optimizer/{m,v}/<name>.dskt.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state,
                     const RunConfig& cfg);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Fixed k-space synthesis seed for evaluating one scan at one acceleration.
std::uint64_t eval_synthesis_seed(std::uint64_t eval_seed, std::uint64_t scan_seed,
                                  double acceleration);

// Samples the scan's k-space at `acceleration`, encodes once and decodes
// every voxel in chunks of `chunk` queries.
SegmentationResult predict_full(const PhantomScan& scan, double acceleration,
                                const ModelParameters& params, const RunConfig& cfg,
                                std::size_t chunk);

MetricReport evaluate_model(const PhantomScan& scan, double acceleration,
                            const ModelParameters& params, const RunConfig& cfg);

double mean_foreground_dice(std::span<const PhantomScan> scans, double acceleration,
                            const ModelParameters& params, const RunConfig& cfg);

struct LogRow {
  std::uint64_t step = 0;
  bool has_loss = false;
  double loss = 0.0;
  bool has_dice = false;
  double dice_val = 0.0;
  double wall_ms = 0.0;
};

std::string log_csv_header();
std::string log_csv_row(const LogRow& row);

struct FitResult {
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path best;  // empty when no evaluation ran
  double best_dice = -1.0;
  std::vector<LogRow> log;
  TrainState state;
};

using ProgressFn = std::function<void(const LogRow&)>;

// Runs cfg.train.steps steps. Writes ckpt_<step>.zip at step 0, every
// checkpoint_every steps and at the end; evaluates the validation split at
// each of those (except step 0) and copies the best to best.zip. The log is
// appended to train_log.csv in out_dir.
FitResult fit(const std::vector<PhantomScan>& train, const std::vector<PhantomScan>& val,
              const RunConfig& cfg, const std::filesystem::path& out_dir,
              const ProgressFn& progress = {});
// Continues from `start` (e.g. a loaded checkpoint) up to cfg.train.steps.
FitResult fit(TrainState start, const std::vector<PhantomScan>& train,
              const std::vector<PhantomScan>& val, const RunConfig& cfg,
              const std::filesystem::path& out_dir, const ProgressFn& progress = {});

}  // namespace disk
