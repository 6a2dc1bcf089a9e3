#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "disk/kspace.hpp"
#include "disk/losses.hpp"
#include "disk/model.hpp"
#include "disk/phantom.hpp"

namespace disk {

struct DataConfig {
  std::size_t num_train = 60;
  std::size_t num_val = 20;
  std::size_t num_test = 20;
  std::uint64_t base_seed = 1;
  SynthConfig synth;
};

struct TrainConfig {
  double acceleration = 8.0;
  std::size_t steps = 5000;
  double learning_rate = 1e-4;
  std::size_t batch_scans = 1;
  std::size_t queries = 2048;
  double fg_fraction = 0.5;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t val_scans = 0;  // 0: the whole validation split
  LossConfig loss;
};

inline constexpr double kAccelerations[] = {4, 8, 16, 32, 64};

struct EvalConfig {
  std::vector<double> accelerations{4, 8, 16, 32, 64};
  std::size_t chunk = 8192;  // queries per decode call
  std::uint64_t seed = 12345;
};

// Everything an experiment depends on. JSON sections:
// phantom, data, model, encoding, train, eval.
struct RunConfig {
  PhantomConfig phantom;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Strict: unknown or mistyped keys throw ConfigError. Missing keys keep defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

// "section.key=value"; value parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& j, const std::string& assignment);
RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& assignments);

// Every leaf key of the default config with its default value, dot-separated.
std::vector<std::pair<std::string, std::string>> config_keys_with_defaults();

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace disk
