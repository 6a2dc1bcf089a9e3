#include "disk/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "disk/cli/render.hpp"
#include "disk/config.hpp"
#include "disk/dataset.hpp"
#include "disk/error.hpp"
#include "disk/evaluation.hpp"
#include "disk/serialize.hpp"
#include "disk/trainer.hpp"

namespace disk::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

struct Options {
  Common common;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string resume;
  std::string split = "test";
  std::string scan;
  std::vector<double> accelerations;
  std::vector<std::size_t> frames;
  std::size_t scale = 4;
  std::size_t log_every = 100;
  bool force = false;
};

RunConfig resolve(const Common& c, const RunConfig& base) {
  RunConfig cfg = c.config.empty() ? base : load_run_config(c.config);
  return apply_overrides(cfg, c.overrides);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
}

std::string help_footer() {
  std::string s = "\nConfig keys (--override key=value):\n";
  for (const auto& [key, value] : config_keys_with_defaults()) {
    s += "  " + key + " = " + value + "\n";
  }
  s += "\nExit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.\n";
  return s;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Run configuration JSON");
  cmd->add_option("--override", c.overrides, "Dot-path assignment, e.g. train.steps=200")
      ->allow_extra_args(false);
}

int synth_data(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve(o.common, RunConfig{});
  const fs::path dir = o.out;
  if (fs::exists(dir) && !fs::is_empty(dir) && !o.force) {
    throw DataError("output directory " + dir.string() + " is not empty (use --force)");
  }
  fs::create_directories(dir);
  DatasetManifest manifest;
  manifest.phantom = cfg.phantom;
  manifest.base_seed = cfg.data.base_seed;
  manifest.splits =
      make_splits(cfg.data.num_train, cfg.data.num_val, cfg.data.num_test, cfg.data.base_seed);
  std::size_t n = 0;
  for (const auto* split : {&manifest.splits.train, &manifest.splits.val, &manifest.splits.test}) {
    for (const ScanRef& ref : *split) {
      write_scan(dir, generate_phantom(ref.seed, cfg.phantom));
      ++n;
    }
  }
  write_manifest(dir, manifest);
  out << "wrote " << n << " scans to " << dir.string() << '\n';
  return kOk;
}

int train(const Options& o, std::ostream& out) {
  std::optional<Checkpoint> resume;
  if (!o.resume.empty()) resume = load_checkpoint(o.resume);
  const RunConfig cfg = resolve(o.common, resume ? resume->config : RunConfig{});
  const DatasetManifest manifest = read_manifest(o.data);
  const std::vector<PhantomScan> train_scans = load_split(o.data, manifest, "train");
  const std::vector<PhantomScan> val_scans = load_split(o.data, manifest, "val");
  const fs::path dir = o.out;
  fs::create_directories(dir);
  save_run_config(dir / "config.json", cfg);
  out << "training on " << train_scans.size() << " scans, " << parameter_count(cfg.model)
      << " parameters, R=" << cfg.train.acceleration << ", " << cfg.train.steps << " steps\n";
  const std::size_t every = std::max<std::size_t>(o.log_every, 1);
  auto progress = [&](const LogRow& row) {
    if (row.has_dice) {
      out << "step " << row.step << "  val dice " << row.dice_val << '\n' << std::flush;
    } else if (row.step % every == 0) {
      out << "step " << row.step << "  loss " << row.loss << "  (" << row.wall_ms << " ms)\n"
          << std::flush;
    }
  };
  const FitResult result =
      resume ? fit(std::move(resume->state), train_scans, val_scans, cfg, dir, progress)
             : fit(train_scans, val_scans, cfg, dir, progress);
  out << "wrote " << result.checkpoints.size() << " checkpoints";
  if (!result.best.empty()) out << ", best val dice " << result.best_dice;
  out << '\n';
  return kOk;
}

Predictor model_predictor(const ModelParameters& params, const RunConfig& cfg) {
  return [&params, &cfg](const PhantomScan& scan, double r) {
    return predict_full(scan, r, params, cfg, cfg.eval.chunk);
  };
}

int eval(const Options& o, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve(o.common, ck.config);
  const std::vector<double> rs = o.accelerations.empty() ? cfg.eval.accelerations : o.accelerations;
  evaluate_to_dir(o.data, o.split, rs, model_predictor(ck.state.params, cfg), o.out, out);
  return kOk;
}

PhantomScan find_scan(const fs::path& data, const std::string& scan_id) {
  const DatasetManifest manifest = read_manifest(data);
  for (const auto* split : {&manifest.splits.train, &manifest.splits.val, &manifest.splits.test}) {
    for (const ScanRef& ref : *split) {
      if (ref.scan_id == scan_id) return read_scan(data, scan_id);
    }
  }
  throw DataError("scan " + scan_id + " is not listed in " + (data / "manifest.json").string());
}

double single_acceleration(const Options& o, const RunConfig& cfg) {
  if (o.accelerations.size() > 1) throw ConfigError("expected a single --acc value");
  return o.accelerations.empty() ? cfg.train.acceleration : o.accelerations.front();
}

int predict(const Options& o, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve(o.common, ck.config);
  const PhantomScan scan = find_scan(o.data, o.scan);
  const double r = single_acceleration(o, cfg);
  const SegmentationResult result = predict_full(scan, r, ck.state.params, cfg, cfg.eval.chunk);
  const LabelVolume& labels = result.labels;
  std::vector<double> label_values(labels.values.begin(), labels.values.end());
  const Tensor label_tensor = Tensor::from({labels.frames, labels.height, labels.width}, label_values);
  const Tensor probs =
      Tensor::from({labels.frames, labels.height, labels.width, result.classes}, result.probabilities);
  fs::path path = o.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_tensors(path, {label_tensor, probs});
  out << metrics_csv_header() << '\n'
      << metrics_csv_row(evaluate_scan(result, scan.labels, r)) << '\n';
  return kOk;
}

int render(const Options& o, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve(o.common, ck.config);
  const PhantomScan scan = find_scan(o.data, o.scan);
  const double r = single_acceleration(o, cfg);
  const KSpaceSampleSet samples = synthesize_samples(
      scan.image, r, eval_synthesis_seed(cfg.eval.seed, scan.seed, r), cfg.data.synth);
  const SegmentationResult result = predict_full(scan, r, ck.state.params, cfg, cfg.eval.chunk);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  const std::vector<std::size_t> frames = o.frames.empty() ? std::vector<std::size_t>{0} : o.frames;
  for (std::size_t t : frames) {
    for (const fs::path& p : render_frame(dir, scan, result.labels, samples, t, o.scale)) {
      out << p.string() << '\n';
    }
  }
  return kOk;
}

}  // namespace

std::vector<MetricReport> evaluate_to_dir(const fs::path& data, const std::string& split,
                                          const std::vector<double>& accelerations,
                                          const Predictor& predict, const fs::path& out_dir,
                                          std::ostream& out) {
  const DatasetManifest manifest = read_manifest(data);
  const std::vector<PhantomScan> scans = load_split(data, manifest, split);
  for (double r : accelerations) {
    if (!(r >= 1.0 && r <= static_cast<double>(manifest.phantom.height))) {
      throw ConfigError("acceleration " + std::to_string(r) + " out of range");
    }
  }
  const std::vector<MetricReport> reports = evaluate_split(scans, accelerations, predict);
  fs::create_directories(out_dir);
  write_metrics_csv(out_dir / "metrics.csv", reports);
  const nlohmann::json summary = summarize(reports, split);
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  for (const std::string& line : summary_lines(summary)) out << line << '\n';
  return reports;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DiSK: cardiac segmentation from undersampled k-space", "disk"};
  app.require_subcommand(1);
  app.footer(help_footer());
  Options o;

  auto* synth = app.add_subcommand("synth-data", "Generate the phantom dataset");
  add_common(synth, o.common);
  synth->add_option("--out", o.out, "Dataset directory")->required();
  synth->add_flag("--force", o.force, "Write into a non-empty directory");

  auto* tr = app.add_subcommand("train", "Train a model");
  add_common(tr, o.common);
  tr->add_option("--data", o.data, "Dataset directory")->required();
  tr->add_option("--out", o.out, "Run directory")->required();
  tr->add_option("--resume", o.resume, "Continue from a checkpoint");
  tr->add_option("--log-every", o.log_every, "Print every n-th step")->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  add_common(ev, o.common);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint zip")->required();
  ev->add_option("--data", o.data, "Dataset directory")->required();
  ev->add_option("--split", o.split, "train, val or test")->capture_default_str();
  ev->add_option("--acc", o.accelerations, "Acceleration factors (default: eval.accelerations)");
  ev->add_option("--out", o.out, "Output directory for metrics.csv and summary.json")->required();

  auto* pr = app.add_subcommand("predict", "Segment one scan");
  add_common(pr, o.common);
  pr->add_option("--checkpoint", o.checkpoint, "Checkpoint zip")->required();
  pr->add_option("--data", o.data, "Dataset directory")->required();
  pr->add_option("--scan", o.scan, "Scan id")->required();
  pr->add_option("--acc", o.accelerations, "Acceleration factor (default: train.acceleration)");
  pr->add_option("--out", o.out, "Output .dskt (labels, then probabilities)")->required();

  auto* rd = app.add_subcommand("render", "Write overlay, k-space and zero-filled images");
  add_common(rd, o.common);
  rd->add_option("--checkpoint", o.checkpoint, "Checkpoint zip")->required();
  rd->add_option("--data", o.data, "Dataset directory")->required();
  rd->add_option("--scan", o.scan, "Scan id")->required();
  rd->add_option("--acc", o.accelerations, "Acceleration factor (default: train.acceleration)");
  rd->add_option("--frame", o.frames, "Frames to render (default: 0)");
  rd->add_option("--scale", o.scale, "Integer upscaling factor")->capture_default_str();
  rd->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (synth->parsed()) return synth_data(o, out);
    if (tr->parsed()) return train(o, out);
    if (ev->parsed()) return eval(o, out);
    if (pr->parsed()) return predict(o, out);
    if (rd->parsed()) return render(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace disk::cli
