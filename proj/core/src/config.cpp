#include "disk/config.hpp"

#include <fstream>

#include "disk/error.hpp"

namespace disk {

using nlohmann::json;

namespace {

bool compatible(const json& given, const json& expected) {
  if (expected.is_number()) return given.is_number();
  return given.type() == expected.type();
}

// Every key of `given` must exist in `schema` with a compatible type.
void check_keys(const json& given, const json& schema, const std::string& path) {
  if (!given.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    const json& expected = schema.at(key);
    if (expected.is_object()) {
      check_keys(value, expected, where);
    } else if (!compatible(value, expected)) {
      throw ConfigError("config key '" + where + "' expects " + expected.type_name() + ", got " +
                        value.type_name());
    }
  }
}

void flatten_into(const json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_into(value, name, out);
    } else {
      out.emplace_back(name, value.dump());
    }
  }
}

json encoding_to_json(const EncodingConfig& e) {
  return {{"num_frequencies", e.num_frequencies}, {"include_raw", e.include_raw}};
}

EncodingConfig encoding_from_json(const json& j) {
  EncodingConfig e;
  e.num_frequencies = j.at("num_frequencies").get<std::size_t>();
  e.include_raw = j.at("include_raw").get<bool>();
  return e;
}

json model_fields(const ModelConfig& m) {
  return {{"layers", m.layers},   {"latents", m.latents}, {"width", m.width},
          {"ff_width", m.ff_width}, {"heads", m.heads},   {"classes", m.classes},
          {"latent_init_std", m.latent_init_std}};
}

void read_model_fields(const json& j, ModelConfig& m) {
  m.layers = j.at("layers").get<std::size_t>();
  m.latents = j.at("latents").get<std::size_t>();
  m.width = j.at("width").get<std::size_t>();
  m.ff_width = j.at("ff_width").get<std::size_t>();
  m.heads = j.at("heads").get<std::size_t>();
  m.classes = j.at("classes").get<std::size_t>();
  m.latent_init_std = j.at("latent_init_std").get<double>();
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (phantom.frames < 2 || phantom.height < 32 || phantom.width < 32) {
    throw ConfigError("phantom needs T >= 2 and H, W >= 32");
  }
  if (data.num_train == 0 || data.num_val == 0 || data.num_test == 0) {
    throw ConfigError("every split needs at least one scan");
  }
  if (!(train.acceleration >= 4.0 && train.acceleration <= 64.0 &&
        train.acceleration <= static_cast<double>(phantom.height))) {
    throw ConfigError("train.acceleration must lie in [4, 64] and not exceed phantom.H");
  }
  if (!(train.learning_rate >= 0.0)) throw ConfigError("train.learning_rate must be >= 0");
  if (train.batch_scans == 0 || train.queries == 0 || train.checkpoint_every == 0) {
    throw ConfigError("train.batch_scans, train.queries and train.checkpoint_every must be positive");
  }
  if (!(train.fg_fraction >= 0.0 && train.fg_fraction <= 1.0)) {
    throw ConfigError("train.fg_fraction must lie in [0, 1]");
  }
  if (!(train.beta1 >= 0.0 && train.beta1 < 1.0 && train.beta2 >= 0.0 && train.beta2 < 1.0 &&
        train.adam_eps > 0.0)) {
    throw ConfigError("invalid optimizer moment coefficients");
  }
  if (eval.chunk == 0) throw ConfigError("eval.chunk must be positive");
  for (double r : eval.accelerations) {
    if (!(r >= 1.0 && r <= static_cast<double>(phantom.height))) {
      throw ConfigError("eval acceleration " + std::to_string(r) + " out of range");
    }
  }
}

json model_config_to_json(const ModelConfig& cfg) {
  json j = model_fields(cfg);
  j["encoding"] = encoding_to_json(cfg.encoding);
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  try {
    read_model_fields(j, m);
    m.encoding = encoding_from_json(j.at("encoding"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  m.validate();
  return m;
}

json to_json(const RunConfig& c) {
  const auto& s = c.data.synth;
  const auto& t = c.train;
  return {
      {"phantom",
       {{"T", c.phantom.frames},
        {"H", c.phantom.height},
        {"W", c.phantom.width},
        {"noise_sigma", c.phantom.noise_sigma}}},
      {"data",
       {{"num_train", c.data.num_train},
        {"num_val", c.data.num_val},
        {"num_test", c.data.num_test},
        {"base_seed", c.data.base_seed},
        {"apply_b0", s.apply_b0},
        {"b0",
         {{"bumps", s.b0.bumps},
          {"min_width", s.b0.min_width},
          {"max_width", s.b0.max_width},
          {"amplitude_sigma", s.b0.amplitude_sigma}}},
        {"mask", {{"sigma_fraction", s.mask.sigma_fraction}}}}},
      {"model", model_fields(c.model)},
      {"encoding", encoding_to_json(c.model.encoding)},
      {"train",
       {{"acceleration", t.acceleration},
        {"steps", t.steps},
        {"learning_rate", t.learning_rate},
        {"batch_scans", t.batch_scans},
        {"queries", t.queries},
        {"fg_fraction", t.fg_fraction},
        {"seed", t.seed},
        {"checkpoint_every", t.checkpoint_every},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"adam_eps", t.adam_eps},
        {"val_scans", t.val_scans},
        {"loss",
         {{"dice_weight", t.loss.dice_weight},
          {"bce_weight", t.loss.bce_weight},
          {"dice_eps", t.loss.dice_eps},
          {"log_clamp", t.loss.log_clamp}}}}},
      {"eval",
       {{"accelerations", c.eval.accelerations},
        {"chunk", c.eval.chunk},
        {"seed", c.eval.seed}}},
  };
}

RunConfig run_config_from_json(const json& given) {
  json merged = to_json(RunConfig{});
  check_keys(given, merged, "");
  merged.merge_patch(given);
  RunConfig c;
  try {
    const json& p = merged.at("phantom");
    c.phantom.frames = p.at("T").get<std::size_t>();
    c.phantom.height = p.at("H").get<std::size_t>();
    c.phantom.width = p.at("W").get<std::size_t>();
    c.phantom.noise_sigma = p.at("noise_sigma").get<double>();

    const json& d = merged.at("data");
    c.data.num_train = d.at("num_train").get<std::size_t>();
    c.data.num_val = d.at("num_val").get<std::size_t>();
    c.data.num_test = d.at("num_test").get<std::size_t>();
    c.data.base_seed = d.at("base_seed").get<std::uint64_t>();
    c.data.synth.apply_b0 = d.at("apply_b0").get<bool>();
    c.data.synth.b0.bumps = d.at("b0").at("bumps").get<int>();
    c.data.synth.b0.min_width = d.at("b0").at("min_width").get<double>();
    c.data.synth.b0.max_width = d.at("b0").at("max_width").get<double>();
    c.data.synth.b0.amplitude_sigma = d.at("b0").at("amplitude_sigma").get<double>();
    c.data.synth.mask.sigma_fraction = d.at("mask").at("sigma_fraction").get<double>();

    read_model_fields(merged.at("model"), c.model);
    c.model.encoding = encoding_from_json(merged.at("encoding"));

    const json& t = merged.at("train");
    c.train.acceleration = t.at("acceleration").get<double>();
    c.train.steps = t.at("steps").get<std::size_t>();
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.batch_scans = t.at("batch_scans").get<std::size_t>();
    c.train.queries = t.at("queries").get<std::size_t>();
    c.train.fg_fraction = t.at("fg_fraction").get<double>();
    c.train.seed = t.at("seed").get<std::uint64_t>();
    c.train.checkpoint_every = t.at("checkpoint_every").get<std::size_t>();
    c.train.beta1 = t.at("beta1").get<double>();
    c.train.beta2 = t.at("beta2").get<double>();
    c.train.adam_eps = t.at("adam_eps").get<double>();
    c.train.val_scans = t.at("val_scans").get<std::size_t>();
    c.train.loss.dice_weight = t.at("loss").at("dice_weight").get<double>();
    c.train.loss.bce_weight = t.at("loss").at("bce_weight").get<double>();
    c.train.loss.dice_eps = t.at("loss").at("dice_eps").get<double>();
    c.train.loss.log_clamp = t.at("loss").at("log_clamp").get<double>();

    const json& e = merged.at("eval");
    c.eval.accelerations = e.at("accelerations").get<std::vector<double>>();
    c.eval.chunk = e.at("chunk").get<std::size_t>();
    c.eval.seed = e.at("seed").get<std::uint64_t>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("invalid config value: ") + ex.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << to_json(cfg).dump(2) << '\n';
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const json::json_pointer ptr(pointer);
  if (!j.contains(ptr) || j.at(ptr).is_object()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!compatible(value, j.at(ptr))) {
    throw ConfigError("override '" + key + "' expects " + std::string(j.at(ptr).type_name()));
  }
  j[ptr] = std::move(value);
}

RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& assignments) {
  json j = to_json(cfg);
  for (const auto& a : assignments) apply_override(j, a);
  return run_config_from_json(j);
}

std::vector<std::pair<std::string, std::string>> config_keys_with_defaults() {
  std::vector<std::pair<std::string, std::string>> out;
  flatten_into(to_json(RunConfig{}), "", out);
  return out;
}

}  // namespace disk
