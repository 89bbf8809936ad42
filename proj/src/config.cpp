#include "sinreq/config.hpp"

#include <set>

#include <json.hpp>

#include "sinreq/checkpoint.hpp"
#include "sinreq/errors.hpp"

namespace sinreq {

using nlohmann::json;

namespace {

// Object view that records which keys were consumed, so leftovers can be
// reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& required(const char* key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const char* key) {
    const json& v = required(key);
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    return get<T>(key);
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

QuantizerSpec parse_quant(const json& j, const std::string& where) {
  Fields f(j, where);
  QuantizerSpec q;
  try {
    q.scheme = parse_scheme(f.get<std::string>("scheme"));
    q.bits = f.get<int>("bits");
    validate(q);
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  f.finish();
  return q;
}

LayerSpec parse_layer(const json& j, const std::string& where) {
  Fields f(j, where);
  LayerSpec l;
  l.name = f.get<std::string>("name");
  try {
    l.kind = parse_layer_kind(f.get<std::string>("kind"));
  } catch (const SpecError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (l.kind == LayerKind::Dense || l.kind == LayerKind::Conv2d) {
    l.in = f.get<std::size_t>("in");
    l.out = f.get<std::size_t>("out");
    if (f.has("quant")) {
      const json& q = f.required("quant");
      if (!q.is_null()) l.quant = parse_quant(q, f.path("quant"));
    }
  }
  if (l.kind == LayerKind::Conv2d) {
    l.kernel = f.get<std::size_t>("kernel");
    l.stride = f.get<std::size_t>("stride", 1);
    l.padding = f.get<std::size_t>("padding", 0);
  }
  f.finish();
  return l;
}

ModelSpec parse_model(const json& j) {
  Fields f(j, "model");
  ModelSpec m;
  m.input_shape = f.get<Shape>("input_shape");
  const json& layers = f.required("layers");
  if (!layers.is_array()) throw ConfigError("model.layers must be an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    m.layers.push_back(parse_layer(layers[i], "model.layers[" + std::to_string(i) + "]"));
  }
  f.finish();
  try {
    layer_output_shapes(m);
  } catch (const SpecError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return m;
}

DatasetSpec parse_dataset(const json& j) {
  Fields f(j, "dataset");
  DatasetSpec d;
  try {
    d.kind = parse_dataset_kind(f.get<std::string>("kind"));
  } catch (const SpecError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  d.classes = f.get<std::size_t>("classes", d.classes);
  d.samples_per_class = f.get<std::size_t>("samples_per_class", d.samples_per_class);
  d.noise = f.get<double>("noise", d.noise);
  d.dim = f.get<std::size_t>("dim", d.dim);
  d.center_spread = f.get<double>("center_spread", d.center_spread);
  d.turns = f.get<double>("turns", d.turns);
  d.images = f.get<std::string>("images", d.images);
  d.labels = f.get<std::string>("labels", d.labels);
  d.limit = f.get<std::size_t>("limit", d.limit);
  d.train_fraction = f.get<double>("train_fraction", d.train_fraction);
  d.val_fraction = f.get<double>("val_fraction", d.val_fraction);
  d.seed = f.get<std::uint64_t>("seed", d.seed);
  f.finish();
  try {
    validate(d);
  } catch (const SpecError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  return d;
}

LambdaSchedule parse_schedule(const json& j, const std::string& where) {
  Fields f(j, where);
  LambdaSchedule s;
  const auto kind = f.get<std::string>("kind");
  if (kind == "constant") {
    s = LambdaSchedule::constant(f.get<double>("value"));
  } else if (kind == "exponential") {
    s = LambdaSchedule::exponential(f.get<double>("start"), f.get<double>("end"), f.get<std::int64_t>("horizon", 0));
  } else {
    throw ConfigError(where + ": unknown schedule kind '" + kind + "'");
  }
  f.finish();
  LambdaSchedule probe = s;
  if (probe.horizon <= 0) probe.horizon = 1;
  try {
    validate(probe);
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

json schedule_json(const LambdaSchedule& s) {
  if (s.kind == ScheduleKind::Constant) return {{"kind", "constant"}, {"value", s.start_value}};
  return {{"kind", "exponential"}, {"start", s.start_value}, {"end", s.end_value}, {"horizon", s.horizon}};
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Fields f(root, "config");
  ExperimentConfig cfg;
  cfg.schema_version = f.get<int>("schema_version");
  if (cfg.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(cfg.schema_version) + " is not supported (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  cfg.output_dir = f.get<std::string>("output_dir", cfg.output_dir);
  cfg.model = parse_model(f.required("model"));
  cfg.dataset = parse_dataset(f.required("dataset"));

  Fields t(f.required("train"), "train");
  TrainConfig& tc = cfg.train;
  tc.mode = parse_train_mode(t.get<std::string>("mode"));
  tc.epochs = t.get<int>("epochs", tc.epochs);
  tc.batch_size = t.get<std::size_t>("batch_size", tc.batch_size);
  tc.learning_rate = t.get<double>("learning_rate", tc.learning_rate);
  tc.momentum = t.get<double>("momentum", tc.momentum);
  tc.seed = t.get<std::uint64_t>("seed", tc.seed);
  tc.lambda_wd = t.get<double>("lambda_wd", tc.lambda_wd);
  if (t.has("schedule")) tc.schedule = parse_schedule(t.required("schedule"), "train.schedule");
  if (t.has("layer_schedules")) {
    const json& ls = t.required("layer_schedules");
    if (!ls.is_object()) throw ConfigError("train.layer_schedules must be an object");
    for (const auto& [name, s] : ls.items()) {
      tc.layer_schedules[name] = parse_schedule(s, "train.layer_schedules." + name);
    }
  }
  tc.eval_quantize = t.get<bool>("eval_quantize", tc.eval_quantize);
  tc.trajectories_per_layer = t.get<std::size_t>("trajectories_per_layer", tc.trajectories_per_layer);
  tc.near_level_fraction = t.get<double>("near_level_fraction", tc.near_level_fraction);
  cfg.init_seed = t.get<std::uint64_t>("init_seed", tc.seed);
  cfg.pretrain_epochs = t.get<int>("pretrain_epochs", cfg.pretrain_epochs);
  cfg.init_checkpoint = t.get<std::string>("init_checkpoint", cfg.init_checkpoint);
  t.finish();

  if (f.has("analysis")) {
    Fields a(f.required("analysis"), "analysis");
    cfg.histogram_bins = a.get<std::size_t>("histogram_bins", cfg.histogram_bins);
    cfg.checkpoint_every_epoch = a.get<bool>("checkpoint_every_epoch", cfg.checkpoint_every_epoch);
    a.finish();
  }
  f.finish();

  if (cfg.pretrain_epochs < 0) throw ConfigError("train.pretrain_epochs must be non-negative");
  if (cfg.histogram_bins == 0) throw ConfigError("analysis.histogram_bins must be positive");
  validate(cfg.train, Model(cfg.model));
  if (cfg.train.eval_quantize) {
    for (const LayerSpec& l : cfg.model.layers) {
      if (l.trainable() && !l.quant) {
        throw ConfigError("train.eval_quantize needs a quantizer on layer '" + l.name + "'");
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string dump_config(const ExperimentConfig& cfg) {
  json layers = json::array();
  for (const LayerSpec& l : cfg.model.layers) {
    json jl = {{"name", l.name}, {"kind", std::string(layer_kind_name(l.kind))}};
    if (l.trainable()) {
      jl["in"] = l.in;
      jl["out"] = l.out;
      jl["quant"] = l.quant ? json{{"scheme", std::string(scheme_name(l.quant->scheme))}, {"bits", l.quant->bits}}
                            : json(nullptr);
    }
    if (l.kind == LayerKind::Conv2d) {
      jl["kernel"] = l.kernel;
      jl["stride"] = l.stride;
      jl["padding"] = l.padding;
    }
    layers.push_back(std::move(jl));
  }
  const DatasetSpec& d = cfg.dataset;
  const TrainConfig& t = cfg.train;
  json layer_schedules = json::object();
  for (const auto& [name, s] : t.layer_schedules) layer_schedules[name] = schedule_json(s);
  json root = {
      {"schema_version", cfg.schema_version},
      {"output_dir", cfg.output_dir},
      {"model", {{"input_shape", cfg.model.input_shape}, {"layers", layers}}},
      {"dataset",
       {{"kind", std::string(dataset_kind_name(d.kind))},
        {"classes", d.classes},
        {"samples_per_class", d.samples_per_class},
        {"noise", d.noise},
        {"dim", d.dim},
        {"center_spread", d.center_spread},
        {"turns", d.turns},
        {"images", d.images},
        {"labels", d.labels},
        {"limit", d.limit},
        {"train_fraction", d.train_fraction},
        {"val_fraction", d.val_fraction},
        {"seed", d.seed}}},
      {"train",
       {{"mode", std::string(train_mode_name(t.mode))},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"momentum", t.momentum},
        {"seed", t.seed},
        {"init_seed", cfg.init_seed},
        {"lambda_wd", t.lambda_wd},
        {"schedule", schedule_json(t.schedule)},
        {"layer_schedules", layer_schedules},
        {"eval_quantize", t.eval_quantize},
        {"trajectories_per_layer", t.trajectories_per_layer},
        {"near_level_fraction", t.near_level_fraction},
        {"pretrain_epochs", cfg.pretrain_epochs},
        {"init_checkpoint", cfg.init_checkpoint}}},
      {"analysis", {{"histogram_bins", cfg.histogram_bins}, {"checkpoint_every_epoch", cfg.checkpoint_every_epoch}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace sinreq
