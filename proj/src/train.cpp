#include "sinreq/train.hpp"

#include <cmath>
#include <numeric>

#include "sinreq/errors.hpp"
#include "sinreq/random.hpp"

namespace sinreq {

std::string_view train_mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::FP_SinReQ: return "fp_sinreq";
    case TrainMode::STE_Quantized: return "ste_quantized";
    case TrainMode::STE_Quantized_SinReQ: return "ste_quantized_sinreq";
    case TrainMode::FP_Baseline: return "fp_baseline";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  for (TrainMode m : {TrainMode::FP_SinReQ, TrainMode::STE_Quantized, TrainMode::STE_Quantized_SinReQ,
                      TrainMode::FP_Baseline}) {
    if (train_mode_name(m) == name) return m;
  }
  throw ConfigError("unknown training mode '" + std::string(name) + "'");
}

bool uses_sinreq(TrainMode m) { return m == TrainMode::FP_SinReQ || m == TrainMode::STE_Quantized_SinReQ; }
bool uses_ste(TrainMode m) { return m == TrainMode::STE_Quantized || m == TrainMode::STE_Quantized_SinReQ; }

TrainMode without_sinreq(TrainMode m) {
  switch (m) {
    case TrainMode::FP_SinReQ: return TrainMode::FP_Baseline;
    case TrainMode::STE_Quantized_SinReQ: return TrainMode::STE_Quantized;
    default: return m;
  }
}

namespace {

ForwardMode forward_mode(TrainMode m) { return uses_ste(m) ? ForwardMode::QuantizedSTE : ForwardMode::FullPrecision; }

const LambdaSchedule& schedule_for(const TrainConfig& cfg, const std::string& layer) {
  auto it = cfg.layer_schedules.find(layer);
  return it == cfg.layer_schedules.end() ? cfg.schedule : it->second;
}

TrainConfig with_resolved_horizons(TrainConfig cfg, std::int64_t total_steps) {
  const std::int64_t horizon = std::max<std::int64_t>(total_steps, 1);
  if (cfg.schedule.horizon <= 0) cfg.schedule.horizon = horizon;
  for (auto& [_, s] : cfg.layer_schedules) {
    if (s.horizon <= 0) s.horizon = horizon;
  }
  return cfg;
}

}  // namespace

void validate(const TrainConfig& cfg, const Model& m) {
  if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(cfg.lambda_wd >= 0.0) || !std::isfinite(cfg.lambda_wd)) throw ConfigError("lambda_wd must be non-negative");
  if (!(cfg.near_level_fraction > 0.0)) throw ConfigError("near_level_fraction must be positive");
  const auto check_schedule = [](const LambdaSchedule& s) {
    LambdaSchedule probe = s;
    if (probe.horizon <= 0) probe.horizon = 1;
    try {
      validate(probe);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  };
  check_schedule(cfg.schedule);
  for (const auto& [name, s] : cfg.layer_schedules) {
    m.parameters(name);
    check_schedule(s);
  }
  for (const LayerSpec& l : m.spec().layers) {
    if (!l.trainable() || l.quant) continue;
    if (uses_ste(cfg.mode)) {
      throw ConfigError("mode " + std::string(train_mode_name(cfg.mode)) + " needs a quantizer on layer '" + l.name + "'");
    }
  }
}

OptimizerState make_optimizer_state(const Model& m) {
  OptimizerState s;
  for (const auto& p : m.parameters()) {
    s.velocity.push_back({p.name, Tensor(p.weights.shape()), Tensor(p.bias.shape())});
  }
  return s;
}

RegularizerConfig regularizer_at(const TrainConfig& cfg, const Model& m, std::int64_t step) {
  RegularizerConfig rc;
  rc.lambda_wd = cfg.lambda_wd;
  for (const LayerSpec& l : m.spec().layers) {
    if (!l.trainable() || !l.quant) continue;
    const double lambda = uses_sinreq(cfg.mode) ? lambda_at(schedule_for(cfg, l.name), step) : 0.0;
    rc.per_layer[l.name] = {lambda, level_geometry(*l.quant)};
  }
  return rc;
}

StepMetrics train_step(Model& m, const Dataset& batch, const TrainConfig& cfg, OptimizerState& opt,
                       std::int64_t step) {
  StepMetrics out;
  std::vector<LayerGradients> grads;
  try {
    ForwardPass pass = forward(m, batch.features, forward_mode(cfg.mode));
    Graph& g = pass.graph;
    const NodeId task = g.softmax_cross_entropy(pass.logits, batch.labels);
    std::vector<LayerWeights> layers;
    for (const LayerBinding& b : pass.layers) {
      layers.push_back({b.name, b.shadow, m.layer(b.name).quant.has_value()});
    }
    const RegularizerConfig rc = regularizer_at(cfg, m, step);
    const TotalLoss loss = total_loss(g, task, layers, rc);
    out.task_loss = g.value(task).item();
    out.weight_decay = g.value(loss.weight_decay).item();
    out.total_loss = g.value(loss.total).item();
    for (const auto& [name, id] : loss.sinreq) {
      out.sinreq.emplace_back(name, g.value(id).item());
      out.lambda_q.emplace_back(name, rc.per_layer.at(name).lambda_q);
    }
    g.backward(loss.total);
    grads = parameter_gradients(pass);
  } catch (const NumericError& e) {
    throw DivergenceError(step, e.what());
  }

  const double lr = cfg.learning_rate;
  const double mu = cfg.momentum;
  auto& params = m.parameters();
  for (std::size_t l = 0; l < params.size(); ++l) {
    auto update = [&](Tensor& w, Tensor& v, const std::vector<double>& gr) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = mu * v[i] - lr * gr[i];
        w[i] += v[i];
      }
    };
    update(params[l].weights, opt.velocity[l].weights, grads[l].weights);
    update(params[l].bias, opt.velocity[l].bias, grads[l].bias);
    if (!params[l].weights.all_finite() || !params[l].bias.all_finite()) {
      throw DivergenceError(step, "non-finite parameters in layer '" + params[l].name + "'");
    }
  }
  return out;
}

double accuracy(const Model& m, const Dataset& data, ForwardMode mode) {
  constexpr std::size_t kChunk = 512;
  const std::size_t n = data.size();
  if (n == 0) throw DimensionError("accuracy: empty dataset");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t stop = std::min(n, start + kChunk);
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const Dataset chunk = (start == 0 && stop == n) ? data : data.subset(idx);
    const ForwardPass pass = forward(m, chunk.features, mode);
    const Tensor& logits = pass.graph.value(pass.logits);
    const std::size_t C = logits.dim(1);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < C; ++c) {
        if (logits[i * C + c] > logits[i * C + best]) best = c;
      }
      if (static_cast<int>(best) == chunk.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

QuantizedAccuracy evaluate_quantized(const Model& m, const Dataset& data) {
  for (const LayerSpec& l : m.spec().layers) {
    if (l.trainable() && !l.quant) throw ConfigError("evaluate_quantized: layer '" + l.name + "' has no quantizer");
  }
  QuantizedAccuracy out;
  out.pre_snap = accuracy(m, data, ForwardMode::FullPrecision);
  out.post_snap = accuracy(snapped(m), data, ForwardMode::FullPrecision);
  return out;
}

void fit(Model& m, const Split& data, const TrainConfig& cfg_in, std::vector<RunRecord>& records,
         const EpochObserver& observer) {
  validate(cfg_in, m);
  const std::size_t n = data.train.size();
  if (n == 0) throw ConfigError("fit: empty training set");
  const std::size_t steps_per_epoch = (n + cfg_in.batch_size - 1) / cfg_in.batch_size;
  const TrainConfig cfg =
      with_resolved_horizons(cfg_in, static_cast<std::int64_t>(steps_per_epoch) * cfg_in.epochs);
  if (cfg.epochs == 0) return;

  const ForwardMode eval_mode = forward_mode(cfg.mode);
  OptimizerState opt = make_optimizer_state(m);
  Rng rng(cfg.seed);
  const std::size_t tracked = std::min(cfg.trajectories_per_layer, [&] {
    std::size_t smallest = SIZE_MAX;
    for (const auto& p : m.parameters()) smallest = std::min(smallest, p.weights.size());
    return smallest;
  }());
  const TrajectorySampler sampler(m, tracked, cfg.seed ^ 0xA5A5A5A5A5A5A5A5ull);
  if (observer) observer(0, m, nullptr);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double task_sum = 0.0, total_sum = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const Dataset batch = data.train.subset(std::span(order).subspan(begin, end - begin));
      const StepMetrics sm = train_step(m, batch, cfg, opt, step);
      task_sum += sm.task_loss;
      total_sum += sm.total_loss;
      ++step;
    }

    RunRecord r;
    r.epoch = epoch;
    r.train_acc = accuracy(m, data.train, eval_mode);
    r.val_acc = accuracy(m, data.val, eval_mode);
    r.task_loss = task_sum / static_cast<double>(steps_per_epoch);
    r.total_loss = total_sum / static_cast<double>(steps_per_epoch);
    const RegularizerConfig rc = regularizer_at(cfg, m, step - 1);
    for (const auto& p : m.parameters()) {
      auto it = rc.per_layer.find(p.name);
      if (it == rc.per_layer.end()) continue;
      const LevelGeometry& geo = it->second.geometry;
      Graph g;
      const double s = g.value(sinreq_loss(g, g.leaf(p.weights), geo)).item();
      r.per_layer.emplace_back(p.name, LayerRecord{s, it->second.lambda_q, quant_error(p.weights, geo),
                                                   frac_near_level(p.weights, geo, cfg.near_level_fraction)});
    }
    r.trajectories = sampler.sample(m);
    records.push_back(std::move(r));
    if (observer) observer(epoch, m, &records.back());
  }
}

std::vector<RunRecord> fit(Model& m, const Split& data, const TrainConfig& cfg) {
  std::vector<RunRecord> records;
  fit(m, data, cfg, records);
  return records;
}

}  // namespace sinreq
