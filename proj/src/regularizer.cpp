#include "sinreq/regularizer.hpp"

#include <cmath>

#include "sinreq/errors.hpp"

namespace sinreq {

void validate(const RegularizerConfig& cfg) {
  if (!(cfg.lambda_wd >= 0.0) || !std::isfinite(cfg.lambda_wd)) {
    throw ParameterError("lambda_wd must be finite and non-negative");
  }
  for (const auto& [name, layer] : cfg.per_layer) {
    if (!(layer.lambda_q >= 0.0) || !std::isfinite(layer.lambda_q)) {
      throw ParameterError("lambda_q for layer '" + name + "' must be finite and non-negative");
    }
  }
}

NodeId weight_decay_loss(Graph& g, std::span<const NodeId> weights, double lambda_wd) {
  if (!(lambda_wd >= 0.0) || !std::isfinite(lambda_wd)) throw ParameterError("lambda_wd must be finite and non-negative");
  NodeId sum = g.leaf(Tensor::scalar(0.0));
  for (NodeId w : weights) {
    const auto n = static_cast<double>(g.value(w).size());
    // mean * n recovers the element sum within the closed primitive set.
    const NodeId layer = g.scale(g.reduce_mean(g.square(w)), 0.5 * lambda_wd * n);
    sum = g.add(sum, layer);
  }
  return sum;
}

NodeId sinreq_loss(Graph& g, NodeId weights, const LevelGeometry& geometry) {
  return g.reduce_mean(g.sin_sq_affine(weights, geometry.period, geometry.delta));
}

TotalLoss total_loss(Graph& g, NodeId task, std::span<const LayerWeights> layers, const RegularizerConfig& cfg) {
  validate(cfg);
  for (const auto& layer : layers) {
    if (layer.quantized && !cfg.per_layer.contains(layer.name)) {
      throw ConfigError("regularizer config has no entry for layer '" + layer.name + "'");
    }
  }
  std::vector<NodeId> weights;
  weights.reserve(layers.size());
  for (const auto& layer : layers) weights.push_back(layer.weights);

  TotalLoss out{};
  out.weight_decay = weight_decay_loss(g, weights, cfg.lambda_wd);
  NodeId total = task;
  if (cfg.lambda_wd > 0.0) total = g.add(total, out.weight_decay);
  for (const auto& layer : layers) {
    if (!layer.quantized) continue;
    const LayerRegularizer& reg = cfg.per_layer.at(layer.name);
    const NodeId s = sinreq_loss(g, layer.weights, reg.geometry);
    out.sinreq.emplace_back(layer.name, s);
    if (reg.lambda_q > 0.0) total = g.add(total, g.scale(s, reg.lambda_q));
  }
  out.total = total;
  return out;
}

}  // namespace sinreq
