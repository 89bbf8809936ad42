#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sinreq/graph.hpp"
#include "sinreq/quantize.hpp"

namespace sinreq {

struct LayerRegularizer {
  double lambda_q = 1.0;
  LevelGeometry geometry;
};

struct RegularizerConfig {
  double lambda_wd = 0.0;
  std::map<std::string, LayerRegularizer> per_layer;
};

// Throws ParameterError on negative or non-finite coefficients.
void validate(const RegularizerConfig& cfg);

struct LayerWeights {
  std::string name;
  NodeId weights;
  bool quantized = true;  // false: weight decay only, no periodic term
};

// (lambda / 2) * sum over layers and elements of w^2.
NodeId weight_decay_loss(Graph& g, std::span<const NodeId> weights, double lambda_wd);

// Mean over elements of sin^2(pi * (w + delta) / period).
NodeId sinreq_loss(Graph& g, NodeId weights, const LevelGeometry& geometry);

struct TotalLoss {
  NodeId total;
  NodeId weight_decay;
  // One entry per regularised layer, in the order given.
  std::vector<std::pair<std::string, NodeId>> sinreq;
};

// task + weight decay + sum_l lambda_q[l] * sinreq_l.
//
// Weight decay covers every layer; each quantized layer must have an entry
// in `cfg.per_layer`. Terms whose
// coefficient is exactly zero are evaluated for reporting but left out of
// the total, so a switched-off regulariser contributes nothing to gradients.
TotalLoss total_loss(Graph& g, NodeId task, std::span<const LayerWeights> layers, const RegularizerConfig& cfg);

}  // namespace sinreq
