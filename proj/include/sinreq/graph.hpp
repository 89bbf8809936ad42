#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sinreq/tensor.hpp"

namespace sinreq {

using NodeId = std::size_t;

enum class Primitive {
  Leaf,
  MatMul,
  Conv2d,
  Add,
  Relu,
  SoftmaxCrossEntropy,
  SinSqAffine,
  Square,
  ReduceMean,
  Scale,
  Reshape,
};

const char* primitive_name(Primitive p);

// Append-only reverse-mode autodiff tape.
//
// Every operation evaluates eagerly and appends one node whose inputs all
// have smaller ids, so node order is a topological order. Values are never
// modified after the producing call returns. `backward` fills a gradient on
// every node: reachable nodes receive d(root)/d(node), the rest zeros.
class Graph {
 public:
  NodeId leaf(Tensor value);

  // [m,k] x [k,n] -> [m,n]
  NodeId matmul(NodeId a, NodeId b);
  // Cross-correlation of [N,C,H,W] input with [F,C,Kh,Kw] kernel.
  NodeId conv2d(NodeId x, NodeId kernel, std::size_t stride, std::size_t padding);
  // Elementwise sum of equal shapes, or bias-add when `b` is rank 1 and its
  // length equals dimension 1 of `a` (features for [N,F], channels for [N,C,H,W]).
  NodeId add(NodeId a, NodeId b);
  NodeId relu(NodeId x);
  // Mean over rows of -log softmax(logits)[label]. Output shape [1].
  NodeId softmax_cross_entropy(NodeId logits, std::span<const int> labels);
  // sin^2(pi * (x + delta) / period), elementwise.
  NodeId sin_sq_affine(NodeId x, double period, double delta);
  NodeId square(NodeId x);
  NodeId reduce_mean(NodeId x);
  NodeId scale(NodeId x, double factor);
  NodeId reshape(NodeId x, Shape shape);

  // Populates gradients for all nodes from the scalar node `root`.
  void backward(NodeId root);

  const Tensor& value(NodeId id) const { return node(id).value; }
  std::span<const double> grad(NodeId id) const;
  Primitive primitive(NodeId id) const { return node(id).op; }
  const std::vector<NodeId>& inputs(NodeId id) const { return node(id).inputs; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::optional<NodeId> root() const noexcept { return root_; }

 private:
  struct Node {
    Primitive op = Primitive::Leaf;
    std::vector<NodeId> inputs;
    Tensor value;
    double period = 0.0;
    double delta = 0.0;
    double factor = 0.0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::vector<int> labels;
    std::vector<double> probs;  // softmax cache for the cross-entropy backward
  };

  const Node& node(NodeId id) const;
  NodeId push(Node n);
  void backprop(const Node& n, std::span<const double> upstream, std::vector<std::vector<double>>& grads) const;

  std::vector<Node> nodes_;
  std::optional<NodeId> root_;
};

}  // namespace sinreq
