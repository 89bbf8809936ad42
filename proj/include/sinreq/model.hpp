#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sinreq/graph.hpp"
#include "sinreq/quantize.hpp"
#include "sinreq/tensor.hpp"

namespace sinreq {

enum class LayerKind { Dense, Conv2d, ReLU, Flatten };

std::string_view layer_kind_name(LayerKind k);
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Dense;
  // Dense: in/out features. Conv2d: in/out channels.
  std::size_t in = 0;
  std::size_t out = 0;
  // Conv2d only; square kernels.
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::optional<QuantizerSpec> quant;

  bool trainable() const noexcept { return kind == LayerKind::Dense || kind == LayerKind::Conv2d; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
  Shape input_shape;  // per sample, batch dimension excluded
  std::vector<LayerSpec> layers;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Per-sample output shape of every layer. Throws SpecError when names
// collide, a non-trainable layer carries a quantizer, or shapes do not
// compose.
std::vector<Shape> layer_output_shapes(const ModelSpec& spec);

struct LayerParameters {
  std::string name;
  Tensor weights;  // full-precision shadow copy; Dense [in,out], Conv2d [F,C,k,k]
  Tensor bias;
};

class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  const LayerSpec& layer(std::string_view name) const;

  // Dense/Conv2d layers in network order.
  std::vector<LayerParameters>& parameters() noexcept { return params_; }
  const std::vector<LayerParameters>& parameters() const noexcept { return params_; }
  LayerParameters& parameters(std::string_view name);
  const LayerParameters& parameters(std::string_view name) const;

  std::vector<std::string> trainable_layers() const;
  std::size_t num_classes() const;

  friend bool operator==(const Model& a, const Model& b);

 private:
  ModelSpec spec_;
  std::vector<LayerParameters> params_;
};

// Glorot-uniform weights, zero biases.
Model init(const ModelSpec& spec, std::uint64_t seed);

enum class ForwardMode { FullPrecision, QuantizedSTE };

struct LayerBinding {
  std::string name;
  NodeId weights;  // weight node used by the forward computation
  NodeId bias;
  NodeId shadow;   // full-precision weights; equals `weights` in FullPrecision
};

struct ForwardPass {
  Graph graph;
  NodeId input = 0;
  NodeId logits = 0;
  std::vector<LayerBinding> layers;
};

// Builds the forward graph for a batch x of shape [N, input_shape...].
//
// QuantizedSTE feeds quantize(shadow) as a separate leaf, so the gradient
// collected for it is the straight-through gradient of the shadow weights.
ForwardPass forward(const Model& m, const Tensor& x, ForwardMode mode);

struct LayerGradients {
  std::string name;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Shadow-weight and bias gradients after `pass.graph.backward(...)`.
std::vector<LayerGradients> parameter_gradients(const ForwardPass& pass);

// Copy of the model with every quantized layer's weights snapped to levels.
Model snapped(const Model& m);

}  // namespace sinreq
