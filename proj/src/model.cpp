#include "sinreq/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sinreq/errors.hpp"
#include "sinreq/random.hpp"

namespace sinreq {

std::string_view layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Flatten: return "flatten";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::Dense, LayerKind::Conv2d, LayerKind::ReLU, LayerKind::Flatten}) {
    if (layer_kind_name(k) == name) return k;
  }
  throw SpecError("unknown layer kind '" + std::string(name) + "'");
}

std::vector<Shape> layer_output_shapes(const ModelSpec& spec) {
  if (spec.input_shape.empty()) throw SpecError("model input shape is empty");
  for (std::size_t d : spec.input_shape) {
    if (d == 0) throw SpecError("model input shape has a zero dimension");
  }
  if (spec.layers.empty()) throw SpecError("model has no layers");
  std::set<std::string> names;
  std::vector<Shape> shapes;
  Shape cur = spec.input_shape;
  for (const LayerSpec& l : spec.layers) {
    if (l.name.empty()) throw SpecError("layer name must not be empty");
    if (!names.insert(l.name).second) throw SpecError("duplicate layer name '" + l.name + "'");
    if (l.quant && !l.trainable()) throw SpecError("layer '" + l.name + "' cannot carry a quantizer");
    if (l.quant) {
      try {
        validate(*l.quant);
      } catch (const ParameterError& e) {
        throw SpecError("layer '" + l.name + "': " + e.what());
      }
    }
    const std::string where = "layer '" + l.name + "' ";
    switch (l.kind) {
      case LayerKind::Dense:
        if (l.in == 0 || l.out == 0) throw SpecError(where + "needs positive in/out");
        if (cur.size() != 1 || cur[0] != l.in) {
          throw SpecError(where + "expects input [" + std::to_string(l.in) + "], got " + shape_string(cur));
        }
        cur = {l.out};
        break;
      case LayerKind::Conv2d: {
        if (l.in == 0 || l.out == 0 || l.kernel == 0 || l.stride == 0) {
          throw SpecError(where + "needs positive channels, kernel and stride");
        }
        if (cur.size() != 3 || cur[0] != l.in) {
          throw SpecError(where + "expects [" + std::to_string(l.in) + ",H,W] input, got " + shape_string(cur));
        }
        const std::size_t hp = cur[1] + 2 * l.padding, wp = cur[2] + 2 * l.padding;
        if (hp < l.kernel || wp < l.kernel || (hp - l.kernel) % l.stride || (wp - l.kernel) % l.stride) {
          throw SpecError(where + "output size is not a positive integer for input " + shape_string(cur));
        }
        cur = {l.out, (hp - l.kernel) / l.stride + 1, (wp - l.kernel) / l.stride + 1};
        break;
      }
      case LayerKind::ReLU:
        break;
      case LayerKind::Flatten:
        cur = {element_count(cur)};
        break;
    }
    shapes.push_back(cur);
  }
  if (cur.size() != 1) throw SpecError("model output must be a feature vector, got " + shape_string(cur));
  return shapes;
}

namespace {

Shape weight_shape(const LayerSpec& l) {
  if (l.kind == LayerKind::Dense) return {l.in, l.out};
  return {l.out, l.in, l.kernel, l.kernel};
}

}  // namespace

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  layer_output_shapes(spec_);
  for (const LayerSpec& l : spec_.layers) {
    if (!l.trainable()) continue;
    params_.push_back({l.name, Tensor(weight_shape(l)), Tensor({l.out})});
  }
}

const LayerSpec& Model::layer(std::string_view name) const {
  for (const LayerSpec& l : spec_.layers) {
    if (l.name == name) return l;
  }
  throw ConfigError("no layer named '" + std::string(name) + "'");
}

LayerParameters& Model::parameters(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ConfigError("no trainable layer named '" + std::string(name) + "'");
}

const LayerParameters& Model::parameters(std::string_view name) const {
  return const_cast<Model*>(this)->parameters(name);
}

std::vector<std::string> Model::trainable_layers() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

std::size_t Model::num_classes() const { return layer_output_shapes(spec_).back()[0]; }

bool operator==(const Model& a, const Model& b) {
  if (!(a.spec_ == b.spec_) || a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    const auto& p = a.params_[i];
    const auto& q = b.params_[i];
    if (p.name != q.name || !(p.weights == q.weights) || !(p.bias == q.bias)) return false;
  }
  return true;
}

Model init(const ModelSpec& spec, std::uint64_t seed) {
  Model m(spec);
  Rng rng(seed);
  for (auto& p : m.parameters()) {
    const LayerSpec& l = m.layer(p.name);
    const std::size_t receptive = l.kind == LayerKind::Conv2d ? l.kernel * l.kernel : 1;
    const double fan_in = static_cast<double>(l.in * receptive);
    const double fan_out = static_cast<double>(l.out * receptive);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.weights.values()) w = rng.uniform(-bound, bound);
  }
  return m;
}

ForwardPass forward(const Model& m, const Tensor& x, ForwardMode mode) {
  const ModelSpec& spec = m.spec();
  if (x.rank() != spec.input_shape.size() + 1 ||
      !std::equal(spec.input_shape.begin(), spec.input_shape.end(), x.shape().begin() + 1)) {
    throw DimensionError("forward: input " + shape_string(x.shape()) + " does not match model input [N]" +
                         shape_string(spec.input_shape));
  }
  if (mode == ForwardMode::QuantizedSTE) {
    for (const LayerSpec& l : spec.layers) {
      if (l.trainable() && !l.quant) {
        throw ConfigError("quantized forward: layer '" + l.name + "' has no quantizer");
      }
    }
  }

  ForwardPass pass;
  Graph& g = pass.graph;
  const std::size_t batch = x.dim(0);
  pass.input = g.leaf(x);
  NodeId h = pass.input;
  for (const LayerSpec& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Dense:
      case LayerKind::Conv2d: {
        const LayerParameters& p = m.parameters(l.name);
        LayerBinding b{l.name, 0, 0, 0};
        if (mode == ForwardMode::QuantizedSTE) {
          b.shadow = g.leaf(p.weights);
          b.weights = g.leaf(quantize(p.weights, *l.quant));
        } else {
          b.weights = g.leaf(p.weights);
          b.shadow = b.weights;
        }
        b.bias = g.leaf(p.bias);
        const NodeId y = l.kind == LayerKind::Dense ? g.matmul(h, b.weights)
                                                    : g.conv2d(h, b.weights, l.stride, l.padding);
        h = g.add(y, b.bias);
        pass.layers.push_back(std::move(b));
        break;
      }
      case LayerKind::ReLU:
        h = g.relu(h);
        break;
      case LayerKind::Flatten:
        h = g.reshape(h, {batch, g.value(h).size() / batch});
        break;
    }
  }
  pass.logits = h;
  return pass;
}

std::vector<LayerGradients> parameter_gradients(const ForwardPass& pass) {
  std::vector<LayerGradients> out;
  for (const LayerBinding& b : pass.layers) {
    LayerGradients lg;
    lg.name = b.name;
    const auto gw = pass.graph.grad(b.weights);
    lg.weights.assign(gw.begin(), gw.end());
    if (b.shadow != b.weights) {
      const auto gs = pass.graph.grad(b.shadow);
      for (std::size_t i = 0; i < gs.size(); ++i) lg.weights[i] += gs[i];
    }
    const auto gb = pass.graph.grad(b.bias);
    lg.bias.assign(gb.begin(), gb.end());
    out.push_back(std::move(lg));
  }
  return out;
}

Model snapped(const Model& m) {
  Model out = m;
  for (auto& p : out.parameters()) {
    const LayerSpec& l = out.layer(p.name);
    if (l.quant) p.weights = snap_to_levels(p.weights, level_geometry(*l.quant));
  }
  return out;
}

}  // namespace sinreq
