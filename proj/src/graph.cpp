#include "sinreq/graph.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sinreq/errors.hpp"

namespace sinreq {

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Leaf: return "leaf";
    case Primitive::MatMul: return "matmul";
    case Primitive::Conv2d: return "conv2d";
    case Primitive::Add: return "add";
    case Primitive::Relu: return "relu";
    case Primitive::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    case Primitive::SinSqAffine: return "sin_sq_affine";
    case Primitive::Square: return "square";
    case Primitive::ReduceMean: return "reduce_mean";
    case Primitive::Scale: return "scale";
    case Primitive::Reshape: return "reshape";
  }
  return "unknown";
}

const Graph::Node& Graph::node(NodeId id) const {
  if (id >= nodes_.size()) throw IndexError("node id " + std::to_string(id) + " out of range");
  return nodes_[id];
}

NodeId Graph::push(Node n) {
  if (!n.value.all_finite()) {
    throw NumericError(std::string(primitive_name(n.op)) + " produced a non-finite value");
  }
  const NodeId id = nodes_.size();
  for (NodeId in : n.inputs) {
    if (in >= id) throw ContractError("node input refers forward in the graph");
  }
  nodes_.push_back(std::move(n));
  return id;
}

NodeId Graph::leaf(Tensor value) {
  if (value.empty()) throw DimensionError("leaf: tensor must be non-empty");
  Node n;
  n.value = std::move(value);
  n.value.clear_grad();
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(A.shape()) + " by " + shape_string(B.shape()));
  }
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * B[p * n + j];
    }
  }
  Node node;
  node.op = Primitive::MatMul;
  node.inputs = {a, b};
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::conv2d(NodeId x, NodeId kernel, std::size_t stride, std::size_t padding) {
  const Tensor& X = value(x);
  const Tensor& K = value(kernel);
  if (X.rank() != 4 || K.rank() != 4 || X.dim(1) != K.dim(1)) {
    throw DimensionError("conv2d: input " + shape_string(X.shape()) + " incompatible with kernel " +
                         shape_string(K.shape()));
  }
  if (stride == 0) throw ParameterError("conv2d: stride must be positive");
  const std::size_t N = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
  const std::size_t F = K.dim(0), Kh = K.dim(2), Kw = K.dim(3);
  const std::size_t Hp = H + 2 * padding, Wp = W + 2 * padding;
  if (Hp < Kh || Wp < Kw || (Hp - Kh) % stride != 0 || (Wp - Kw) % stride != 0) {
    throw DimensionError("conv2d: output size is not a positive integer for input " + shape_string(X.shape()) +
                         ", kernel " + shape_string(K.shape()) + ", stride " + std::to_string(stride) +
                         ", padding " + std::to_string(padding));
  }
  const std::size_t Ho = (Hp - Kh) / stride + 1, Wo = (Wp - Kw) / stride + 1;
  Tensor out({N, F, Ho, Wo});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t f = 0; f < F; ++f) {
      for (std::size_t oh = 0; oh < Ho; ++oh) {
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          double acc = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t kh = 0; kh < Kh; ++kh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + kh) - static_cast<std::ptrdiff_t>(padding);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
              for (std::size_t kw = 0; kw < Kw; ++kw) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kw) - static_cast<std::ptrdiff_t>(padding);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                acc += X[((n * C + c) * H + ih) * W + iw] * K[((f * C + c) * Kh + kh) * Kw + kw];
              }
            }
          }
          out[((n * F + f) * Ho + oh) * Wo + ow] = acc;
        }
      }
    }
  }
  Node node;
  node.op = Primitive::Conv2d;
  node.inputs = {x, kernel};
  node.stride = stride;
  node.padding = padding;
  node.value = std::move(out);
  return push(std::move(node));
}

namespace {

bool is_bias_add(const Tensor& a, const Tensor& b) {
  return a.shape() != b.shape() && b.rank() == 1 && a.rank() >= 2 && a.dim(1) == b.dim(0);
}

// Number of contiguous elements sharing one index along axis 1.
std::size_t inner_extent(const Tensor& a) {
  std::size_t inner = 1;
  for (std::size_t d = 2; d < a.rank(); ++d) inner *= a.dim(d);
  return inner;
}

}  // namespace

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  Tensor out = A;
  out.clear_grad();
  if (A.shape() == B.shape()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  } else if (is_bias_add(A, B)) {
    const std::size_t channels = A.dim(1);
    const std::size_t inner = inner_extent(A);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[(i / inner) % channels];
  } else {
    throw DimensionError("add: shapes " + shape_string(A.shape()) + " and " + shape_string(B.shape()) +
                         " neither match nor form a bias-add");
  }
  Node node;
  node.op = Primitive::Add;
  node.inputs = {a, b};
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::relu(NodeId x) {
  Tensor out = value(x);
  out.clear_grad();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  Node node;
  node.op = Primitive::Relu;
  node.inputs = {x};
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::softmax_cross_entropy(NodeId logits, std::span<const int> labels) {
  const Tensor& L = value(logits);
  if (L.rank() != 2) throw DimensionError("softmax_cross_entropy: logits must be [N,C], got " + shape_string(L.shape()));
  const std::size_t N = L.dim(0), C = L.dim(1);
  if (labels.size() != N) throw DimensionError("softmax_cross_entropy: label count does not match batch size");
  std::vector<double> probs(N * C);
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const int label = labels[n];
    if (label < 0 || static_cast<std::size_t>(label) >= C) {
      throw IndexError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                       std::to_string(C) + " classes");
    }
    const double* row = L.data().data() + n * C;
    double mx = row[0];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      probs[n * C + c] = std::exp(row[c] - mx);
      sum += probs[n * C + c];
    }
    for (std::size_t c = 0; c < C; ++c) probs[n * C + c] /= sum;
    total += -(row[label] - mx - std::log(sum));
  }
  Node node;
  node.op = Primitive::SoftmaxCrossEntropy;
  node.inputs = {logits};
  node.labels.assign(labels.begin(), labels.end());
  node.probs = std::move(probs);
  node.value = Tensor::scalar(total / static_cast<double>(N));
  return push(std::move(node));
}

NodeId Graph::sin_sq_affine(NodeId x, double period, double delta) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw ParameterError("sin_sq_affine: period must be positive and finite, got " + std::to_string(period));
  }
  if (!std::isfinite(delta)) throw ParameterError("sin_sq_affine: delta must be finite");
  Tensor out = value(x);
  out.clear_grad();
  const double w = std::numbers::pi / period;
  for (double& v : out.values()) {
    const double s = std::sin(w * (v + delta));
    v = s * s;
  }
  Node node;
  node.op = Primitive::SinSqAffine;
  node.inputs = {x};
  node.period = period;
  node.delta = delta;
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::square(NodeId x) {
  Tensor out = value(x);
  out.clear_grad();
  for (double& v : out.values()) v *= v;
  Node node;
  node.op = Primitive::Square;
  node.inputs = {x};
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::reduce_mean(NodeId x) {
  const Tensor& X = value(x);
  if (X.empty()) throw DimensionError("reduce_mean: empty tensor");
  double sum = 0.0;
  for (double v : X.data()) sum += v;
  Node node;
  node.op = Primitive::ReduceMean;
  node.inputs = {x};
  node.value = Tensor::scalar(sum / static_cast<double>(X.size()));
  return push(std::move(node));
}

NodeId Graph::scale(NodeId x, double factor) {
  if (!std::isfinite(factor)) throw ParameterError("scale: factor must be finite");
  Tensor out = value(x);
  out.clear_grad();
  for (double& v : out.values()) v *= factor;
  Node node;
  node.op = Primitive::Scale;
  node.inputs = {x};
  node.factor = factor;
  node.value = std::move(out);
  return push(std::move(node));
}

NodeId Graph::reshape(NodeId x, Shape shape) {
  const Tensor& X = value(x);
  if (element_count(shape) != X.size()) {
    throw DimensionError("reshape: " + shape_string(X.shape()) + " cannot become " + shape_string(shape));
  }
  Node node;
  node.op = Primitive::Reshape;
  node.inputs = {x};
  node.value = X.reshaped(std::move(shape));
  return push(std::move(node));
}

std::span<const double> Graph::grad(NodeId id) const {
  const Node& n = node(id);
  if (!n.value.has_grad()) throw ContractError("backward has not been run on this graph");
  return n.value.grad();
}

void Graph::backward(NodeId root) {
  const Node& r = node(root);
  if (r.value.shape() != Shape{1}) {
    throw ContractError("backward root must have shape [1], got " + shape_string(r.value.shape()));
  }
  root_ = root;
  std::vector<std::vector<double>> grads(nodes_.size());
  for (NodeId i = 0; i < nodes_.size(); ++i) grads[i].assign(nodes_[i].value.size(), 0.0);
  grads[root][0] = 1.0;
  for (NodeId i = root + 1; i-- > 0;) {
    backprop(nodes_[i], grads[i], grads);
  }
  for (NodeId i = 0; i < nodes_.size(); ++i) nodes_[i].value.set_grad(std::move(grads[i]));
}

void Graph::backprop(const Node& n, std::span<const double> up, std::vector<std::vector<double>>& grads) const {
  switch (n.op) {
    case Primitive::Leaf:
      return;
    case Primitive::MatMul: {
      const Tensor& A = value(n.inputs[0]);
      const Tensor& B = value(n.inputs[1]);
      const std::size_t m = A.dim(0), k = A.dim(1), cols = B.dim(1);
      auto& ga = grads[n.inputs[0]];
      auto& gb = grads[n.inputs[1]];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < cols; ++j) acc += up[i * cols + j] * B[p * cols + j];
          ga[i * k + p] += acc;
        }
      }
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t i = 0; i < m; ++i) {
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < cols; ++j) gb[p * cols + j] += aip * up[i * cols + j];
        }
      }
      return;
    }
    case Primitive::Conv2d: {
      const Tensor& X = value(n.inputs[0]);
      const Tensor& K = value(n.inputs[1]);
      auto& gx = grads[n.inputs[0]];
      auto& gk = grads[n.inputs[1]];
      const std::size_t N = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
      const std::size_t F = K.dim(0), Kh = K.dim(2), Kw = K.dim(3);
      const std::size_t Ho = n.value.dim(2), Wo = n.value.dim(3);
      const auto pad = static_cast<std::ptrdiff_t>(n.padding);
      for (std::size_t b = 0; b < N; ++b) {
        for (std::size_t f = 0; f < F; ++f) {
          for (std::size_t oh = 0; oh < Ho; ++oh) {
            for (std::size_t ow = 0; ow < Wo; ++ow) {
              const double g = up[((b * F + f) * Ho + oh) * Wo + ow];
              if (g == 0.0) continue;
              for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t kh = 0; kh < Kh; ++kh) {
                  const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * n.stride + kh) - pad;
                  if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                  for (std::size_t kw = 0; kw < Kw; ++kw) {
                    const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * n.stride + kw) - pad;
                    if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                    const std::size_t xi = ((b * C + c) * H + ih) * W + iw;
                    const std::size_t ki = ((f * C + c) * Kh + kh) * Kw + kw;
                    gx[xi] += g * K[ki];
                    gk[ki] += g * X[xi];
                  }
                }
              }
            }
          }
        }
      }
      return;
    }
    case Primitive::Add: {
      const Tensor& A = value(n.inputs[0]);
      const Tensor& B = value(n.inputs[1]);
      auto& ga = grads[n.inputs[0]];
      for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i];
      auto& gb = grads[n.inputs[1]];
      if (A.shape() == B.shape()) {
        for (std::size_t i = 0; i < up.size(); ++i) gb[i] += up[i];
      } else {
        const std::size_t channels = A.dim(1);
        const std::size_t inner = inner_extent(A);
        for (std::size_t i = 0; i < up.size(); ++i) gb[(i / inner) % channels] += up[i];
      }
      return;
    }
    case Primitive::Relu: {
      const Tensor& X = value(n.inputs[0]);
      auto& gx = grads[n.inputs[0]];
      for (std::size_t i = 0; i < up.size(); ++i) {
        if (X[i] > 0.0) gx[i] += up[i];
      }
      return;
    }
    case Primitive::SoftmaxCrossEntropy: {
      const std::size_t N = n.labels.size();
      const std::size_t C = n.probs.size() / N;
      const double s = up[0] / static_cast<double>(N);
      auto& gl = grads[n.inputs[0]];
      for (std::size_t b = 0; b < N; ++b) {
        for (std::size_t c = 0; c < C; ++c) {
          const double onehot = static_cast<std::size_t>(n.labels[b]) == c ? 1.0 : 0.0;
          gl[b * C + c] += s * (n.probs[b * C + c] - onehot);
        }
      }
      return;
    }
    case Primitive::SinSqAffine: {
      const Tensor& X = value(n.inputs[0]);
      auto& gx = grads[n.inputs[0]];
      const double w = std::numbers::pi / n.period;
      for (std::size_t i = 0; i < up.size(); ++i) {
        gx[i] += up[i] * w * std::sin(2.0 * w * (X[i] + n.delta));
      }
      return;
    }
    case Primitive::Square: {
      const Tensor& X = value(n.inputs[0]);
      auto& gx = grads[n.inputs[0]];
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += 2.0 * X[i] * up[i];
      return;
    }
    case Primitive::ReduceMean: {
      auto& gx = grads[n.inputs[0]];
      const double g = up[0] / static_cast<double>(gx.size());
      for (double& v : gx) v += g;
      return;
    }
    case Primitive::Scale: {
      auto& gx = grads[n.inputs[0]];
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += n.factor * up[i];
      return;
    }
    case Primitive::Reshape: {
      auto& gx = grads[n.inputs[0]];
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
      return;
    }
  }
}

}  // namespace sinreq
