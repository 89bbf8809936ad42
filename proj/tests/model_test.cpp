#include <gtest/gtest.h>

#include <cmath>

#include "sinreq/errors.hpp"
#include "sinreq/model.hpp"
#include "sinreq/random.hpp"
#include "test_util.hpp"

using namespace sinreq;

namespace {

ModelSpec mlp_spec(std::optional<QuantizerSpec> q = QuantizerSpec{QuantScheme::WRPN, 3}) {
  ModelSpec s;
  s.input_shape = {2};
  s.layers = {{"fc1", LayerKind::Dense, 2, 6, 0, 1, 0, q},
              {"relu1", LayerKind::ReLU},
              {"fc2", LayerKind::Dense, 6, 3, 0, 1, 0, q}};
  return s;
}

ModelSpec conv_spec(QuantizerSpec q = {QuantScheme::DoReFa, 3}) {
  ModelSpec s;
  s.input_shape = {1, 7, 7};
  s.layers = {{"conv1", LayerKind::Conv2d, 1, 2, 3, 1, 1, q}, {"relu1", LayerKind::ReLU},
              {"conv2", LayerKind::Conv2d, 2, 3, 3, 2, 0, q}, {"relu2", LayerKind::ReLU},
              {"flat", LayerKind::Flatten},                   {"fc1", LayerKind::Dense, 27, 4, 0, 1, 0, q}};
  return s;
}

}  // namespace

TEST(ModelSpecTest, OutputShapes) {
  const auto shapes = layer_output_shapes(conv_spec());
  ASSERT_EQ(shapes.size(), 6u);
  EXPECT_EQ(shapes[0], (Shape{2, 7, 7}));
  EXPECT_EQ(shapes[2], (Shape{3, 3, 3}));
  EXPECT_EQ(shapes[4], (Shape{27}));
  EXPECT_EQ(shapes[5], (Shape{4}));
}

TEST(ModelSpecTest, RejectsBadSpecs) {
  ModelSpec dup = mlp_spec();
  dup.layers[2].name = "fc1";
  EXPECT_THROW(layer_output_shapes(dup), SpecError);

  ModelSpec relu_quant = mlp_spec();
  relu_quant.layers[1].quant = QuantizerSpec{QuantScheme::WRPN, 3};
  EXPECT_THROW(layer_output_shapes(relu_quant), SpecError);

  ModelSpec mismatch = mlp_spec();
  mismatch.layers[2].in = 5;
  EXPECT_THROW(layer_output_shapes(mismatch), SpecError);

  ModelSpec ragged = conv_spec();
  ragged.input_shape = {1, 6, 6};
  EXPECT_THROW(layer_output_shapes(ragged), SpecError);

  ModelSpec no_flatten = conv_spec();
  no_flatten.layers.erase(no_flatten.layers.begin() + 4);
  EXPECT_THROW(layer_output_shapes(no_flatten), SpecError);
  EXPECT_THROW(init(no_flatten, 1), SpecError);
}

TEST(InitTest, ShapesAndDeterminism) {
  const Model a = init(mlp_spec(), 42);
  const Model b = init(mlp_spec(), 42);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == init(mlp_spec(), 43));
  EXPECT_EQ(a.parameters("fc1").weights.shape(), (Shape{2, 6}));
  EXPECT_EQ(a.parameters("fc1").bias.shape(), (Shape{6}));
  for (double v : a.parameters("fc2").bias.values()) EXPECT_EQ(v, 0.0);
  const Model c = init(conv_spec(), 1);
  EXPECT_EQ(c.parameters("conv2").weights.shape(), (Shape{3, 2, 3, 3}));
  EXPECT_EQ(c.trainable_layers(), (std::vector<std::string>{"conv1", "conv2", "fc1"}));
  EXPECT_EQ(c.num_classes(), 4u);
}

TEST(InitTest, GlorotBoundsAndMean) {
  ModelSpec s;
  s.input_shape = {100};
  s.layers = {{"fc", LayerKind::Dense, 100, 100}};
  const Model m = init(s, 9);
  const double b = std::sqrt(6.0 / 200.0);
  double sum = 0.0;
  for (double v : m.parameters("fc").weights.values()) {
    EXPECT_LE(std::abs(v), b);
    sum += v;
  }
  const double n = 1e4;
  const double stderr_mean = b / std::sqrt(3.0) / std::sqrt(n);
  EXPECT_LT(std::abs(sum / n), 3 * stderr_mean);
}

TEST(ForwardTest, IdentityDense) {
  ModelSpec s;
  s.input_shape = {3};
  s.layers = {{"fc", LayerKind::Dense, 3, 3}};
  Model m(s);
  m.parameters("fc").weights = Tensor::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const Tensor x = Tensor::from_rows({{0.5, -2, 3}, {1, 1, 1}});
  ForwardPass p = forward(m, x, ForwardMode::FullPrecision);
  EXPECT_EQ(p.graph.value(p.logits), x);
}

TEST(ForwardTest, QuantizedEqualsFullPrecisionOnLevels) {
  // DoReFa renormalizes by the tensor maximum, so its levels are not a fixed
  // point of the quantizer; WRPN's are.
  const Model m = snapped(init(conv_spec({QuantScheme::WRPN, 3}), 3));
  Rng rng(1);
  const Tensor x = testutil::random_tensor({2, 1, 7, 7}, rng);
  const ForwardPass fp = forward(m, x, ForwardMode::FullPrecision);
  const ForwardPass q = forward(m, x, ForwardMode::QuantizedSTE);
  const Tensor& a = fp.graph.value(fp.logits);
  const Tensor& b = q.graph.value(q.logits);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(ForwardTest, QuantizedNeedsQuantizer) {
  const Model m = init(mlp_spec(std::nullopt), 1);
  EXPECT_THROW(forward(m, Tensor({1, 2}), ForwardMode::QuantizedSTE), ConfigError);
  EXPECT_THROW(forward(m, Tensor({1, 3}), ForwardMode::FullPrecision), DimensionError);
}

TEST(ForwardTest, DoesNotMutateShadow) {
  const Model m = init(mlp_spec(), 5);
  const Model before = m;
  Rng rng(2);
  ForwardPass p = forward(m, testutil::random_tensor({4, 2}, rng), ForwardMode::QuantizedSTE);
  const std::vector<int> labels{0, 1, 2, 0};
  p.graph.backward(p.graph.softmax_cross_entropy(p.logits, labels));
  EXPECT_TRUE(m == before);
}

TEST(StraightThroughTest, GradientEqualsFullPrecisionAtSnappedWeights) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Model m = init(conv_spec(), seed);
    Rng rng(seed + 100);
    const Tensor x = testutil::random_tensor({3, 1, 7, 7}, rng);
    const std::vector<int> labels{0, 3, 1};

    ForwardPass q = forward(m, x, ForwardMode::QuantizedSTE);
    q.graph.backward(q.graph.softmax_cross_entropy(q.logits, labels));
    const auto gq = parameter_gradients(q);

    // DoReFa output depends on the tensor maximum, so compare against the
    // scheme's own quantizer rather than the plain snap.
    Model at_levels = m;
    for (auto& p : at_levels.parameters()) p.weights = quantize(p.weights, *at_levels.layer(p.name).quant);
    ForwardPass f = forward(at_levels, x, ForwardMode::FullPrecision);
    f.graph.backward(f.graph.softmax_cross_entropy(f.logits, labels));
    const auto gf = parameter_gradients(f);

    ASSERT_EQ(gq.size(), gf.size());
    for (std::size_t l = 0; l < gq.size(); ++l) {
      for (std::size_t i = 0; i < gq[l].weights.size(); ++i) EXPECT_NEAR(gq[l].weights[i], gf[l].weights[i], 1e-12);
      for (std::size_t i = 0; i < gq[l].bias.size(); ++i) EXPECT_NEAR(gq[l].bias[i], gf[l].bias[i], 1e-12);
    }
  }
}

TEST(SnappedTest, OnlyQuantizedLayersChange) {
  ModelSpec s = mlp_spec();
  s.layers[2].quant.reset();
  const Model m = init(s, 8);
  const Model sn = snapped(m);
  const LevelGeometry g = level_geometry(*s.layers[0].quant);
  for (double v : sn.parameters("fc1").weights.values()) EXPECT_EQ(v, snap_value(v, g));
  EXPECT_EQ(sn.parameters("fc2").weights, m.parameters("fc2").weights);
}
