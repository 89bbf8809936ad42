#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sinreq/analyze.hpp"
#include "sinreq/errors.hpp"
#include "sinreq/model.hpp"
#include "sinreq/random.hpp"
#include "sinreq/regularizer.hpp"
#include "test_util.hpp"

using namespace sinreq;

namespace {

double nearest_distance(double w, const std::vector<double>& levels) {
  double best = 1e300;
  for (double v : levels) best = std::min(best, std::abs(w - v));
  return best;
}

ModelSpec spec() {
  ModelSpec s;
  s.input_shape = {2};
  s.layers = {{"fc1", LayerKind::Dense, 2, 8}, {"relu", LayerKind::ReLU}, {"fc2", LayerKind::Dense, 8, 2}};
  return s;
}

}  // namespace

TEST(QuantErrorTest, Examples) {
  const LevelGeometry g = level_geometry({QuantScheme::WRPN, 3});
  EXPECT_EQ(quant_error(Tensor(Shape{g.levels.size()}, g.levels), g), 0.0);
  EXPECT_NEAR(quant_error(Tensor::vector({1.0 / 6}), g), g.period / 2, 1e-15);
  Rng rng(3);
  const Tensor w = testutil::random_tensor({300}, rng, -1.2, 1.2);
  double expected = 0.0;
  for (double v : w.values()) expected += nearest_distance(v, g.levels);
  EXPECT_NEAR(quant_error(w, g), expected / 300.0, 1e-15);
}

TEST(QuantErrorTest, VanishesExactlyWhenSinReqDoes) {
  Rng rng(8);
  const LevelGeometry g = level_geometry({QuantScheme::DoReFa, 3});
  for (int trial = 0; trial < 50; ++trial) {
    Tensor w({10});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = g.levels[rng.below(g.levels.size())];
    if (trial % 2) w[rng.below(10)] += rng.uniform(-0.1, 0.1);
    Graph graph;
    const double s = graph.value(sinreq_loss(graph, graph.leaf(w), g)).item();
    EXPECT_EQ(quant_error(w, g) == 0.0, s < 1e-22);
  }
}

TEST(FracNearLevelTest, Threshold) {
  const LevelGeometry g = level_geometry({QuantScheme::WRPN, 3});
  const double eps = 0.05 * g.period;
  const Tensor w = Tensor::vector({0.0, eps * 0.9, 1.0 / 3 + eps * 1.1, 1.0 / 6});
  EXPECT_DOUBLE_EQ(frac_near_level(w, g), 0.5);
}

TEST(HistogramTest, Examples) {
  EXPECT_EQ(histogram(Tensor({7}, 0.3), 5, -1, 1), (std::vector<std::size_t>{0, 0, 0, 7, 0}));
  Tensor grid({100});
  for (std::size_t i = 0; i < 100; ++i) grid[i] = (static_cast<double>(i) + 0.5) / 100.0;
  EXPECT_EQ(histogram(grid, 10, 0, 1), std::vector<std::size_t>(10, 10));
  EXPECT_EQ(histogram(Tensor::vector({-5, 5, 1}), 2, 0, 1), (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(histogram(grid, 10, 1, 1), ParameterError);
  EXPECT_THROW(histogram(grid, 0, 0, 1), ParameterError);
}

TEST(HistogramTest, MatchesDirectBinningAndConserves) {
  Rng rng(2);
  const Tensor w = testutil::random_tensor({1000}, rng, -1.5, 1.5);
  const auto counts = histogram(w, 13, -1, 1);
  std::vector<std::size_t> expected(13, 0);
  for (double v : w.values()) {
    long b = static_cast<long>(std::floor((v + 1) / 2 * 13));
    expected[static_cast<std::size_t>(std::clamp(b, 0L, 12L))]++;
  }
  EXPECT_EQ(counts, expected);
  std::size_t total = 0;
  for (auto c : counts) total += c;
  EXPECT_EQ(total, 1000u);
}

TEST(TrajectoryTest, IndicesFixedUniqueAndSeeded) {
  const Model m = init(spec(), 1);
  const TrajectorySampler a(m, 5, 77), b(m, 5, 77);
  EXPECT_EQ(a.indices(), b.indices());
  for (const auto& [name, idx] : a.indices()) {
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 5u);
  }
  const TrajectorySampler all(m, 16, 3);
  const auto pts = all.sample(m);
  ASSERT_EQ(pts.size(), 2u);
  std::set<std::size_t> covered;
  for (const auto& [i, v] : pts[0].second) {
    covered.insert(i);
    EXPECT_EQ(v, m.parameters("fc1").weights[i]);
  }
  EXPECT_EQ(covered.size(), 16u);
  EXPECT_THROW(TrajectorySampler(m, 17, 1), ParameterError);
}

TEST(CsvTest, MetricsLayout) {
  RunRecord r;
  r.epoch = 1;
  r.train_acc = 0.5;
  r.val_acc = 0.25;
  r.task_loss = 1.0 / 3;
  r.total_loss = 2;
  r.per_layer = {{"fc1", {0.1, 1, 0.01, 0.9}}};
  const std::string csv = metrics_csv({r});
  EXPECT_EQ(csv,
            "epoch,train_acc,val_acc,task_loss,total_loss,fc1_sinreq_loss,fc1_lambda_q,fc1_quant_error,"
            "fc1_frac_near_level\n1,0.5,0.25,0.333333333,2,0.1,1,0.01,0.9\n");
  EXPECT_EQ(histogram_csv({3, 1}, -1, 1), "bin_lo,bin_hi,count\n-1,0,3\n0,1,1\n");
  EXPECT_EQ(format_number(1.0 / 7), "0.142857143");
}

TEST(CsvTest, Trajectory) {
  const std::vector<std::pair<int, TrajectoryPoints>> rows{{0, {{4, 0.5}, {9, -1}}}, {1, {{4, 0.25}, {9, 1}}}};
  EXPECT_EQ(trajectory_csv(rows), "epoch,w4,w9\n0,0.5,-1\n1,0.25,1\n");
}
