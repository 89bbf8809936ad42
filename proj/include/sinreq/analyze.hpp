#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sinreq/model.hpp"
#include "sinreq/quantize.hpp"
#include "sinreq/tensor.hpp"

namespace sinreq {

// Mean absolute distance to the nearest level.
double quant_error(const Tensor& w, const LevelGeometry& g);

// Fraction of weights within eps_fraction * period of their nearest level.
double frac_near_level(const Tensor& w, const LevelGeometry& g, double eps_fraction = 0.05);

// Equal-width bins over [lo, hi]; out-of-range values land in the edge bins.
std::vector<std::size_t> histogram(const Tensor& w, std::size_t bins, double lo, double hi);

struct LayerRecord {
  double sinreq_loss = 0.0;
  double lambda_q = 0.0;
  double quant_error = 0.0;
  double frac_near_level = 0.0;

  friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

using TrajectoryPoints = std::vector<std::pair<std::size_t, double>>;

struct RunRecord {
  int epoch = 0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double task_loss = 0.0;
  double total_loss = 0.0;
  std::vector<std::pair<std::string, LayerRecord>> per_layer;       // model order
  std::vector<std::pair<std::string, TrajectoryPoints>> trajectories;  // model order

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Follows a fixed random subset of weights per layer for the whole run.
class TrajectorySampler {
 public:
  // Throws ParameterError if a layer has fewer than `per_layer` weights.
  TrajectorySampler(const Model& m, std::size_t per_layer, std::uint64_t seed);

  std::vector<std::pair<std::string, TrajectoryPoints>> sample(const Model& m) const;
  const std::vector<std::pair<std::string, std::vector<std::size_t>>>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::pair<std::string, std::vector<std::size_t>>> indices_;
};

// "%.9g"
std::string format_number(double v);

std::string metrics_csv(const std::vector<RunRecord>& records);
std::string histogram_csv(const std::vector<std::size_t>& counts, double lo, double hi);
// One row per (epoch, sample); columns follow the sampler's indices.
std::string trajectory_csv(const std::vector<std::pair<int, TrajectoryPoints>>& rows);

}  // namespace sinreq
