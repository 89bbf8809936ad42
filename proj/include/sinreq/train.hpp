#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sinreq/analyze.hpp"
#include "sinreq/dataset.hpp"
#include "sinreq/model.hpp"
#include "sinreq/regularizer.hpp"
#include "sinreq/schedule.hpp"

namespace sinreq {

enum class TrainMode { FP_SinReQ, STE_Quantized, STE_Quantized_SinReQ, FP_Baseline };

std::string_view train_mode_name(TrainMode m);
TrainMode parse_train_mode(std::string_view name);

bool uses_sinreq(TrainMode m);
bool uses_ste(TrainMode m);
// The same mode with the periodic regulariser switched off.
TrainMode without_sinreq(TrainMode m);

struct TrainConfig {
  TrainMode mode = TrainMode::FP_SinReQ;
  int epochs = 60;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double lambda_wd = 0.0;
  // Exponential schedules with horizon <= 0 span the whole run.
  LambdaSchedule schedule = LambdaSchedule::constant(1.0);
  std::map<std::string, LambdaSchedule> layer_schedules;
  bool eval_quantize = true;
  std::size_t trajectories_per_layer = 10;
  double near_level_fraction = 0.05;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg, const Model& m);

struct OptimizerState {
  std::vector<LayerParameters> velocity;  // same names and shapes as the model
};

OptimizerState make_optimizer_state(const Model& m);

struct StepMetrics {
  double task_loss = 0.0;
  double weight_decay = 0.0;
  double total_loss = 0.0;
  std::vector<std::pair<std::string, double>> sinreq;    // quantized layers
  std::vector<std::pair<std::string, double>> lambda_q;  // same order
};

// Regulariser in effect at `step`: scheduled lambda_q per quantized layer,
// zero in modes without the periodic term.
RegularizerConfig regularizer_at(const TrainConfig& cfg, const Model& m, std::int64_t step);

// One SGD-with-momentum step on the shadow weights:
//   v <- momentum * v - lr * grad;  w <- w + v
// Throws DivergenceError if the loss is not finite.
StepMetrics train_step(Model& m, const Dataset& batch, const TrainConfig& cfg, OptimizerState& opt, std::int64_t step);

double accuracy(const Model& m, const Dataset& data, ForwardMode mode);

struct QuantizedAccuracy {
  double pre_snap = 0.0;
  double post_snap = 0.0;
};

// Accuracy with shadow weights, then with weights snapped to their levels.
// The model is not modified.
QuantizedAccuracy evaluate_quantized(const Model& m, const Dataset& data);

// Called once before training with epoch 0 and after every epoch.
using EpochObserver = std::function<void(int epoch, const Model&, const RunRecord*)>;

// Runs cfg.epochs epochs, appending one record per epoch to `records`, so
// records completed before a DivergenceError remain available.
void fit(Model& m, const Split& data, const TrainConfig& cfg, std::vector<RunRecord>& records,
         const EpochObserver& observer = {});
std::vector<RunRecord> fit(Model& m, const Split& data, const TrainConfig& cfg);

}  // namespace sinreq
