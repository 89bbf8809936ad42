#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sinreq/config.hpp"
#include "sinreq/train.hpp"

namespace sinreq {

struct TrainOutcome {
  Model model;
  std::vector<RunRecord> records;
  std::optional<QuantizedAccuracy> quantized;  // on the validation split
};

// Initial parameters: Glorot init from init_seed, then the optional
// checkpoint, then `pretrain_epochs` of full-precision baseline training.
Model prepare_model(const ExperimentConfig& cfg, const Split& data);

// Trains `start` per cfg.train. With a non-empty `out_dir` writes
// config.json, metrics.csv, hist_<layer>_<epoch>.csv, traj_<layer>.csv,
// checkpoint_final.bin and summary.json.
TrainOutcome train_from(Model start, const ExperimentConfig& cfg, const Split& data,
                        const std::filesystem::path& out_dir);

// prepare_model + train_from into cfg.output_dir (or `out_dir` if given).
TrainOutcome run_train(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {});

// Pre/post-snap validation accuracy of a checkpoint, as a JSON object.
std::string run_eval(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg);

// One run per lambda_q value (constant schedule), each in its own
// subdirectory of the output directory. Returns a JSON summary.
std::string run_sweep(const ExperimentConfig& cfg, const std::vector<double>& lambdas,
                      const std::optional<std::filesystem::path>& out_dir = {});

struct PairedOutcome {
  QuantizedAccuracy with_sinreq;
  QuantizedAccuracy without_sinreq;
  std::string json;
};

// Trains the configured mode and its no-SinReQ counterpart from the same
// prepared model and seed. Writes with_sinreq/, without_sinreq/ and
// comparison.json when an output directory is in effect; an empty path
// disables all file output.
PairedOutcome run_paired(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {});

}  // namespace sinreq
