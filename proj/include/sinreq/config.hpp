#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sinreq/dataset.hpp"
#include "sinreq/model.hpp"
#include "sinreq/train.hpp"

namespace sinreq {

inline constexpr int kConfigSchemaVersion = 1;

// Everything that determines an experiment's outputs.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string output_dir = "runs/experiment";
  ModelSpec model;
  DatasetSpec dataset;
  TrainConfig train;
  std::uint64_t init_seed = 0;
  // Full-precision baseline epochs run before `train`, e.g. to fine-tune.
  int pretrain_epochs = 0;
  // Parameters loaded after initialization and before pretraining.
  std::string init_checkpoint;
  std::size_t histogram_bins = 60;
  bool checkpoint_every_epoch = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses a JSON document; unknown keys, missing required keys and a
// mismatched schema_version raise ConfigError. The model spec is validated.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Fully resolved JSON (every field explicit) that parses back to `cfg`.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace sinreq
