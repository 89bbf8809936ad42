// Command-line driver: train / eval / sweep / paired.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sinreq/analyze.hpp"
#include "sinreq/config.hpp"
#include "sinreq/errors.hpp"
#include "sinreq/experiment.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

std::vector<double> parse_vary(const std::string& spec) {
  const std::string prefix = "lambda_q=";
  if (spec.rfind(prefix, 0) != 0) throw CLI::ValidationError("--vary", "expected lambda_q=<v1,v2,...>");
  std::vector<double> values;
  std::stringstream ss(spec.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 0.0) {
      throw CLI::ValidationError("--vary", "bad lambda_q value '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw CLI::ValidationError("--vary", "no lambda_q values");
  return values;
}

std::optional<std::filesystem::path> output_override(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sinusoidal quantization regularizer: training and evaluation driver"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, output, vary;

  auto* train = app.add_subcommand("train", "Train per config; writes metrics, histograms, trajectories, checkpoint");
  train->add_option("config", config_path, "Experiment config (JSON)")->required();
  train->add_option("-o,--output", output, "Override the config's output directory");

  auto* eval = app.add_subcommand("eval", "Pre/post-snap validation accuracy of a checkpoint as JSON");
  eval->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "One run per lambda_q value");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--vary", vary, "lambda_q=<comma separated values>")->required();
  sweep->add_option("-o,--output", output, "Override the config's output directory");

  auto* paired = app.add_subcommand("paired", "Same seed with and without SinReQ; prints comparison JSON");
  paired->add_option("config", config_path, "Experiment config (JSON)")->required();
  paired->add_option("-o,--output", output, "Override the config's output directory");

  std::vector<double> lambdas;
  try {
    app.parse(argc, argv);
    if (sweep->parsed()) lambdas = parse_vary(vary);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    const sinreq::ExperimentConfig cfg = sinreq::load_config(config_path);
    if (train->parsed()) {
      const auto outcome = sinreq::run_train(cfg, output_override(output));
      const auto dir = output.empty() ? cfg.output_dir : output;
      std::cout << "trained " << outcome.records.size() << " epochs into " << dir << '\n';
      if (!outcome.records.empty()) {
        std::cout << "final val_acc " << sinreq::format_number(outcome.records.back().val_acc) << '\n';
      }
      if (outcome.quantized) {
        std::cout << "post-snap val_acc " << sinreq::format_number(outcome.quantized->post_snap) << '\n';
      }
    } else if (eval->parsed()) {
      std::cout << sinreq::run_eval(checkpoint_path, cfg) << '\n';
    } else if (sweep->parsed()) {
      std::cout << sinreq::run_sweep(cfg, lambdas, output_override(output)) << '\n';
    } else if (paired->parsed()) {
      std::cout << sinreq::run_paired(cfg, output_override(output)).json << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return EXIT_SUCCESS;
}
