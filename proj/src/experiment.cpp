#include "sinreq/experiment.hpp"

#include <json.hpp>

#include "sinreq/analyze.hpp"
#include "sinreq/checkpoint.hpp"
#include "sinreq/errors.hpp"

namespace sinreq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::pair<double, double> histogram_range(const LayerSpec& l) {
  if (!l.quant) return {-1.0, 1.0};
  const LevelGeometry g = level_geometry(*l.quant);
  return {g.levels.front() - g.period, g.levels.back() + g.period};
}

void write_histograms(const Model& m, const ExperimentConfig& cfg, int epoch, const fs::path& dir) {
  for (const auto& p : m.parameters()) {
    const auto [lo, hi] = histogram_range(m.layer(p.name));
    const auto counts = histogram(p.weights, cfg.histogram_bins, lo, hi);
    write_file(dir / ("hist_" + p.name + "_" + std::to_string(epoch) + ".csv"), histogram_csv(counts, lo, hi));
  }
}

json accuracy_json(const QuantizedAccuracy& q) {
  return {{"pre_snap", q.pre_snap}, {"post_snap", q.post_snap}, {"drop", q.pre_snap - q.post_snap}};
}

}  // namespace

Model prepare_model(const ExperimentConfig& cfg, const Split& data) {
  Model m = init(cfg.model, cfg.init_seed);
  if (!cfg.init_checkpoint.empty()) load_checkpoint(m, cfg.init_checkpoint);
  if (cfg.pretrain_epochs > 0) {
    TrainConfig pre = cfg.train;
    pre.mode = TrainMode::FP_Baseline;
    pre.epochs = cfg.pretrain_epochs;
    pre.layer_schedules.clear();
    pre.schedule = LambdaSchedule::constant(0.0);
    std::vector<RunRecord> ignored;
    fit(m, data, pre, ignored);
  }
  return m;
}

TrainOutcome train_from(Model start, const ExperimentConfig& cfg, const Split& data, const fs::path& out_dir) {
  const bool write = !out_dir.empty();
  if (write) {
    fs::create_directories(out_dir);
    write_file(out_dir / "config.json", dump_config(cfg));
  }
  TrainOutcome out{std::move(start), {}, std::nullopt};
  EpochObserver observer;
  if (write) {
    observer = [&](int epoch, const Model& m, const RunRecord*) {
      write_histograms(m, cfg, epoch, out_dir);
      if (cfg.checkpoint_every_epoch) {
        save_checkpoint(m, out_dir / ("checkpoint_epoch_" + std::to_string(epoch) + ".bin"));
      }
    };
  }
  fit(out.model, data, cfg.train, out.records, observer);
  if (cfg.train.eval_quantize) out.quantized = evaluate_quantized(out.model, data.val);

  if (write) {
    write_file(out_dir / "metrics.csv", metrics_csv(out.records));
    for (const auto& p : out.model.parameters()) {
      std::vector<std::pair<int, TrajectoryPoints>> rows;
      for (const RunRecord& r : out.records) {
        for (const auto& [name, pts] : r.trajectories) {
          if (name == p.name) rows.emplace_back(r.epoch, pts);
        }
      }
      write_file(out_dir / ("traj_" + p.name + ".csv"), trajectory_csv(rows));
    }
    save_checkpoint(out.model, out_dir / "checkpoint_final.bin");
    json summary = {{"epochs", cfg.train.epochs}, {"mode", std::string(train_mode_name(cfg.train.mode))}};
    if (!out.records.empty()) {
      summary["final_train_acc"] = out.records.back().train_acc;
      summary["final_val_acc"] = out.records.back().val_acc;
    }
    if (out.quantized) summary["quantized"] = accuracy_json(*out.quantized);
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  }
  return out;
}

TrainOutcome run_train(const ExperimentConfig& cfg, const std::optional<fs::path>& out_dir) {
  const Split data = make_dataset(cfg.dataset);
  return train_from(prepare_model(cfg, data), cfg, data, out_dir.value_or(fs::path(cfg.output_dir)));
}

std::string run_eval(const fs::path& checkpoint, const ExperimentConfig& cfg) {
  Model m(cfg.model);
  load_checkpoint(m, checkpoint);
  const Split data = make_dataset(cfg.dataset);
  const QuantizedAccuracy q = evaluate_quantized(m, data.val);
  json out = accuracy_json(q);
  out["checkpoint"] = checkpoint.string();
  out["split"] = "val";
  out["samples"] = data.val.size();
  return out.dump(2);
}

std::string run_sweep(const ExperimentConfig& cfg, const std::vector<double>& lambdas,
                      const std::optional<fs::path>& out_dir) {
  if (lambdas.empty()) throw ConfigError("sweep: no lambda_q values");
  if (!uses_sinreq(cfg.train.mode)) throw ConfigError("sweep: mode has no SinReQ term to vary");
  const fs::path root = out_dir.value_or(fs::path(cfg.output_dir));
  const Split data = make_dataset(cfg.dataset);
  const Model start = prepare_model(cfg, data);
  json runs = json::array();
  for (double lambda : lambdas) {
    ExperimentConfig member = cfg;
    member.train.schedule = LambdaSchedule::constant(lambda);
    member.train.layer_schedules.clear();
    const fs::path dir = root.empty() ? fs::path() : root / ("lambda_q_" + format_number(lambda));
    if (!dir.empty()) member.output_dir = dir.string();
    const TrainOutcome o = train_from(start, member, data, dir);
    json entry = {{"lambda_q", lambda}, {"output_dir", dir.string()}};
    if (!o.records.empty()) entry["final_val_acc"] = o.records.back().val_acc;
    if (o.quantized) entry["quantized"] = accuracy_json(*o.quantized);
    runs.push_back(std::move(entry));
  }
  json out = {{"runs", runs}};
  if (!root.empty()) write_file(root / "sweep.json", out.dump(2) + "\n");
  return out.dump(2);
}

PairedOutcome run_paired(const ExperimentConfig& cfg, const std::optional<fs::path>& out_dir) {
  if (!uses_sinreq(cfg.train.mode)) throw ConfigError("paired: configured mode must include SinReQ");
  const fs::path root = out_dir.value_or(fs::path(cfg.output_dir));
  const Split data = make_dataset(cfg.dataset);
  const Model start = prepare_model(cfg, data);

  ExperimentConfig with = cfg;
  with.train.eval_quantize = true;
  ExperimentConfig without = with;
  without.train.mode = without_sinreq(cfg.train.mode);
  const fs::path dir_with = root.empty() ? fs::path() : root / "with_sinreq";
  const fs::path dir_without = root.empty() ? fs::path() : root / "without_sinreq";
  if (!root.empty()) {
    with.output_dir = dir_with.string();
    without.output_dir = dir_without.string();
  }

  PairedOutcome out;
  out.with_sinreq = *train_from(start, with, data, dir_with).quantized;
  out.without_sinreq = *train_from(start, without, data, dir_without).quantized;
  const double drop_with = out.with_sinreq.pre_snap - out.with_sinreq.post_snap;
  const double drop_without = out.without_sinreq.pre_snap - out.without_sinreq.post_snap;
  json j = {{"with_sinreq", accuracy_json(out.with_sinreq)},
            {"without_sinreq", accuracy_json(out.without_sinreq)},
            {"post_snap_gain", out.with_sinreq.post_snap - out.without_sinreq.post_snap},
            {"drop_reduction", drop_without - drop_with}};
  out.json = j.dump(2);
  if (!root.empty()) write_file(root / "comparison.json", out.json + "\n");
  return out;
}

}  // namespace sinreq
