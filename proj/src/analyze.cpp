#include "sinreq/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sinreq/errors.hpp"
#include "sinreq/random.hpp"

namespace sinreq {

double quant_error(const Tensor& w, const LevelGeometry& g) {
  if (w.empty()) throw DimensionError("quant_error: empty tensor");
  double sum = 0.0;
  for (double v : w.data()) sum += std::abs(v - snap_value(v, g));
  return sum / static_cast<double>(w.size());
}

double frac_near_level(const Tensor& w, const LevelGeometry& g, double eps_fraction) {
  if (w.empty()) throw DimensionError("frac_near_level: empty tensor");
  const double eps = eps_fraction * g.period;
  std::size_t near = 0;
  for (double v : w.data()) {
    if (std::abs(v - snap_value(v, g)) <= eps) ++near;
  }
  return static_cast<double>(near) / static_cast<double>(w.size());
}

std::vector<std::size_t> histogram(const Tensor& w, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw ParameterError("histogram: bins must be positive");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("histogram: need lo < hi");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : w.data()) {
    const double pos = std::floor((v - lo) / width);
    const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++counts[bin];
  }
  return counts;
}

TrajectorySampler::TrajectorySampler(const Model& m, std::size_t per_layer, std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& p : m.parameters()) {
    const std::size_t n = p.weights.size();
    if (per_layer > n) {
      throw ParameterError("cannot track " + std::to_string(per_layer) + " weights in layer '" + p.name + "' of " +
                           std::to_string(n));
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    // Partial Fisher-Yates: the first per_layer slots are a uniform sample.
    for (std::size_t i = 0; i < per_layer; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
    all.resize(per_layer);
    indices_.emplace_back(p.name, std::move(all));
  }
}

std::vector<std::pair<std::string, TrajectoryPoints>> TrajectorySampler::sample(const Model& m) const {
  std::vector<std::pair<std::string, TrajectoryPoints>> out;
  for (const auto& [name, idx] : indices_) {
    const Tensor& w = m.parameters(name).weights;
    TrajectoryPoints pts;
    for (std::size_t i : idx) pts.emplace_back(i, w[i]);
    out.emplace_back(name, std::move(pts));
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string metrics_csv(const std::vector<RunRecord>& records) {
  std::string out = "epoch,train_acc,val_acc,task_loss,total_loss";
  if (!records.empty()) {
    for (const auto& [name, _] : records.front().per_layer) {
      for (const char* col : {"sinreq_loss", "lambda_q", "quant_error", "frac_near_level"}) {
        out += ',' + name + '_' + col;
      }
    }
  }
  out += '\n';
  for (const RunRecord& r : records) {
    out += std::to_string(r.epoch);
    for (double v : {r.train_acc, r.val_acc, r.task_loss, r.total_loss}) out += ',' + format_number(v);
    for (const auto& [_, l] : r.per_layer) {
      for (double v : {l.sinreq_loss, l.lambda_q, l.quant_error, l.frac_near_level}) out += ',' + format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<std::size_t>& counts, double lo, double hi) {
  std::string out = "bin_lo,bin_hi,count\n";
  const double width = (hi - lo) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double a = lo + width * static_cast<double>(i);
    const double b = i + 1 == counts.size() ? hi : lo + width * static_cast<double>(i + 1);
    out += format_number(a) + ',' + format_number(b) + ',' + std::to_string(counts[i]) + '\n';
  }
  return out;
}

std::string trajectory_csv(const std::vector<std::pair<int, TrajectoryPoints>>& rows) {
  std::string out = "epoch";
  if (!rows.empty()) {
    for (const auto& [idx, _] : rows.front().second) out += ",w" + std::to_string(idx);
  }
  out += '\n';
  for (const auto& [epoch, pts] : rows) {
    out += std::to_string(epoch);
    for (const auto& [_, v] : pts) out += ',' + format_number(v);
    out += '\n';
  }
  return out;
}

}  // namespace sinreq
