#include "sinreq/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "sinreq/errors.hpp"

namespace sinreq {

std::string_view scheme_name(QuantScheme s) {
  switch (s) {
    case QuantScheme::DoReFa: return "dorefa";
    case QuantScheme::WRPN: return "wrpn";
    case QuantScheme::UniformMidTread: return "mid_tread";
    case QuantScheme::UniformMidRise: return "mid_rise";
  }
  return "unknown";
}

QuantScheme parse_scheme(std::string_view name) {
  for (QuantScheme s : {QuantScheme::DoReFa, QuantScheme::WRPN, QuantScheme::UniformMidTread,
                        QuantScheme::UniformMidRise}) {
    if (scheme_name(s) == name) return s;
  }
  throw ParameterError("unknown quantization scheme '" + std::string(name) + "'");
}

namespace {

constexpr int kMaxBits = 24;

// Largest integer code of a k-bit unsigned fixed-point grid on [0, 1].
double unsigned_code_max(int bits) { return std::ldexp(1.0, bits) - 1.0; }

// Magnitude code count of a sign-magnitude k-bit grid on [-1, 1].
double signed_code_max(int bits) { return std::ldexp(1.0, bits - 1) - 1.0; }

double dorefa_level(double m, double n) { return 2.0 * m / n - 1.0; }

}  // namespace

void validate(const QuantizerSpec& spec) {
  const int min_bits = (spec.scheme == QuantScheme::DoReFa || spec.scheme == QuantScheme::WRPN) ? 2 : 1;
  if (spec.bits < min_bits || spec.bits > kMaxBits) {
    throw ParameterError(std::string(scheme_name(spec.scheme)) + " needs bitwidth in [" + std::to_string(min_bits) +
                         ", " + std::to_string(kMaxBits) + "], got " + std::to_string(spec.bits));
  }
}

LevelGeometry level_geometry(const QuantizerSpec& spec) {
  validate(spec);
  LevelGeometry g;
  switch (spec.scheme) {
    case QuantScheme::DoReFa:
    case QuantScheme::UniformMidRise: {
      // 2^k levels from -1 to 1; zero is not a level.
      const double n = unsigned_code_max(spec.bits);
      for (double m = 0; m <= n; m += 1.0) g.levels.push_back(dorefa_level(m, n));
      g.period = 2.0 / n;
      g.delta = g.period / 2.0;
      break;
    }
    case QuantScheme::WRPN: {
      const double n = signed_code_max(spec.bits);
      for (double m = -n; m <= n; m += 1.0) g.levels.push_back(m / n);
      g.period = 1.0 / n;
      g.delta = 0.0;
      break;
    }
    case QuantScheme::UniformMidTread: {
      // 2^k + 1 levels on a 2^(1-k) grid; k = 1 is ternary {-1, 0, 1}.
      const double half = std::ldexp(1.0, spec.bits - 1);
      g.period = 1.0 / half;
      for (double m = -half; m <= half; m += 1.0) g.levels.push_back(m / half);
      g.delta = 0.0;
      break;
    }
  }
  return g;
}

double round_half_away(double x) { return std::round(x); }

Tensor dorefa_quantize(const Tensor& w, int bits) {
  validate({QuantScheme::DoReFa, bits});
  if (w.empty()) throw DimensionError("dorefa_quantize: empty tensor");
  double max_abs = 0.0;
  for (double v : w.data()) max_abs = std::max(max_abs, std::abs(std::tanh(v)));
  if (max_abs == 0.0) throw DegenerateScaleError("dorefa_quantize: max|tanh(w)| is zero");
  const double n = unsigned_code_max(bits);
  Tensor out(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double u = std::tanh(w[i]) / (2.0 * max_abs) + 0.5;
    const double m = std::clamp(round_half_away(n * u), 0.0, n);
    out[i] = dorefa_level(m, n);
  }
  return out;
}

Tensor wrpn_quantize(const Tensor& w, int bits) {
  validate({QuantScheme::WRPN, bits});
  const double n = signed_code_max(bits);
  Tensor out(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double clipped = std::clamp(w[i], -1.0, 1.0);
    out[i] = round_half_away(n * clipped) / n;
  }
  return out;
}

double snap_value(double w, const LevelGeometry& g) {
  const auto& lv = g.levels;
  auto hi = std::lower_bound(lv.begin(), lv.end(), w);
  if (hi == lv.begin()) return lv.front();
  if (hi == lv.end()) return lv.back();
  const double upper = *hi;
  const double lower = *(hi - 1);
  return (upper - w) <= (w - lower) ? upper : lower;
}

Tensor snap_to_levels(const Tensor& w, const LevelGeometry& g) {
  if (g.levels.empty()) throw ParameterError("snap_to_levels: geometry has no levels");
  Tensor out(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = snap_value(w[i], g);
  return out;
}

Tensor quantize(const Tensor& w, const QuantizerSpec& spec) {
  switch (spec.scheme) {
    case QuantScheme::DoReFa: return dorefa_quantize(w, spec.bits);
    case QuantScheme::WRPN: return wrpn_quantize(w, spec.bits);
    case QuantScheme::UniformMidTread:
    case QuantScheme::UniformMidRise: return snap_to_levels(w, level_geometry(spec));
  }
  throw ParameterError("quantize: unknown scheme");
}

}  // namespace sinreq
