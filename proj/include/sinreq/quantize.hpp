#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sinreq/tensor.hpp"

namespace sinreq {

enum class QuantScheme { DoReFa, WRPN, UniformMidTread, UniformMidRise };

std::string_view scheme_name(QuantScheme s);
QuantScheme parse_scheme(std::string_view name);

struct QuantizerSpec {
  QuantScheme scheme = QuantScheme::WRPN;
  int bits = 3;

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;
};

// Throws ParameterError if the bitwidth is unsupported by the scheme.
void validate(const QuantizerSpec& spec);

// Uniform level lattice shared by a quantizer and its periodic regulariser.
//
// Adjacent levels are `period` apart and sin^2(pi * (v + delta) / period)
// vanishes at every level v, so the regulariser minima sit on the levels.
struct LevelGeometry {
  std::vector<double> levels;  // strictly increasing, within [-1, 1]
  double period = 1.0;
  double delta = 0.0;  // in [0, period)
};

LevelGeometry level_geometry(const QuantizerSpec& spec);

// Round half away from zero.
double round_half_away(double x);

// w_q = 2 * quantize_k(tanh(w) / (2 max|tanh(w)|) + 1/2) - 1, with the
// maximum taken over the whole tensor. Throws DegenerateScaleError when the
// tensor is all zeros.
Tensor dorefa_quantize(const Tensor& w, int bits);

// Clip to [-1, 1], then round(n w) / n with n = 2^(bits-1) - 1.
Tensor wrpn_quantize(const Tensor& w, int bits);

// Nearest level per element; exact midpoints go to the larger level.
Tensor snap_to_levels(const Tensor& w, const LevelGeometry& g);
double snap_value(double w, const LevelGeometry& g);

// Scheme-appropriate quantizer used in the straight-through forward pass.
Tensor quantize(const Tensor& w, const QuantizerSpec& spec);

}  // namespace sinreq
