#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sinreq/model.hpp"
#include "sinreq/tensor.hpp"

namespace sinreq {

// Binary parameter file:
//   "SINREQCK" | version u32 | record count u32
//   per record: name length u32 | name | dtype u8 (1 = f64) | rank u32 |
//               dims u32 x rank | f64 x prod(dims)
// All integers and floats little-endian.
inline constexpr std::string_view kCheckpointMagic = "SINREQCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

std::string encode_checkpoint(std::span<const NamedTensor> tensors);
// Throws ParseError naming the offending field.
std::vector<NamedTensor> decode_checkpoint(std::string_view bytes);

// "<layer>.weight" and "<layer>.bias" for each trainable layer.
std::vector<NamedTensor> checkpoint_tensors(const Model& m);

void save_checkpoint(const Model& m, const std::filesystem::path& path);
// Overwrites the model's parameters; names and shapes must match exactly.
void load_checkpoint(Model& m, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sinreq
