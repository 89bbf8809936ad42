#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sinreq/tensor.hpp"

namespace sinreq {

struct Dataset {
  Tensor features;  // [N, per-sample shape...]
  std::vector<int> labels;
  std::size_t classes = 0;
  // Blobs only: standardized class centers, [classes, dim].
  std::optional<Tensor> centers;

  std::size_t size() const noexcept { return labels.size(); }
  // Rows `indices` gathered into a new dataset.
  Dataset subset(std::span<const std::size_t> indices) const;
};

enum class DatasetKind { Blobs, Spirals, IdxDigits };

std::string_view dataset_kind_name(DatasetKind k);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Spirals;
  std::size_t classes = 2;
  std::size_t samples_per_class = 200;
  double noise = 0.1;
  std::size_t dim = 2;          // Blobs feature dimension
  double center_spread = 5.0;   // Blobs centers drawn from [-spread, spread]^dim
  double turns = 1.0;           // Spirals revolutions per arm
  std::string images;           // IdxDigits
  std::string labels;           // IdxDigits
  std::size_t limit = 0;        // IdxDigits: keep first `limit` samples, 0 = all
  double train_fraction = 0.8;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

void validate(const DatasetSpec& spec);

// Blobs or Spirals, features standardized per dimension.
Dataset generate_synthetic(const DatasetSpec& spec, std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset val;
};

// Seeded shuffle, then the first round(train_fraction * N) samples train.
Split split(const Dataset& data, double train_fraction, std::uint64_t seed);

// Generates or loads the dataset and splits it, both with spec.seed.
Split make_dataset(const DatasetSpec& spec);

// ---- IDX ----------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

// Throws ParseError with field "magic", "dimensions" or "payload".
IdxArray parse_idx(std::string_view bytes, std::uint32_t expected_magic);
std::string encode_idx(const IdxArray& array);

// Images become [N, 1, rows, cols] with pixels scaled to [0, 1]. Mismatched
// image and label counts raise ParseError with field "count".
Dataset decode_idx_dataset(std::string_view image_bytes, std::string_view label_bytes, std::size_t classes = 10);
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t classes = 10);

// Inverse of load_idx: (image file bytes, label file bytes).
std::pair<std::string, std::string> write_idx(const Dataset& data);

}  // namespace sinreq
