#include "sinreq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "sinreq/checkpoint.hpp"
#include "sinreq/errors.hpp"
#include "sinreq/random.hpp"

namespace sinreq {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw DimensionError("subset: no indices");
  const std::size_t row = features.size() / labels.size();
  Shape shape = features.shape();
  shape[0] = indices.size();
  Dataset out;
  out.features = Tensor(shape);
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= labels.size()) throw IndexError("subset: index out of range");
    std::copy_n(features.data().begin() + static_cast<std::ptrdiff_t>(src * row), row,
                out.features.data().begin() + static_cast<std::ptrdiff_t>(i * row));
    out.labels.push_back(labels[src]);
  }
  out.classes = classes;
  out.centers = centers;
  return out;
}

std::string_view dataset_kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::Blobs: return "blobs";
    case DatasetKind::Spirals: return "spirals";
    case DatasetKind::IdxDigits: return "idx_digits";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (DatasetKind k : {DatasetKind::Blobs, DatasetKind::Spirals, DatasetKind::IdxDigits}) {
    if (dataset_kind_name(k) == name) return k;
  }
  throw SpecError("unknown dataset kind '" + std::string(name) + "'");
}

void validate(const DatasetSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.val_fraction < 0.0 ||
      std::abs(spec.train_fraction + spec.val_fraction - 1.0) > 1e-9) {
    throw SpecError("split fractions must be positive and sum to 1");
  }
  if (spec.kind == DatasetKind::IdxDigits) {
    if (spec.images.empty() || spec.labels.empty()) throw SpecError("idx_digits needs image and label paths");
    if (spec.classes < 2) throw SpecError("idx_digits needs at least 2 classes");
    return;
  }
  if (spec.classes < 2) throw SpecError("synthetic datasets need at least 2 classes");
  if (spec.samples_per_class == 0) throw SpecError("samples_per_class must be positive");
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) throw SpecError("noise must be finite and non-negative");
  if (spec.kind == DatasetKind::Blobs && (spec.dim == 0 || !(spec.center_spread > 0.0))) {
    throw SpecError("blobs need positive dim and center_spread");
  }
  if (spec.kind == DatasetKind::Spirals && !(spec.turns > 0.0)) throw SpecError("spirals need positive turns");
}

namespace {

// Per-column standardization of an [N, D] matrix; `extra` rows get the same map.
void standardize(Tensor& x, std::optional<Tensor>& extra) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i * d + j] - mean) * (x[i * d + j] - mean);
    var /= static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) x[i * d + j] = (x[i * d + j] - mean) / sd;
    if (extra) {
      for (std::size_t i = 0; i < extra->dim(0); ++i) (*extra)[i * d + j] = ((*extra)[i * d + j] - mean) / sd;
    }
  }
}

}  // namespace

Dataset generate_synthetic(const DatasetSpec& spec, std::uint64_t seed) {
  validate(spec);
  if (spec.kind == DatasetKind::IdxDigits) throw SpecError("generate_synthetic: idx_digits is not synthetic");
  Rng rng(seed);
  const std::size_t C = spec.classes, per = spec.samples_per_class;
  Dataset out;
  out.classes = C;
  if (spec.kind == DatasetKind::Blobs) {
    const std::size_t D = spec.dim;
    Tensor centers({C, D});
    for (double& v : centers.values()) v = rng.uniform(-spec.center_spread, spec.center_spread);
    out.features = Tensor({C * per, D});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t row = c * per + i;
        for (std::size_t j = 0; j < D; ++j) {
          out.features[row * D + j] = centers[c * D + j] + spec.noise * rng.normal();
        }
        out.labels.push_back(static_cast<int>(c));
      }
    }
    out.centers = std::move(centers);
  } else {
    out.features = Tensor({C * per, 2});
    for (std::size_t c = 0; c < C; ++c) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(C);
      for (std::size_t i = 0; i < per; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(per);
        const double theta = 2.0 * std::numbers::pi * spec.turns * t + phase + spec.noise * rng.normal();
        const std::size_t row = c * per + i;
        out.features[row * 2] = t * std::cos(theta);
        out.features[row * 2 + 1] = t * std::sin(theta);
        out.labels.push_back(static_cast<int>(c));
      }
    }
  }
  standardize(out.features, out.centers);
  return out;
}

Split split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0) throw SpecError("train split is empty");
  Split s;
  s.train = data.subset(std::span(idx).first(n_train));
  // An empty validation split falls back to the training data.
  s.val = n_train < n ? data.subset(std::span(idx).subspan(n_train)) : s.train;
  return s;
}

Split make_dataset(const DatasetSpec& spec) {
  validate(spec);
  Dataset data;
  if (spec.kind == DatasetKind::IdxDigits) {
    data = load_idx(std::filesystem::path(spec.images), std::filesystem::path(spec.labels), spec.classes);
    if (spec.limit > 0 && spec.limit < data.size()) {
      std::vector<std::size_t> idx(spec.limit);
      std::iota(idx.begin(), idx.end(), 0);
      data = data.subset(idx);
    }
  } else {
    data = generate_synthetic(spec, spec.seed);
  }
  return split(data, spec.train_fraction, spec.seed ^ 0x9E3779B97F4A7C15ull);
}

// ---- IDX ----------------------------------------------------------------

namespace {

std::uint32_t big_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}

void put_big_u32(std::string& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

}  // namespace

IdxArray parse_idx(std::string_view bytes, std::uint32_t expected_magic) {
  if (bytes.size() < 4) throw ParseError("magic", "file shorter than the magic number");
  IdxArray a;
  a.magic = big_u32(bytes, 0);
  if (a.magic != expected_magic) {
    throw ParseError("magic", "expected " + hex32(expected_magic) + ", found " + hex32(a.magic));
  }
  const std::size_t rank = a.magic & 0xFFu;
  if (bytes.size() < 4 + 4 * rank) throw ParseError("dimensions", "truncated dimension sizes");
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    a.dims.push_back(big_u32(bytes, 4 + 4 * i));
    n *= a.dims.back();
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() - header < n) {
    throw ParseError("payload", "expected " + std::to_string(n) + " bytes, found " + std::to_string(bytes.size() - header));
  }
  if (bytes.size() - header > n) throw ParseError("payload", "trailing bytes after payload");
  a.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return a;
}

std::string encode_idx(const IdxArray& a) {
  std::string out;
  put_big_u32(out, a.magic);
  for (std::uint32_t d : a.dims) put_big_u32(out, d);
  out.append(a.payload.begin(), a.payload.end());
  return out;
}

Dataset decode_idx_dataset(std::string_view image_bytes, std::string_view label_bytes, std::size_t classes) {
  const IdxArray images = parse_idx(image_bytes, kIdxImageMagic);
  const IdxArray labels = parse_idx(label_bytes, kIdxLabelMagic);
  if (images.dims[0] != labels.dims[0]) {
    throw ParseError("count", std::to_string(images.dims[0]) + " images but " + std::to_string(labels.dims[0]) +
                                  " labels");
  }
  if (images.dims[0] == 0 || images.dims[1] == 0 || images.dims[2] == 0) {
    throw ParseError("dimensions", "empty image array");
  }
  Dataset out;
  out.classes = classes;
  out.features = Tensor({images.dims[0], 1, images.dims[1], images.dims[2]});
  for (std::size_t i = 0; i < images.payload.size(); ++i) out.features[i] = images.payload[i] / 255.0;
  for (std::uint8_t l : labels.payload) {
    if (l >= classes) throw ParseError("labels", "label " + std::to_string(l) + " exceeds class count");
    out.labels.push_back(l);
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t classes) {
  return decode_idx_dataset(read_file(images), read_file(labels), classes);
}

std::pair<std::string, std::string> write_idx(const Dataset& data) {
  const Tensor& x = data.features;
  if (x.rank() != 4 || x.dim(1) != 1) throw DimensionError("write_idx: features must be [N,1,H,W]");
  IdxArray images{kIdxImageMagic,
                  {static_cast<std::uint32_t>(x.dim(0)), static_cast<std::uint32_t>(x.dim(2)),
                   static_cast<std::uint32_t>(x.dim(3))},
                  {}};
  images.payload.reserve(x.size());
  for (double v : x.data()) images.payload.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  IdxArray labels{kIdxLabelMagic, {static_cast<std::uint32_t>(data.size())}, {}};
  for (int l : data.labels) labels.payload.push_back(static_cast<std::uint8_t>(l));
  return {encode_idx(images), encode_idx(labels)};
}

}  // namespace sinreq
