#include <gtest/gtest.h>

#include <cmath>

#include "sinreq/dataset.hpp"
#include "sinreq/errors.hpp"

using namespace sinreq;

namespace {

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

// Two 2x2 images and their labels.
std::string image_fixture() {
  return be32(0x803) + be32(2) + be32(2) + be32(2) + std::string("\x00\xff\x80\x10\x01\x02\x03\x04", 8);
}
std::string label_fixture() { return be32(0x801) + be32(2) + std::string("\x07\x02", 2); }

template <typename F>
std::string parse_field(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.field();
  }
  return "";
}

DatasetSpec blobs(double noise) {
  DatasetSpec s;
  s.kind = DatasetKind::Blobs;
  s.classes = 3;
  s.samples_per_class = 50;
  s.noise = noise;
  s.dim = 2;
  s.center_spread = 5.0;
  s.seed = 4;
  return s;
}

}  // namespace

TEST(SyntheticTest, NoiselessBlobsSitOnCenters) {
  const Dataset d = generate_synthetic(blobs(0.0), 11);
  ASSERT_TRUE(d.centers.has_value());
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(d.features[i * 2 + j], (*d.centers)[static_cast<std::size_t>(d.labels[i]) * 2 + j], 1e-12);
    }
  }
}

TEST(SyntheticTest, Deterministic) {
  DatasetSpec s;
  s.kind = DatasetKind::Spirals;
  const Dataset a = generate_synthetic(s, 3), b = generate_synthetic(s, 3);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.features == generate_synthetic(s, 4).features);
}

TEST(SyntheticTest, Standardized) {
  for (DatasetKind kind : {DatasetKind::Blobs, DatasetKind::Spirals}) {
    DatasetSpec s = blobs(0.3);
    s.kind = kind;
    const Dataset d = generate_synthetic(s, 1);
    for (std::size_t j = 0; j < 2; ++j) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) sum += d.features[i * 2 + j];
      const double mean = sum / static_cast<double>(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) sq += std::pow(d.features[i * 2 + j] - mean, 2);
      EXPECT_NEAR(mean, 0.0, 1e-12);
      EXPECT_NEAR(sq / static_cast<double>(d.size()), 1.0, 1e-12);
    }
    EXPECT_EQ(d.size(), 150u);
  }
}

TEST(SyntheticTest, WellSeparatedBlobsNearestCentroid) {
  DatasetSpec s = blobs(0.02);
  s.center_spread = 10.0;
  const Dataset d = generate_synthetic(s, 2);
  const Tensor& c = *d.centers;
  const auto dist = [&](std::size_t i, std::size_t k) {
    return std::hypot(d.features[i * 2] - c[k * 2], d.features[i * 2 + 1] - c[k * 2 + 1]);
  };
  // Separation measured in units of the empirical (standardized) noise.
  double spread = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) spread += std::pow(dist(i, static_cast<std::size_t>(d.labels[i])), 2);
  const double sigma = std::sqrt(spread / (2.0 * static_cast<double>(d.size())));
  double min_gap = 1e300;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      min_gap = std::min(min_gap, std::hypot(c[a * 2] - c[b * 2], c[a * 2 + 1] - c[b * 2 + 1]));
  ASSERT_GT(min_gap, 10 * sigma);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (dist(i, k) < dist(i, best)) best = k;
    correct += static_cast<int>(best) == d.labels[i];
  }
  EXPECT_EQ(correct, d.size());
}

TEST(SyntheticTest, InvalidSpecs) {
  DatasetSpec s = blobs(0.1);
  s.samples_per_class = 0;
  EXPECT_THROW(generate_synthetic(s, 1), SpecError);
  s = blobs(-0.1);
  EXPECT_THROW(generate_synthetic(s, 1), SpecError);
  s = blobs(0.1);
  s.train_fraction = 0.7;
  EXPECT_THROW(validate(s), SpecError);
  s = blobs(0.1);
  s.kind = DatasetKind::IdxDigits;
  EXPECT_THROW(generate_synthetic(s, 1), SpecError);
}

TEST(SplitTest, PartitionsAllSamples) {
  const Dataset d = generate_synthetic(blobs(0.2), 5);
  const Split s = split(d, 0.8, 9);
  EXPECT_EQ(s.train.size(), 120u);
  EXPECT_EQ(s.val.size(), 30u);
  const Split again = split(d, 0.8, 9);
  EXPECT_EQ(s.train.features, again.train.features);
}

TEST(IdxTest, ConstructedFixture) {
  const Dataset d = decode_idx_dataset(image_fixture(), label_fixture());
  EXPECT_EQ(d.features.shape(), (Shape{2, 1, 2, 2}));
  EXPECT_EQ(d.labels, (std::vector<int>{7, 2}));
  EXPECT_EQ(d.features[0], 0.0);
  EXPECT_EQ(d.features[1], 1.0);
  EXPECT_EQ(d.features[2], 128.0 / 255.0);
  EXPECT_EQ(d.features[7], 4.0 / 255.0);
}

TEST(IdxTest, RoundTripByteIdentical) {
  const auto [img, lab] = write_idx(decode_idx_dataset(image_fixture(), label_fixture()));
  EXPECT_EQ(img, image_fixture());
  EXPECT_EQ(lab, label_fixture());
  const IdxArray a = parse_idx(image_fixture(), kIdxImageMagic);
  EXPECT_EQ(encode_idx(a), image_fixture());
}

TEST(IdxTest, CorruptFixtures) {
  const std::string img = image_fixture(), lab = label_fixture();
  EXPECT_EQ(parse_field([&] { parse_idx(lab, kIdxImageMagic); }), "magic");
  EXPECT_EQ(parse_field([&] { parse_idx(img.substr(0, 10), kIdxImageMagic); }), "dimensions");
  EXPECT_EQ(parse_field([&] { parse_idx(img.substr(0, img.size() - 1), kIdxImageMagic); }), "payload");
  EXPECT_EQ(parse_field([&] { parse_idx(img + "z", kIdxImageMagic); }), "payload");
  const std::string one_label = be32(0x801) + be32(1) + std::string("\x03", 1);
  EXPECT_EQ(parse_field([&] { decode_idx_dataset(img, one_label); }), "count");
  const std::string bad_label = be32(0x801) + be32(2) + std::string("\x03\x0b", 2);
  EXPECT_EQ(parse_field([&] { decode_idx_dataset(img, bad_label); }), "labels");
}
