#include <gtest/gtest.h>

#include <filesystem>

#include "sinreq/checkpoint.hpp"
#include "sinreq/errors.hpp"

using namespace sinreq;

namespace {

ModelSpec spec() {
  ModelSpec s;
  s.input_shape = {2};
  s.layers = {{"fc1", LayerKind::Dense, 2, 4}, {"relu", LayerKind::ReLU}, {"fc2", LayerKind::Dense, 4, 2}};
  return s;
}

std::string field_of(const std::string& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const ParseError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(CheckpointTest, HeaderLayout) {
  const Model m = init(spec(), 1);
  const std::string bytes = encode_checkpoint(checkpoint_tensors(m));
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 8), "SINREQCK");
  EXPECT_EQ(bytes.substr(8, 4), std::string("\x01\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(12, 4), std::string("\x04\x00\x00\x00", 4));
  // name length, name, dtype, rank, dims of the first record.
  EXPECT_EQ(bytes.substr(16, 4), std::string("\x0a\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(20, 10), "fc1.weight");
  EXPECT_EQ(bytes[30], '\x01');
  EXPECT_EQ(bytes.substr(31, 4), std::string("\x02\x00\x00\x00", 4));
  // header + 4 records' fixed parts + names + dims + data
  const std::size_t expected = 16 + 4 * 9 + (10 + 8 + 10 + 8) + 4 * (2 + 1 + 2 + 1) + 8 * (8 + 4 + 8 + 2);
  EXPECT_EQ(bytes.size(), expected);
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  const Model m = init(spec(), 7);
  const std::string bytes = encode_checkpoint(checkpoint_tensors(m));
  const auto decoded = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(decoded), bytes);

  const auto path = std::filesystem::temp_directory_path() / "sinreq_checkpoint_test" / "m.bin";
  save_checkpoint(m, path);
  Model other = init(spec(), 99);
  load_checkpoint(other, path);
  EXPECT_TRUE(other == m);
  EXPECT_EQ(read_file(path), bytes);
  std::filesystem::remove_all(path.parent_path());
}

TEST(CheckpointTest, CorruptInputsNameTheField) {
  const std::string good = encode_checkpoint(checkpoint_tensors(init(spec(), 2)));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(field_of(bad_magic), "magic");
  std::string bad_version = good;
  bad_version[8] = 2;
  EXPECT_EQ(field_of(bad_version), "version");
  EXPECT_EQ(field_of(good.substr(0, 14)), "count");
  std::string bad_dtype = good;
  bad_dtype[30] = 2;
  EXPECT_EQ(field_of(bad_dtype), "dtype");
  EXPECT_EQ(field_of(good.substr(0, good.size() - 3)), "data");
  EXPECT_EQ(field_of(good + "x"), "trailer");
}

TEST(CheckpointTest, MismatchedModelRejected) {
  const auto path = std::filesystem::temp_directory_path() / "sinreq_checkpoint_mismatch.bin";
  save_checkpoint(init(spec(), 1), path);
  ModelSpec wider = spec();
  wider.layers[0].out = 5;
  wider.layers[2].in = 5;
  Model m = init(wider, 1);
  EXPECT_THROW(load_checkpoint(m, path), ConfigError);
  std::filesystem::remove(path);
}
