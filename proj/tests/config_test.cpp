#include <gtest/gtest.h>

#include <filesystem>

#include "sinreq/config.hpp"
#include "sinreq/errors.hpp"

using namespace sinreq;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "model": {"input_shape": [2], "layers": [
    {"name": "fc1", "kind": "dense", "in": 2, "out": 4, "quant": {"scheme": "wrpn", "bits": 3}},
    {"name": "relu", "kind": "relu"},
    {"name": "fc2", "kind": "dense", "in": 4, "out": 2, "quant": {"scheme": "dorefa", "bits": 2}}]},
  "dataset": {"kind": "spirals"},
  "train": {"mode": "fp_sinreq", "seed": 5,
            "schedule": {"kind": "exponential", "start": 0.01, "end": 10},
            "layer_schedules": {"fc2": {"kind": "constant", "value": 0.5}}}
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(ConfigTest, ParsesWithDefaults) {
  const ExperimentConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.model.layers.size(), 3u);
  EXPECT_EQ(c.model.layers[2].quant, (QuantizerSpec{QuantScheme::DoReFa, 2}));
  EXPECT_EQ(c.dataset.kind, DatasetKind::Spirals);
  EXPECT_EQ(c.train.mode, TrainMode::FP_SinReQ);
  EXPECT_EQ(c.train.epochs, 60);
  EXPECT_EQ(c.train.learning_rate, 0.05);
  EXPECT_EQ(c.train.momentum, 0.9);
  EXPECT_EQ(c.init_seed, 5u);
  EXPECT_EQ(c.train.schedule.kind, ScheduleKind::Exponential);
  EXPECT_EQ(c.train.layer_schedules.at("fc2"), LambdaSchedule::constant(0.5));
}

TEST(ConfigTest, EchoRoundTrips) {
  const ExperimentConfig c = parse_config(kMinimal);
  const std::string echoed = dump_config(c);
  EXPECT_TRUE(parse_config(echoed) == c);
  EXPECT_EQ(dump_config(parse_config(echoed)), echoed);
}

TEST(ConfigTest, ShippedConfigsParseAndRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(SINREQ_CONFIG_DIR)) {
    SCOPED_TRACE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path());
    EXPECT_TRUE(parse_config(dump_config(c)) == c);
  }
}

TEST(ConfigTest, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(with(kMinimal, "\"seed\": 5", "\"seed\": 5, \"lamda_q\": 1")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"kind\": \"spirals\"", "\"kind\": \"spirals\", \"nosie\": 1")),
               ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"kind\": \"relu\"", "\"kind\": \"relu\", \"in\": 4")), ConfigError);
}

TEST(ConfigTest, RejectsBadValues) {
  EXPECT_THROW(parse_config(with(kMinimal, "\"schema_version\": 1", "\"schema_version\": 2")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"schema_version\": 1,", "")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"mode\": \"fp_sinreq\"", "\"mode\": \"sgd\"")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"in\": 4", "\"in\": 5")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"start\": 0.01", "\"start\": 0")), ConfigError);
  EXPECT_THROW(parse_config(with(kMinimal, "\"bits\": 2", "\"bits\": 1")), Error);
  EXPECT_THROW(parse_config(with(kMinimal, "\"seed\": 5", "\"seed\": \"five\"")), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  // eval_quantize needs quantizers on every trainable layer.
  EXPECT_THROW(parse_config(with(kMinimal, ", \"quant\": {\"scheme\": \"wrpn\", \"bits\": 3}", "")), ConfigError);
  EXPECT_NO_THROW(parse_config(with(with(kMinimal, ", \"quant\": {\"scheme\": \"wrpn\", \"bits\": 3}", ""),
                                    "\"seed\": 5", "\"seed\": 5, \"eval_quantize\": false")));
}
