#include <gtest/gtest.h>

#include <cmath>

#include "sinreq/errors.hpp"
#include "sinreq/schedule.hpp"

using namespace sinreq;

TEST(ScheduleTest, Constant) {
  const auto s = LambdaSchedule::constant(2.5);
  for (std::int64_t t : {0, 1, 17, 1000000}) EXPECT_EQ(lambda_at(s, t), 2.5);
  EXPECT_EQ(lambda_at(LambdaSchedule::constant(0.0), 3), 0.0);
}

TEST(ScheduleTest, ExponentialEndpointsAndMidpoint) {
  const auto s = LambdaSchedule::exponential(0.01, 10.0, 100);
  EXPECT_NEAR(lambda_at(s, 0) / 0.01, 1.0, 1e-12);
  EXPECT_NEAR(lambda_at(s, 100) / 10.0, 1.0, 1e-12);
  EXPECT_NEAR(lambda_at(s, 50), std::sqrt(0.01 * 10.0), 1e-12);
  EXPECT_EQ(lambda_at(s, 250), 10.0);
  EXPECT_NEAR(lambda_at(s, 25), 0.01 * std::pow(1000.0, 0.25), 1e-12);
}

TEST(ScheduleTest, MonotoneAndPositive) {
  const auto s = LambdaSchedule::exponential(0.01, 10.0, 300);
  double prev = lambda_at(s, 0);
  for (std::int64_t t = 1; t <= 300; ++t) {
    const double v = lambda_at(s, t);
    EXPECT_GT(v, prev);
    prev = v;
  }
  for (std::int64_t t = 300; t < 320; ++t) EXPECT_EQ(lambda_at(s, t), 10.0);
  const auto down = LambdaSchedule::exponential(5.0, 0.5, 40);
  for (std::int64_t t = 0; t < 60; ++t) EXPECT_GT(lambda_at(down, t), 0.0);
}

TEST(ScheduleTest, InvalidSchedules) {
  EXPECT_THROW(lambda_at(LambdaSchedule::exponential(0.0, 1.0, 10), 0), ParameterError);
  EXPECT_THROW(lambda_at(LambdaSchedule::exponential(1.0, 0.0, 10), 0), ParameterError);
  EXPECT_THROW(lambda_at(LambdaSchedule::exponential(1.0, 2.0, 0), 0), ParameterError);
  EXPECT_THROW(lambda_at(LambdaSchedule::constant(-1.0), 0), ParameterError);
  EXPECT_THROW(lambda_at(LambdaSchedule::constant(1.0), -1), ParameterError);
}
