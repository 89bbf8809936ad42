#include <gtest/gtest.h>

#include "sinreq/errors.hpp"
#include "sinreq/tensor.hpp"

using namespace sinreq;

TEST(TensorTest, ShapeMustMatchData) {
  EXPECT_NO_THROW(Tensor({2, 3}, std::vector<double>(6, 1.0)));
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5, 1.0)), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 0}), DimensionError);
  EXPECT_THROW(Tensor(Shape{}), DimensionError);
}

TEST(TensorTest, FromRows) {
  const Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.shape(), (Shape{2, 3}));
  EXPECT_EQ(t[4], 5.0);
  EXPECT_THROW(Tensor::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST(TensorTest, GradSlot) {
  Tensor t({3});
  EXPECT_FALSE(t.has_grad());
  EXPECT_THROW(t.grad(), ContractError);
  t.zero_grad();
  ASSERT_TRUE(t.has_grad());
  EXPECT_EQ(t.grad().size(), 3u);
  EXPECT_THROW(t.set_grad({1.0}), DimensionError);
}

TEST(TensorTest, ReshapeKeepsData) {
  const Tensor t = Tensor::from_rows({{1, 2}, {3, 4}});
  const Tensor r = t.reshaped({4});
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped({3}), DimensionError);
}

TEST(TensorTest, ItemRequiresOneElement) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor({2}).item(), DimensionError);
}
