#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nesgd/errors.hpp"
#include "nesgd/point.hpp"
#include "nesgd/random.hpp"
#include "test_util.hpp"

using namespace nesgd;
using nesgd::testing::mat;
using nesgd::testing::vec;

TEST(Point, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Point::vector(Eigen::VectorXd()), ShapeError);
  EXPECT_THROW(vec({1.0, std::numeric_limits<double>::quiet_NaN()}), DomainError);
  EXPECT_THROW(vec({std::numeric_limits<double>::infinity()}), DomainError);
}

TEST(Point, ShapesNeverMix) {
  const Point v = vec({1, 2, 3, 4});
  const Point m = mat({{1, 2}, {3, 4}});
  EXPECT_FALSE(v.same_shape(m));
  EXPECT_THROW(v + m, ShapeError);
  EXPECT_THROW(dot(v, m), ShapeError);
  EXPECT_THROW(vec({1, 2}) - vec({1, 2, 3}), ShapeError);
}

TEST(Point, Arithmetic) {
  const Point a = vec({1, 2});
  const Point b = vec({3, -1});
  EXPECT_EQ((a + b).values(), vec({4, 1}).values());
  EXPECT_EQ((a - b).values(), vec({-2, 3}).values());
  EXPECT_EQ((2.0 * a).values(), vec({2, 4}).values());
  EXPECT_DOUBLE_EQ(dot(a, b), 1.0);
  EXPECT_DOUBLE_EQ(dot(mat({{1, 2}, {3, 4}}), mat({{1, 0}, {0, 1}})), 5.0);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
  EXPECT_EQ(a.draws(), b.draws());
}

TEST(Rng, CopyReplaysStream) {
  Rng a(7);
  a.normal();
  Rng b = a;
  EXPECT_EQ(a.normal_matrix(3, 2), b.normal_matrix(3, 2));
}

TEST(Rng, DifferentSeedsDiffer) {
  Rng a(1);
  Rng b(2);
  EXPECT_NE(a.normal(), b.normal());
  EXPECT_NE(derive_seed(5, 0), derive_seed(5, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

TEST(Rng, RademacherIsSigned) {
  Rng r(3);
  int plus = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = r.rademacher();
    ASSERT_TRUE(s == 1.0 || s == -1.0);
    plus += s > 0;
  }
  EXPECT_NEAR(plus, 500, 80);
}
