#include <gtest/gtest.h>

#include <cmath>

#include "nesgd/errors.hpp"
#include "nesgd/geometry.hpp"
#include "nesgd/lemma_lab.hpp"
#include "test_util.hpp"

using namespace nesgd;
using nesgd::testing::mat;
using nesgd::testing::small_spaces;
using nesgd::testing::vec;

namespace {

// Dense basis of the operator subspace over the flattened point space.
std::vector<Eigen::MatrixXd> subspace_basis(const OperatorSpace& space) {
  const Index dim = space.dim();
  std::vector<Eigen::MatrixXd> basis;
  switch (space.kind()) {
    case SpaceKind::kScalar:
      basis.push_back(Eigen::MatrixXd::Identity(dim, dim));
      break;
    case SpaceKind::kDiagonal:
      for (Index i = 0; i < dim; ++i) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
        e(i, i) = 1.0;
        basis.push_back(e);
      }
      break;
    case SpaceKind::kLeftMatrix: {
      const Index m = space.rows();
      const Index n = space.cols();
      for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) {
          Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
          e(i, j) = e(j, i) = 1.0;
          Eigen::MatrixXd big = Eigen::MatrixXd::Zero(dim, dim);
          for (Index c = 0; c < n; ++c) big.block(c * m, c * m, m, m) = e;
          basis.push_back(big);
        }
      }
      break;
    }
  }
  return basis;
}

// Frobenius least-squares projection computed from the normal equations.
Eigen::MatrixXd projection_oracle(const OperatorSpace& space, const Eigen::MatrixXd& h) {
  const auto basis = subspace_basis(space);
  const auto k = static_cast<Index>(basis.size());
  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd rhs(k);
  for (Index a = 0; a < k; ++a) {
    rhs(a) = basis[a].cwiseProduct(h).sum();
    for (Index b = 0; b < k; ++b) gram(a, b) = basis[a].cwiseProduct(basis[b]).sum();
  }
  const Eigen::VectorXd coef = gram.ldlt().solve(rhs);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(h.rows(), h.cols());
  for (Index a = 0; a < k; ++a) out += coef(a) * basis[a];
  return out;
}

Eigen::VectorXd flat(const Point& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.values().data(), x.size());
}

// Materializes a possibly singular projection payload as a dense operator.
Eigen::MatrixXd dense_of(const StructuredOperator& op) { return op.dense(); }

}  // namespace

TEST(ProjectRank1, ScalarExample) {
  const auto s = OperatorSpace::scalar(2);
  EXPECT_NEAR(project_rank1(s, vec({1, 1})).payload()(0, 0), 1.0, 1e-15);
}

TEST(ProjectRank1, DiagonalExample) {
  const auto s = OperatorSpace::diagonal(2);
  const auto p = project_rank1(s, vec({3, -4})).payload();
  EXPECT_DOUBLE_EQ(p(0), 9.0);
  EXPECT_DOUBLE_EQ(p(1), 16.0);
}

TEST(ProjectRank1, LeftMatrixExample) {
  const auto s = OperatorSpace::left_matrix(2, 2);
  Eigen::MatrixXd want(2, 2);
  want << 4.5, 0, 0, 0;
  EXPECT_TRUE(project_rank1(s, mat({{3, 0}, {0, 0}})).payload().isApprox(want, 1e-15));
}

TEST(ProjectRank1, MatchesLeastSquaresOracle) {
  Rng rng(11);
  for (const auto& space : small_spaces()) {
    for (int t = 0; t < 20; ++t) {
      const Point x = lab::random_point(space, rng);
      const Eigen::VectorXd v = flat(x);
      const Eigen::MatrixXd want = projection_oracle(space, v * v.transpose());
      const Eigen::MatrixXd got = dense_of(project_rank1(space, x));
      EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12) << space.describe();
    }
  }
}

TEST(ProjectGeneral, Examples) {
  Eigen::MatrixXd h(2, 2);
  h << 2, 5, 5, 0;
  EXPECT_NEAR(project_general(OperatorSpace::scalar(2), h).payload()(0, 0), 1.0, 1e-15);
  const auto d = project_general(OperatorSpace::diagonal(2), h).payload();
  EXPECT_DOUBLE_EQ(d(0), 2.0);
  EXPECT_DOUBLE_EQ(d(1), 0.0);

  const auto left = OperatorSpace::left_matrix(2, 2);
  const Point x = mat({{3, 1}, {-2, 0.5}});
  const Eigen::VectorXd v = flat(x);
  EXPECT_TRUE(project_general(left, v * v.transpose())
                  .payload()
                  .isApprox(project_rank1(left, x).payload(), 1e-14));
}

TEST(ProjectGeneral, MatchesOracleOnRandomSymmetric) {
  Rng rng(12);
  for (const auto& space : small_spaces()) {
    const Index dim = space.dim();
    for (int t = 0; t < 20; ++t) {
      const Eigen::MatrixXd g = rng.normal_matrix(dim, dim);
      const Eigen::MatrixXd h = g + g.transpose();
      const Eigen::MatrixXd got = project_general(space, h).dense();
      EXPECT_LT((got - projection_oracle(space, h)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ProjectGeneral, IsLinear) {
  Rng rng(13);
  for (const auto& space : small_spaces()) {
    const Index dim = space.dim();
    Eigen::MatrixXd a = rng.normal_matrix(dim, dim);
    Eigen::MatrixXd b = rng.normal_matrix(dim, dim);
    a += a.transpose().eval();
    b += b.transpose().eval();
    const Eigen::MatrixXd lhs = project_general(space, 2.0 * a - 3.0 * b).payload();
    const Eigen::MatrixXd rhs =
        2.0 * project_general(space, a).payload() - 3.0 * project_general(space, b).payload();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ProjectGeneral, Errors) {
  Eigen::MatrixXd nonsym(2, 2);
  nonsym << 1, 2, 0, 1;
  EXPECT_THROW(project_general(OperatorSpace::diagonal(2), nonsym), DomainError);
  EXPECT_THROW(project_general(OperatorSpace::diagonal(3), Eigen::MatrixXd::Identity(2, 2)),
               ShapeError);
  const auto big = OperatorSpace::left_matrix(9, 9);
  EXPECT_THROW(project_general(big, Eigen::MatrixXd::Identity(81, 81)), DomainError);
}

TEST(NormR, Examples) {
  EXPECT_DOUBLE_EQ(norm_R(OperatorSpace::diagonal(3), vec({3, -4, 0})), 4.0);
  EXPECT_DOUBLE_EQ(norm_R(OperatorSpace::scalar(4), vec({2, 0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(norm_R(OperatorSpace::scalar(4), vec({1, 1, 1, 1})), 1.0);
  for (const auto& space : small_spaces()) {
    EXPECT_EQ(norm_R(space, space.zero_point()), 0.0);
    EXPECT_EQ(norm_R_star(space, space.zero_point()), 0.0);
  }
  EXPECT_THROW(norm_R(OperatorSpace::diagonal(3), vec({1, 2})), ShapeError);
  EXPECT_THROW(norm_R(OperatorSpace::left_matrix(2, 2), vec({1, 2, 3, 4})), ShapeError);
}

TEST(NormRStar, DiagonalMatchesGridSupremum) {
  const auto space = OperatorSpace::diagonal(2);
  const Point x = vec({3, -4});
  EXPECT_DOUBLE_EQ(norm_R_star(space, x), 7.0);
  double best = -1e300;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double y0 = -1.0 + 2.0 * i / n;
      const double y1 = -1.0 + 2.0 * j / n;
      best = std::max(best, 3 * y0 - 4 * y1);
    }
  }
  EXPECT_NEAR(best, 7.0, 1e-12);
}

TEST(NormRStar, ScalarMatchesSampledSupremum) {
  const auto space = OperatorSpace::scalar(2);
  const Point x = vec({1.5, -0.5});
  double best = -1e300;
  for (int i = 0; i < 100000; ++i) {
    const double t = 2.0 * M_PI * i / 100000;
    // Unit R-ball boundary: ||y||_2 = sqrt(2).
    best = std::max(best, std::sqrt(2.0) * (1.5 * std::cos(t) - 0.5 * std::sin(t)));
  }
  EXPECT_NEAR(best, norm_R_star(space, x), 1e-3);
}

TEST(NormRStar, LeftMatrixExample) {
  EXPECT_NEAR(norm_R_star(OperatorSpace::left_matrix(2, 2), mat({{3, 0}, {0, 0}})),
              3.0 * std::sqrt(2.0), 1e-14);
}

TEST(Lmo, DiagonalExampleBySignPatternSearch) {
  const auto space = OperatorSpace::diagonal(3);
  const Point g = vec({2, -1, 0});
  const Point u = lmo(space, g);
  EXPECT_EQ(u.values(), vec({1, -1, 0}).values());
  double best = -1e300;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      for (int c = -1; c <= 1; ++c) best = std::max(best, 2.0 * a - 1.0 * b + 0.0 * c);
    }
  }
  EXPECT_DOUBLE_EQ(dot(g, u), best);
  EXPECT_DOUBLE_EQ(best, 3.0);
}

TEST(Lmo, ZeroMapsToZero) {
  for (const auto& space : small_spaces()) {
    EXPECT_EQ(lmo(space, space.zero_point()).values().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Lmo, LeftMatrixExample) {
  const auto space = OperatorSpace::left_matrix(2, 2);
  const Point g = mat({{3, 0}, {0, 0}});
  const Point u = lmo(space, g);
  EXPECT_TRUE(u.values().isApprox(mat({{std::sqrt(2.0), 0}, {0, 0}}).values(), 1e-14));
  EXPECT_NEAR(dot(g, u), norm_R_star(space, g), 1e-13);
  EXPECT_NEAR(dot(g, u), 3.0 * std::sqrt(2.0), 1e-13);
}

TEST(Lmo, ScalarIsNormalizedGradient) {
  const auto space = OperatorSpace::scalar(4);
  const Point g = vec({1, 2, 2, 4});
  const Point u = lmo(space, g);
  EXPECT_TRUE(u.values().isApprox(2.0 * g.values() / 5.0, 1e-15));
}

TEST(Lmo, OptimalAgainstRandomBallPoints) {
  Rng rng(14);
  for (const auto& space : small_spaces()) {
    for (int t = 0; t < 50; ++t) {
      const Point g = lab::random_point(space, rng);
      const double value = dot(g, lmo(space, g));
      for (int s = 0; s < 50; ++s) {
        const Point y = lab::random_feasible_point(space, 1.0, rng);
        ASSERT_LE(dot(g, y), value + 1e-12);
      }
    }
  }
}

TEST(Lmo, SingularValuesAreSqrtN) {
  Rng rng(15);
  const auto space = OperatorSpace::left_matrix(3, 5);
  for (int t = 0; t < 100; ++t) {
    Point g = lab::random_point(space, rng);
    if (t % 2) g.values().row(1).setZero();
    const Eigen::VectorXd s =
        Eigen::JacobiSVD<Eigen::MatrixXd>(lmo(space, g).values()).singularValues();
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > 1e-6) EXPECT_NEAR(s(i), std::sqrt(5.0), 1e-9);
    }
  }
}

TEST(WeightedSqnorm, Examples) {
  const auto d = OperatorSpace::diagonal(2);
  Eigen::VectorXd h(2);
  h << 1, 4;
  const auto op = StructuredOperator::diagonal(d, h);
  EXPECT_DOUBLE_EQ(weighted_sqnorm(op, vec({1, 1})), 5.0);
  EXPECT_DOUBLE_EQ(weighted_sqnorm(op, vec({1, 1}), true), 1.25);
  const auto s = OperatorSpace::scalar(3);
  EXPECT_DOUBLE_EQ(weighted_sqnorm(StructuredOperator::scalar(s, 2.0), vec({1, 1, 1})), 6.0);
}

TEST(WeightedSqnorm, SingularInverseThrows) {
  const auto d = OperatorSpace::diagonal(2);
  const auto singular = project_rank1(d, vec({1, 0}));
  EXPECT_THROW(weighted_sqnorm(singular, vec({1, 1}), true), DomainError);
}

TEST(WeightedSqnorm, MatchesDenseQuadraticForm) {
  Rng rng(16);
  for (const auto& space : small_spaces()) {
    const auto h = lab::random_positive(space, rng);
    const Point x = lab::random_point(space, rng);
    const Eigen::VectorXd v = flat(x);
    const Eigen::MatrixXd dense = h.dense();
    EXPECT_NEAR(weighted_sqnorm(h, x), v.dot(dense * v), 1e-10 * (1 + v.squaredNorm()));
    EXPECT_NEAR(weighted_sqnorm(h, x, true), v.dot(dense.ldlt().solve(v)),
                1e-8 * (1 + v.squaredNorm()));
  }
}

TEST(TraceNorm, Examples) {
  Eigen::VectorXd h(3);
  h << 1, 2, 3;
  EXPECT_DOUBLE_EQ(trace_norm(StructuredOperator::diagonal(OperatorSpace::diagonal(3), h)), 6.0);
  EXPECT_DOUBLE_EQ(trace_norm(StructuredOperator::scalar(OperatorSpace::scalar(4), 0.5)), 2.0);
  Eigen::MatrixXd b(2, 2);
  b << 1.5, 0.2, 0.2, 0.5;
  const auto left = StructuredOperator::left(OperatorSpace::left_matrix(2, 3), b);
  EXPECT_DOUBLE_EQ(trace_norm(left), 6.0);
  // Sum of operator eigenvalues.
  EXPECT_NEAR(left.dense().trace(), 6.0, 1e-14);
}

TEST(StructuredOperator, RejectsNonPositivePayloads) {
  EXPECT_THROW(StructuredOperator::scalar(OperatorSpace::scalar(2), 0.0), DomainError);
  Eigen::VectorXd h(2);
  h << 1, -1;
  EXPECT_THROW(StructuredOperator::diagonal(OperatorSpace::diagonal(2), h), DomainError);
  Eigen::MatrixXd b(2, 2);
  b << 1, 2, 2, 1;
  EXPECT_THROW(StructuredOperator::left(OperatorSpace::left_matrix(2, 2), b), DomainError);
}

TEST(CombineB, Examples) {
  const auto d = OperatorSpace::diagonal(2);
  const auto ones = StructuredOperator::diagonal(d, Eigen::VectorXd::Ones(2));
  const auto b = combine_B(ones, ones, ones, ones);
  EXPECT_NEAR(b.payload()(0), 0.5, 1e-15);
  EXPECT_NEAR(b.payload()(1), 0.5, 1e-15);

  Eigen::VectorXd l(2);
  l << 3, 1;
  const auto b2 = combine_B(StructuredOperator::diagonal(d, l), ones, ones, ones);
  EXPECT_NEAR(b2.payload()(0), 0.5625, 1e-15);
  EXPECT_NEAR(b2.payload()(1), 0.4375, 1e-15);
  EXPECT_NEAR(trace_norm(b2), 1.0, 1e-12);
}

TEST(CombineB, TraceNormIsOneAndMixedSpacesThrow) {
  Rng rng(17);
  for (const auto& space : small_spaces()) {
    const auto b = combine_B(lab::random_positive(space, rng), lab::random_positive(space, rng),
                             lab::random_positive(space, rng), lab::random_positive(space, rng));
    EXPECT_NEAR(trace_norm(b), 1.0, 1e-12);
  }
  const auto a = StructuredOperator::identity(OperatorSpace::diagonal(2));
  const auto s = StructuredOperator::identity(OperatorSpace::scalar(2));
  EXPECT_THROW(combine_B(a, a, a, s), ShapeError);
}

TEST(OperatorSpace, ParsesAndDescribes) {
  EXPECT_EQ(parse_space_kind("diagonal"), SpaceKind::kDiagonal);
  EXPECT_EQ(parse_space_kind(to_string(SpaceKind::kLeftMatrix)), SpaceKind::kLeftMatrix);
  EXPECT_THROW(parse_space_kind("spectral"), DomainError);
  EXPECT_EQ(OperatorSpace::left_matrix(2, 3).dim(), 6);
  EXPECT_TRUE(OperatorSpace::scalar(3).accepts(vec({1, 2, 3})));
  EXPECT_FALSE(OperatorSpace::scalar(3).accepts(mat({{1, 2, 3}})));
}
